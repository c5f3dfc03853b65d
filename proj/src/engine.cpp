#include "lsl/engine.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "lsl/errors.hpp"
#include "lsl/parallel.hpp"

namespace lsl {

namespace {

struct Component {
    std::vector<int> inputs;  // global input ids, sorted
    std::vector<int> gates;   // global gate ids, sorted
};

struct Split {
    std::vector<Component> comps;
    std::vector<int> const_gates;  // arity-0 gates
};

int dsu_find(std::vector<int>& parent, int v) {
    while (parent[static_cast<std::size_t>(v)] != v) {
        parent[static_cast<std::size_t>(v)] =
            parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
        v = parent[static_cast<std::size_t>(v)];
    }
    return v;
}

Split split_components(const LocalFn& f) {
    std::vector<int> parent(static_cast<std::size_t>(f.m()));
    std::iota(parent.begin(), parent.end(), 0);
    Split s;
    for (int i = 0; i < f.n(); ++i) {
        const OutputGate& g = f.gate(i);
        if (g.arity() == 0) {
            s.const_gates.push_back(i);
            continue;
        }
        int r = dsu_find(parent, g.inputs[0]);
        for (int in : g.inputs) parent[static_cast<std::size_t>(dsu_find(parent, in))] = r;
    }
    std::map<int, std::size_t> root_to_comp;
    for (int i = 0; i < f.n(); ++i) {
        const OutputGate& g = f.gate(i);
        if (g.arity() == 0) continue;
        int r = dsu_find(parent, g.inputs[0]);
        auto [it, fresh] = root_to_comp.emplace(r, s.comps.size());
        if (fresh) s.comps.emplace_back();
        s.comps[it->second].gates.push_back(i);
    }
    for (int v = 0; v < f.m(); ++v) {
        int r = dsu_find(parent, v);
        auto it = root_to_comp.find(r);
        if (it != root_to_comp.end()) s.comps[it->second].inputs.push_back(v);
        // inputs feeding no gate carry no dependency and cancel against the
        // uniform measure; they are simply skipped
    }
    return s;
}

// ---- trackers: what the DP accumulates per determined gate --------------

struct WeightTracker {
    static std::uint64_t bits(int n_gates) {
        return static_cast<std::uint64_t>(std::bit_width(static_cast<unsigned>(n_gates)));
    }
    static std::uint64_t add(std::uint64_t tracker, int /*local_gate*/, int out_bit) {
        return tracker + static_cast<std::uint64_t>(out_bit);
    }
};

struct StringTracker {
    static std::uint64_t bits(int n_gates) { return static_cast<std::uint64_t>(n_gates); }
    static std::uint64_t add(std::uint64_t tracker, int local_gate, int out_bit) {
        return tracker | (static_cast<std::uint64_t>(out_bit) << local_gate);
    }
};

// Component result: exact counts keyed by tracker value, denominator 2^den_exp.
struct CompCounts {
    std::map<std::uint64_t, Int> counts;
    long den_exp = 0;
};

// Min-fill elimination order over the component's input interaction graph
// (inputs adjacent when they feed a common gate). Deterministic tie-break by
// smallest local index.
std::vector<int> minfill_order(int k, const std::vector<std::set<int>>& adj0) {
    std::vector<std::set<int>> adj = adj0;
    std::vector<bool> gone(static_cast<std::size_t>(k), false);
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(k));
    for (int step = 0; step < k; ++step) {
        int best = -1;
        long best_fill = -1;
        for (int v = 0; v < k; ++v) {
            if (gone[static_cast<std::size_t>(v)]) continue;
            long fill = 0;
            const auto& nb = adj[static_cast<std::size_t>(v)];
            for (auto it = nb.begin(); it != nb.end(); ++it)
                for (auto jt = std::next(it); jt != nb.end(); ++jt)
                    if (!adj[static_cast<std::size_t>(*it)].count(*jt)) ++fill;
            if (best < 0 || fill < best_fill) {
                best = v;
                best_fill = fill;
            }
        }
        order.push_back(best);
        gone[static_cast<std::size_t>(best)] = true;
        const auto nb = adj[static_cast<std::size_t>(best)];
        for (int u : nb) {
            adj[static_cast<std::size_t>(u)].erase(best);
            for (int w : nb)
                if (u != w) adj[static_cast<std::size_t>(u)].insert(w);
        }
        adj[static_cast<std::size_t>(best)].clear();
    }
    return order;
}

// Frontier elimination DP over one component. Assigns inputs in min-fill
// order; the state is (assignment of live inputs, accumulated tracker).
// An input dies once every gate containing it is determined.
template <class Tracker>
CompCounts frontier_component(const LocalFn& f, const Component& comp,
                              const EngineOptions& opts) {
    int k = static_cast<int>(comp.inputs.size());
    int ng = static_cast<int>(comp.gates.size());
    std::uint64_t tracker_bits = Tracker::bits(ng);

    std::vector<int> local_of(static_cast<std::size_t>(f.m()), -1);
    for (int j = 0; j < k; ++j) local_of[static_cast<std::size_t>(comp.inputs[j])] = j;

    std::vector<std::set<int>> adj(static_cast<std::size_t>(k));
    for (int gi : comp.gates) {
        const OutputGate& g = f.gate(gi);
        for (std::size_t a = 0; a < g.inputs.size(); ++a)
            for (std::size_t b = a + 1; b < g.inputs.size(); ++b) {
                int u = local_of[static_cast<std::size_t>(g.inputs[a])];
                int v = local_of[static_cast<std::size_t>(g.inputs[b])];
                adj[static_cast<std::size_t>(u)].insert(v);
                adj[static_cast<std::size_t>(v)].insert(u);
            }
    }
    std::vector<int> order = minfill_order(k, adj);
    std::vector<int> pos(static_cast<std::size_t>(k));
    for (int s = 0; s < k; ++s) pos[static_cast<std::size_t>(order[static_cast<std::size_t>(s)])] = s;

    // gate determination step = when its last input gets assigned
    std::vector<std::vector<int>> gates_at(static_cast<std::size_t>(k));
    std::vector<int> death(static_cast<std::size_t>(k), -1);
    for (std::size_t ci = 0; ci < comp.gates.size(); ++ci) {
        const OutputGate& g = f.gate(comp.gates[ci]);
        int last = 0;
        for (int in : g.inputs)
            last = std::max(last, pos[static_cast<std::size_t>(local_of[static_cast<std::size_t>(in)])]);
        gates_at[static_cast<std::size_t>(last)].push_back(static_cast<int>(ci));
        for (int in : g.inputs) {
            int lv = local_of[static_cast<std::size_t>(in)];
            death[static_cast<std::size_t>(lv)] = std::max(death[static_cast<std::size_t>(lv)], last);
        }
    }
    std::vector<std::vector<int>> deaths_at(static_cast<std::size_t>(k));
    for (int v = 0; v < k; ++v)
        deaths_at[static_cast<std::size_t>(death[static_cast<std::size_t>(v)])].push_back(v);

    std::vector<int> slot_of(static_cast<std::size_t>(k), -1);
    std::vector<int> live;  // local input ids, slot order

    std::unordered_map<std::uint64_t, Int> states;
    states.emplace(0, Int(1));

    for (int s = 0; s < k; ++s) {
        int v = order[static_cast<std::size_t>(s)];
        int old_width = static_cast<int>(live.size());
        int width1 = old_width + 1;
        if (width1 > opts.frontier_width_budget)
            throw ResourceLimit("frontier engine: elimination width exceeds budget");
        if (static_cast<std::uint64_t>(width1) + tracker_bits > 62)
            throw ResourceLimit("frontier engine: state key too wide");
        slot_of[static_cast<std::size_t>(v)] = old_width;
        live.push_back(v);

        const std::vector<int>& det = gates_at[static_cast<std::size_t>(s)];
        const std::vector<int>& dying = deaths_at[static_cast<std::size_t>(s)];

        // slot compression map after this step's deaths
        std::vector<int> keep_slot(static_cast<std::size_t>(width1), -1);
        {
            std::vector<bool> dies(static_cast<std::size_t>(width1), false);
            for (int u : dying) dies[static_cast<std::size_t>(slot_of[static_cast<std::size_t>(u)])] = true;
            int nx = 0;
            for (int sl = 0; sl < width1; ++sl)
                if (!dies[static_cast<std::size_t>(sl)]) keep_slot[static_cast<std::size_t>(sl)] = nx++;
        }
        int new_width = width1 - static_cast<int>(dying.size());

        std::uint64_t old_mask = (old_width == 64) ? ~std::uint64_t{0}
                                                   : ((std::uint64_t{1} << old_width) - 1);
        std::unordered_map<std::uint64_t, Int> next;
        next.reserve(states.size() * 2);
        for (const auto& [key, cnt] : states) {
            std::uint64_t mask = key & old_mask;
            std::uint64_t tracker = key >> old_width;
            for (std::uint64_t b = 0; b < 2; ++b) {
                std::uint64_t mask1 = mask | (b << old_width);
                std::uint64_t tr = tracker;
                for (int ci : det) {
                    const OutputGate& g = f.gate(comp.gates[static_cast<std::size_t>(ci)]);
                    std::size_t idx = 0;
                    for (std::size_t j = 0; j < g.inputs.size(); ++j) {
                        int sl = slot_of[static_cast<std::size_t>(
                            local_of[static_cast<std::size_t>(g.inputs[j])])];
                        idx |= ((mask1 >> sl) & 1) << j;
                    }
                    tr = Tracker::add(tr, ci, g.table[idx]);
                }
                std::uint64_t mask2 = 0;
                for (int sl = 0; sl < width1; ++sl) {
                    int nsl = keep_slot[static_cast<std::size_t>(sl)];
                    if (nsl >= 0) mask2 |= ((mask1 >> sl) & 1) << nsl;
                }
                next[(tr << new_width) | mask2] += cnt;
            }
        }
        states = std::move(next);

        // update live layout
        std::vector<int> new_live;
        new_live.reserve(static_cast<std::size_t>(new_width));
        for (int u : live) {
            int nsl = keep_slot[static_cast<std::size_t>(slot_of[static_cast<std::size_t>(u)])];
            if (nsl >= 0) new_live.push_back(u);
        }
        for (int u : dying) slot_of[static_cast<std::size_t>(u)] = -1;
        live = std::move(new_live);
        for (std::size_t sl = 0; sl < live.size(); ++sl)
            slot_of[static_cast<std::size_t>(live[sl])] = static_cast<int>(sl);
    }

    CompCounts result;
    result.den_exp = k;
    for (const auto& [tracker, cnt] : states) result.counts[tracker] += cnt;
    return result;
}

// Direct enumeration of one component (2^inputs assignments).
template <class Tracker>
CompCounts enumerate_component(const LocalFn& f, const Component& comp) {
    int k = static_cast<int>(comp.inputs.size());
    std::vector<std::vector<int>> gate_pos(comp.gates.size());
    for (std::size_t ci = 0; ci < comp.gates.size(); ++ci) {
        const OutputGate& g = f.gate(comp.gates[ci]);
        for (int in : g.inputs) {
            auto it = std::lower_bound(comp.inputs.begin(), comp.inputs.end(), in);
            gate_pos[ci].push_back(static_cast<int>(it - comp.inputs.begin()));
        }
    }
    std::unordered_map<std::uint64_t, std::uint64_t> counts;
    std::uint64_t total = std::uint64_t{1} << k;
    for (std::uint64_t a = 0; a < total; ++a) {
        std::uint64_t tr = 0;
        for (std::size_t ci = 0; ci < comp.gates.size(); ++ci) {
            const OutputGate& g = f.gate(comp.gates[ci]);
            std::size_t idx = 0;
            for (std::size_t j = 0; j < gate_pos[ci].size(); ++j)
                idx |= ((a >> gate_pos[ci][j]) & 1) << j;
            tr = Tracker::add(tr, static_cast<int>(ci), g.table[idx]);
        }
        ++counts[tr];
    }
    CompCounts result;
    result.den_exp = k;
    for (const auto& [tr, c] : counts) result.counts.emplace(tr, Int(c));
    return result;
}

template <class Tracker>
CompCounts solve_component(const LocalFn& f, const Component& comp, const EngineOptions& opts) {
    if (static_cast<int>(comp.inputs.size()) <= opts.component_input_budget)
        return enumerate_component<Tracker>(f, comp);
    return frontier_component<Tracker>(f, comp, opts);
}

int resolve_threads(const EngineOptions& opts) {
    return opts.threads > 0 ? opts.threads : default_threads();
}

Dist naive_output_distribution(const LocalFn& f, const EngineOptions& opts) {
    if (f.m() > opts.naive_input_budget)
        throw ResourceLimit("naive engine: 2^m enumeration over budget");
    if (f.n() > Dist::kMaxBits)
        throw ResourceLimit("string-level distribution needs n <= 62");
    int threads = resolve_threads(opts);
    std::uint64_t total = std::uint64_t{1} << f.m();
    bool dense = f.n() <= 20;
    std::vector<std::vector<std::uint64_t>> dense_parts;
    std::vector<std::map<std::uint64_t, std::uint64_t>> sparse_parts;
    std::size_t nshards = static_cast<std::size_t>(std::min<std::uint64_t>(
        static_cast<std::uint64_t>(threads), std::max<std::uint64_t>(total, 1)));
    dense_parts.resize(nshards);
    sparse_parts.resize(nshards);
    parallel_shards(total, threads, [&](int shard, std::size_t begin, std::size_t end) {
        if (dense) {
            dense_parts[static_cast<std::size_t>(shard)].assign(std::size_t{1} << f.n(), 0);
            auto& c = dense_parts[static_cast<std::size_t>(shard)];
            for (std::uint64_t x = begin; x < end; ++x) ++c[f.evaluate(x)];
        } else {
            auto& c = sparse_parts[static_cast<std::size_t>(shard)];
            for (std::uint64_t x = begin; x < end; ++x) ++c[f.evaluate(x)];
        }
    });
    std::map<std::uint64_t, Int> counts;
    for (std::size_t shard = 0; shard < nshards; ++shard) {
        if (dense) {
            const auto& c = dense_parts[shard];
            for (std::uint64_t y = 0; y < c.size(); ++y)
                if (c[y]) counts[y] += c[y];
        } else {
            for (const auto& [y, c] : sparse_parts[shard]) counts[y] += c;
        }
    }
    return Dist::from_counts(f.n(), counts, f.m());
}

WDist naive_weight_distribution(const LocalFn& f, const EngineOptions& opts) {
    if (f.m() > opts.naive_input_budget)
        throw ResourceLimit("naive engine: 2^m enumeration over budget");
    int threads = resolve_threads(opts);
    std::uint64_t total = std::uint64_t{1} << f.m();
    std::size_t len = static_cast<std::size_t>(f.n()) + 1;
    std::vector<std::vector<std::uint64_t>> parts;
    std::size_t nshards = static_cast<std::size_t>(std::min<std::uint64_t>(
        static_cast<std::uint64_t>(threads), std::max<std::uint64_t>(total, 1)));
    parts.assign(nshards, std::vector<std::uint64_t>(len, 0));
    bool packed = f.m() <= 64 && f.n() <= 64;
    std::size_t words = static_cast<std::size_t>((f.m() + 63) / 64);
    parallel_shards(total, threads, [&](int shard, std::size_t begin, std::size_t end) {
        auto& c = parts[static_cast<std::size_t>(shard)];
        if (packed) {
            for (std::uint64_t x = begin; x < end; ++x)
                ++c[static_cast<std::size_t>(std::popcount(f.evaluate(x)))];
        } else {
            std::vector<std::uint64_t> xw(words, 0);
            for (std::uint64_t x = begin; x < end; ++x) {
                xw[0] = x;
                auto out = f.evaluate_words(xw);
                int w = 0;
                for (std::uint64_t word : out) w += std::popcount(word);
                ++c[static_cast<std::size_t>(w)];
            }
        }
    });
    std::vector<Rat> pmf(len, Rat(0));
    Rat denom = pow2(f.m());
    for (std::size_t w = 0; w < len; ++w) {
        Int sum = 0;
        for (std::size_t shard = 0; shard < nshards; ++shard) sum += parts[shard][w];
        if (sum != 0) pmf[w] = Rat(sum) / denom;
    }
    return WDist::exact(f.n(), std::move(pmf));
}

Dist frontier_output_distribution(const LocalFn& f, const EngineOptions& opts) {
    if (f.n() > Dist::kMaxBits)
        throw ResourceLimit("string-level distribution needs n <= 62");
    Split split = split_components(f);
    std::uint64_t const_bits = 0;
    for (int gi : split.const_gates)
        const_bits |= static_cast<std::uint64_t>(f.gate(gi).table[0]) << gi;

    std::vector<CompCounts> results(split.comps.size());
    int threads = resolve_threads(opts);
    parallel_shards(split.comps.size(), threads, [&](int, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            results[i] = solve_component<StringTracker>(f, split.comps[i], opts);
    });

    std::map<std::uint64_t, Int> acc;
    acc.emplace(const_bits, Int(1));
    long den_exp = 0;
    for (std::size_t i = 0; i < split.comps.size(); ++i) {
        const Component& comp = split.comps[i];
        if (acc.size() * results[i].counts.size() > opts.support_budget)
            throw ResourceLimit("frontier engine: string support over budget");
        std::map<std::uint64_t, Int> next;
        for (const auto& [local, ccnt] : results[i].counts) {
            std::uint64_t global = 0;
            for (std::size_t j = 0; j < comp.gates.size(); ++j)
                global |= ((local >> j) & 1) << comp.gates[j];
            for (const auto& [key, cnt] : acc) next[key | global] += cnt * ccnt;
        }
        acc = std::move(next);
        den_exp += results[i].den_exp;
    }
    return Dist::from_counts(f.n(), acc, den_exp);
}

WDist frontier_weight_distribution(const LocalFn& f, const EngineOptions& opts) {
    Split split = split_components(f);
    int const_weight = 0;
    for (int gi : split.const_gates) const_weight += f.gate(gi).table[0];

    std::vector<CompCounts> results(split.comps.size());
    int threads = resolve_threads(opts);
    parallel_shards(split.comps.size(), threads, [&](int, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            results[i] = solve_component<WeightTracker>(f, split.comps[i], opts);
    });

    std::vector<Int> acc(static_cast<std::size_t>(const_weight) + 1, Int(0));
    acc[static_cast<std::size_t>(const_weight)] = 1;
    long den_exp = 0;
    for (std::size_t i = 0; i < split.comps.size(); ++i) {
        std::size_t ng = split.comps[i].gates.size();
        std::vector<Int> next(acc.size() + ng, Int(0));
        for (const auto& [w, ccnt] : results[i].counts)
            for (std::size_t aw = 0; aw < acc.size(); ++aw)
                if (acc[aw] != 0) next[aw + w] += acc[aw] * ccnt;
        acc = std::move(next);
        den_exp += results[i].den_exp;
    }
    std::vector<Rat> pmf(static_cast<std::size_t>(f.n()) + 1, Rat(0));
    Rat denom = pow2(den_exp);
    for (std::size_t w = 0; w < acc.size(); ++w)
        if (acc[w] != 0) pmf[w] = Rat(acc[w]) / denom;
    return WDist::exact(f.n(), std::move(pmf));
}

}  // namespace

Dist output_distribution(const LocalFn& f, const EngineOptions& opts) {
    switch (opts.engine) {
        case Engine::naive: return naive_output_distribution(f, opts);
        case Engine::frontier: return frontier_output_distribution(f, opts);
        case Engine::automatic: break;
    }
    try {
        return frontier_output_distribution(f, opts);
    } catch (const ResourceLimit&) {
        return naive_output_distribution(f, opts);
    }
}

WDist weight_distribution(const LocalFn& f, const EngineOptions& opts) {
    switch (opts.engine) {
        case Engine::naive: return naive_weight_distribution(f, opts);
        case Engine::frontier: return frontier_weight_distribution(f, opts);
        case Engine::automatic: break;
    }
    try {
        return frontier_weight_distribution(f, opts);
    } catch (const ResourceLimit&) {
        return naive_weight_distribution(f, opts);
    }
}

}  // namespace lsl
