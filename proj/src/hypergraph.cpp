#include "lsl/hypergraph.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "lsl/errors.hpp"
#include "lsl/rng.hpp"

namespace lsl {

int DepHypergraph::max_degree() const {
    std::vector<int> deg(static_cast<std::size_t>(n), 0);
    for (const auto& e : edges)
        for (int v : e) ++deg[static_cast<std::size_t>(v)];
    int d = 0;
    for (int v : deg) d = std::max(d, v);
    return d;
}

DepHypergraph from_localfn(const LocalFn& f) {
    DepHypergraph g;
    g.n = f.n();
    std::vector<std::vector<int>> by_input(static_cast<std::size_t>(f.m()));
    for (int i = 0; i < f.n(); ++i)
        for (int in : f.gate(i).inputs) by_input[static_cast<std::size_t>(in)].push_back(i);
    for (int j = 0; j < f.m(); ++j) {
        if (by_input[static_cast<std::size_t>(j)].empty()) continue;
        g.edges.push_back(by_input[static_cast<std::size_t>(j)]);
        g.edge_input.push_back(j);
    }
    return g;
}

namespace {

bool edge_alive(const std::vector<bool>& removed, std::size_t e) {
    return removed.empty() || !removed[e];
}

}  // namespace

std::vector<int> closed_neighborhood(const DepHypergraph& g, int v,
                                     const std::vector<bool>& removed) {
    if (v < 0 || v >= g.n) throw PreconditionError("closed_neighborhood: bad vertex");
    std::set<int> acc{v};
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        if (!edge_alive(removed, e)) continue;
        const auto& edge = g.edges[e];
        if (std::binary_search(edge.begin(), edge.end(), v)) acc.insert(edge.begin(), edge.end());
    }
    return {acc.begin(), acc.end()};
}

std::vector<int> neighborhood(const DepHypergraph& g, int v, const std::vector<bool>& removed) {
    std::vector<int> iv = closed_neighborhood(g, v, removed);
    std::set<int> acc;
    for (int w : iv) {
        std::vector<int> iw = closed_neighborhood(g, w, removed);
        acc.insert(iw.begin(), iw.end());
    }
    return {acc.begin(), acc.end()};
}

NeighborhoodSelection find_independent_neighborhoods(const DepHypergraph& g, int t,
                                                     int edge_budget) {
    if (t < 1) throw PreconditionError("find_independent_neighborhoods: t must be >= 1");
    NeighborhoodSelection sel;
    sel.t = t;
    std::vector<bool> removed(g.edges.size(), false);
    std::set<int> candidates;
    for (int v = 0; v < g.n; ++v) candidates.insert(v);

    while (!candidates.empty()) {
        int best = -1;
        std::size_t best_size = 0;
        for (int v : candidates) {
            std::size_t size = neighborhood(g, v, removed).size();
            if (best < 0 || size < best_size) {
                best = v;
                best_size = size;
            }
        }
        std::vector<int> iv = closed_neighborhood(g, best, removed);
        if (static_cast<int>(iv.size()) <= t) {
            sel.centers.push_back(best);
            for (int u : neighborhood(g, best, removed))
                for (int w : neighborhood(g, u, removed)) candidates.erase(w);
            candidates.erase(best);
            continue;
        }
        if (static_cast<int>(sel.removed_edge_ids.size()) < edge_budget) {
            // remove the largest incident edge; ties by smallest input index
            int pick = -1;
            std::size_t pick_size = 0;
            for (std::size_t e = 0; e < g.edges.size(); ++e) {
                if (removed[e] || !std::binary_search(g.edges[e].begin(), g.edges[e].end(), best))
                    continue;
                if (pick < 0 || g.edges[e].size() > pick_size) {
                    pick = static_cast<int>(e);
                    pick_size = g.edges[e].size();
                }
            }
            removed[static_cast<std::size_t>(pick)] = true;
            sel.removed_edge_ids.push_back(pick);
            sel.removed_inputs.push_back(g.edge_input[static_cast<std::size_t>(pick)]);
            continue;
        }
        candidates.erase(best);
    }

    // record neighborhoods against the final edge set
    std::sort(sel.centers.begin(), sel.centers.end());
    for (int c : sel.centers) sel.neighborhoods.push_back(closed_neighborhood(g, c, removed));
    sel.ok = !sel.centers.empty();
    if (!sel.ok) sel.note = "edge budget exhausted with zero centers";
    sel.verified = sel.ok && verify_selection(g, sel);
    return sel;
}

bool verify_selection(const DepHypergraph& g, const NeighborhoodSelection& sel) {
    std::vector<bool> removed(g.edges.size(), false);
    for (int e : sel.removed_edge_ids) {
        if (e < 0 || e >= static_cast<int>(g.edges.size())) return false;
        removed[static_cast<std::size_t>(e)] = true;
    }
    if (sel.centers.size() != sel.neighborhoods.size()) return false;
    std::set<int> distinct(sel.centers.begin(), sel.centers.end());
    if (distinct.size() != sel.centers.size()) return false;

    std::vector<int> owner(static_cast<std::size_t>(g.n), -1);
    for (std::size_t i = 0; i < sel.centers.size(); ++i) {
        std::vector<int> iv = closed_neighborhood(g, sel.centers[i], removed);
        if (iv != sel.neighborhoods[i]) return false;
        if (static_cast<int>(iv.size()) > sel.t) return false;
        for (int v : iv) {
            if (owner[static_cast<std::size_t>(v)] >= 0) return false;  // overlap
            owner[static_cast<std::size_t>(v)] = static_cast<int>(i);
        }
    }
    // no surviving edge may touch two distinct selected neighborhoods
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        if (removed[e]) continue;
        int seen = -1;
        for (int v : g.edges[e]) {
            int o = owner[static_cast<std::size_t>(v)];
            if (o < 0) continue;
            if (seen >= 0 && o != seen) return false;
            seen = o;
        }
    }
    return true;
}

nlohmann::json to_json(const NeighborhoodSelection& sel) {
    nlohmann::json j{{"t", sel.t},
                     {"removed_inputs", sel.removed_inputs},
                     {"centers", sel.centers},
                     {"r", sel.centers.size()},
                     {"verified", sel.verified},
                     {"ok", sel.ok}};
    j["neighborhoods"] = sel.neighborhoods;
    if (!sel.note.empty()) j["note"] = sel.note;
    return j;
}

namespace {

// Exact joint distribution of the given outputs of f, as counts over packed
// output keys with denominator 2^{#feeding inputs}.
std::map<std::uint64_t, std::uint64_t> joint_counts(const LocalFn& f,
                                                    const std::vector<int>& outputs,
                                                    const std::vector<int>& feeding) {
    std::vector<std::vector<int>> gate_pos(outputs.size());
    for (std::size_t oi = 0; oi < outputs.size(); ++oi) {
        const OutputGate& gate = f.gate(outputs[oi]);
        for (int in : gate.inputs) {
            auto it = std::lower_bound(feeding.begin(), feeding.end(), in);
            gate_pos[oi].push_back(static_cast<int>(it - feeding.begin()));
        }
    }
    std::map<std::uint64_t, std::uint64_t> counts;
    std::uint64_t total = std::uint64_t{1} << feeding.size();
    for (std::uint64_t a = 0; a < total; ++a) {
        std::uint64_t key = 0;
        for (std::size_t oi = 0; oi < outputs.size(); ++oi) {
            const OutputGate& gate = f.gate(outputs[oi]);
            std::size_t idx = 0;
            for (std::size_t j = 0; j < gate_pos[oi].size(); ++j)
                idx |= ((a >> gate_pos[oi][j]) & 1) << j;
            key |= static_cast<std::uint64_t>(gate.table[idx]) << oi;
        }
        ++counts[key];
    }
    return counts;
}

std::vector<int> feeding_inputs(const LocalFn& f, const std::vector<int>& outputs) {
    std::set<int> ins;
    for (int o : outputs)
        for (int in : f.gate(o).inputs) ins.insert(in);
    return {ins.begin(), ins.end()};
}

}  // namespace

IndependenceReport conditional_independence_check(const LocalFn& f,
                                                  const NeighborhoodSelection& sel,
                                                  int subcube_samples, std::uint64_t seed,
                                                  int joint_input_budget) {
    IndependenceReport rep;
    if (!sel.ok) throw PreconditionError("conditional_independence_check: empty selection");
    const std::vector<int>& removed = sel.removed_inputs;
    if (removed.size() > 62)
        throw ResourceLimit("conditional_independence_check: too many removed inputs");

    std::vector<std::uint64_t> assignments;
    std::uint64_t space = std::uint64_t{1} << removed.size();
    if (space <= static_cast<std::uint64_t>(subcube_samples)) {
        for (std::uint64_t a = 0; a < space; ++a) assignments.push_back(a);
    } else {
        SplitMix64 rng(seed);
        for (int i = 0; i < subcube_samples; ++i) assignments.push_back(rng.below(space));
    }

    for (std::uint64_t a : assignments) {
        std::vector<std::pair<int, int>> fixed;
        for (std::size_t i = 0; i < removed.size(); ++i)
            fixed.emplace_back(removed[i], static_cast<int>((a >> i) & 1));
        LocalFn g = restrict_fn(f, Subcube(std::move(fixed)));
        ++rep.subcubes_checked;

        // per-block feeding inputs; mutual independence needs pairwise disjoint
        std::vector<std::vector<int>> feeds(sel.neighborhoods.size());
        std::map<int, std::size_t> input_owner;
        bool disjoint = true;
        for (std::size_t b = 0; b < sel.neighborhoods.size(); ++b) {
            feeds[b] = feeding_inputs(g, sel.neighborhoods[b]);
            if (feeds[b].size() > 26)
                throw ResourceLimit("conditional_independence_check: block fed by too many inputs");
            for (int in : feeds[b]) {
                auto [it, fresh] = input_owner.emplace(in, b);
                if (!fresh) {
                    rep.pass = false;
                    disjoint = false;
                    rep.violations.push_back("subcube " + std::to_string(a) + ": input " +
                                             std::to_string(in) + " feeds blocks " +
                                             std::to_string(it->second) + " and " +
                                             std::to_string(b));
                }
            }
        }
        if (!disjoint) continue;

        // block marginals
        std::vector<std::map<std::uint64_t, std::uint64_t>> marg(sel.neighborhoods.size());
        for (std::size_t b = 0; b < sel.neighborhoods.size(); ++b) {
            marg[b] = joint_counts(g, sel.neighborhoods[b], feeds[b]);
            ++rep.blocks_checked;
        }

        // exact joint-vs-product over consecutive groups within the budget
        std::size_t b = 0;
        while (b < sel.neighborhoods.size()) {
            std::vector<int> group_outputs = sel.neighborhoods[b];
            std::vector<std::size_t> group{b};
            std::size_t bits = feeds[b].size();
            std::size_t e = b + 1;
            while (e < sel.neighborhoods.size() &&
                   bits + feeds[e].size() <= static_cast<std::size_t>(joint_input_budget)) {
                bits += feeds[e].size();
                group.push_back(e);
                group_outputs.insert(group_outputs.end(), sel.neighborhoods[e].begin(),
                                     sel.neighborhoods[e].end());
                ++e;
            }
            if (group.size() >= 2) {
                std::vector<int> group_feed;
                for (std::size_t gb : group)
                    group_feed.insert(group_feed.end(), feeds[gb].begin(), feeds[gb].end());
                std::sort(group_feed.begin(), group_feed.end());
                auto joint = joint_counts(g, group_outputs, group_feed);
                ++rep.joint_checks;
                // joint and product share denominator 2^{sum of block bits}
                for (const auto& [key, cnt] : joint) {
                    std::uint64_t prod = 1;
                    std::size_t shift = 0;
                    for (std::size_t gb : group) {
                        std::size_t width = sel.neighborhoods[gb].size();
                        std::uint64_t sub = (key >> shift) & ((std::uint64_t{1} << width) - 1);
                        auto it = marg[gb].find(sub);
                        prod *= it == marg[gb].end() ? 0 : it->second;
                        shift += width;
                    }
                    if (prod != cnt) {
                        rep.pass = false;
                        rep.violations.push_back(
                            "subcube " + std::to_string(a) + ": joint != product at key " +
                            std::to_string(key));
                        break;
                    }
                }
            }
            b = e;
        }
    }
    return rep;
}

nlohmann::json to_json(const IndependenceReport& rep) {
    return {{"pass", rep.pass},
            {"subcubes_checked", rep.subcubes_checked},
            {"joint_checks", rep.joint_checks},
            {"blocks_checked", rep.blocks_checked},
            {"violations", rep.violations}};
}

}  // namespace lsl
