#include "lsl/localfn.hpp"

#include <algorithm>
#include <bit>

#include "lsl/errors.hpp"
#include "lsl/parallel.hpp"

namespace lsl {

LocalFn::LocalFn(int m, int declared_d, std::vector<OutputGate> gates)
    : m_(m), declared_d_(declared_d), gates_(std::move(gates)) {
    if (m < 0) throw PreconditionError("LocalFn: negative input count");
    if (declared_d < 0) throw PreconditionError("LocalFn: negative locality");
    if (gates_.empty()) throw PreconditionError("LocalFn: needs at least one output");
    for (const OutputGate& g : gates_) {
        if (g.arity() > declared_d)
            throw PreconditionError("LocalFn: gate arity exceeds declared locality");
        if (g.table.size() != (std::size_t{1} << g.arity()))
            throw PreconditionError("LocalFn: table length must be 2^arity");
        std::vector<int> sorted = g.inputs;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t j = 0; j < sorted.size(); ++j) {
            if (sorted[j] < 0 || sorted[j] >= m)
                throw PreconditionError("LocalFn: input index out of range");
            if (j > 0 && sorted[j] == sorted[j - 1])
                throw PreconditionError("LocalFn: duplicate input in gate");
        }
        for (std::uint8_t b : g.table)
            if (b > 1) throw PreconditionError("LocalFn: table entries must be bits");
    }
}

int LocalFn::effective_locality() const {
    int d = 0;
    for (const OutputGate& g : gates_) d = std::max(d, g.arity());
    return d;
}

std::uint64_t LocalFn::evaluate(std::uint64_t x) const {
    if (m_ > 64 || n() > 64) throw ResourceLimit("evaluate: packed form needs m,n <= 64");
    std::uint64_t out = 0;
    for (std::size_t i = 0; i < gates_.size(); ++i) {
        const OutputGate& g = gates_[i];
        std::size_t idx = 0;
        for (std::size_t j = 0; j < g.inputs.size(); ++j)
            idx |= ((x >> g.inputs[j]) & 1) << j;
        out |= static_cast<std::uint64_t>(g.table[idx]) << i;
    }
    return out;
}

std::vector<std::uint64_t> LocalFn::evaluate_words(const std::vector<std::uint64_t>& x) const {
    if (x.size() != static_cast<std::size_t>((m_ + 63) / 64))
        throw PreconditionError("evaluate: input word count mismatch");
    std::vector<std::uint64_t> out(static_cast<std::size_t>((n() + 63) / 64), 0);
    for (std::size_t i = 0; i < gates_.size(); ++i) {
        const OutputGate& g = gates_[i];
        std::size_t idx = 0;
        for (std::size_t j = 0; j < g.inputs.size(); ++j) {
            int in = g.inputs[j];
            idx |= ((x[static_cast<std::size_t>(in) / 64] >> (in % 64)) & 1) << j;
        }
        out[i / 64] |= static_cast<std::uint64_t>(g.table[idx]) << (i % 64);
    }
    return out;
}

Subcube::Subcube(std::vector<std::pair<int, int>> fixed_) : fixed(std::move(fixed_)) {
    std::sort(fixed.begin(), fixed.end());
    for (std::size_t i = 0; i < fixed.size(); ++i) {
        if (fixed[i].second != 0 && fixed[i].second != 1)
            throw PreconditionError("Subcube: fixed values must be bits");
        if (i > 0 && fixed[i].first == fixed[i - 1].first)
            throw PreconditionError("Subcube: duplicate input index");
    }
}

LocalFn restrict_fn(const LocalFn& f, const Subcube& c) {
    std::vector<int> fixed_bit(static_cast<std::size_t>(f.m()), -1);
    for (const auto& [idx, bit] : c.fixed) {
        if (idx < 0 || idx >= f.m()) throw PreconditionError("restrict: input index out of range");
        fixed_bit[static_cast<std::size_t>(idx)] = bit;
    }
    // order-preserving renumbering of the surviving inputs
    std::vector<int> remap(static_cast<std::size_t>(f.m()), -1);
    int next = 0;
    for (int i = 0; i < f.m(); ++i)
        if (fixed_bit[static_cast<std::size_t>(i)] < 0) remap[static_cast<std::size_t>(i)] = next++;

    std::vector<OutputGate> gates;
    gates.reserve(static_cast<std::size_t>(f.n()));
    for (const OutputGate& g : f.gates()) {
        OutputGate ng;
        std::vector<int> free_pos;  // positions within g.inputs that stay free
        std::size_t fixed_idx_bits = 0;
        for (std::size_t j = 0; j < g.inputs.size(); ++j) {
            int b = fixed_bit[static_cast<std::size_t>(g.inputs[j])];
            if (b < 0) {
                free_pos.push_back(static_cast<int>(j));
                ng.inputs.push_back(remap[static_cast<std::size_t>(g.inputs[j])]);
            } else if (b == 1) {
                fixed_idx_bits |= std::size_t{1} << j;
            }
        }
        ng.table.resize(std::size_t{1} << free_pos.size());
        for (std::size_t a = 0; a < ng.table.size(); ++a) {
            std::size_t idx = fixed_idx_bits;
            for (std::size_t j = 0; j < free_pos.size(); ++j)
                idx |= ((a >> j) & 1) << free_pos[j];
            ng.table[a] = g.table[idx];
        }
        gates.push_back(std::move(ng));
    }
    return LocalFn(f.m() - static_cast<int>(c.fixed.size()), f.declared_d(), std::move(gates));
}

int AnfPoly::degree() const {
    std::size_t d = 0;
    for (const auto& mono : monomials) d = std::max(d, mono.size());
    return static_cast<int>(d);
}

void AnfPoly::toggle(std::vector<int> monomial) {
    auto it = monomials.find(monomial);
    if (it == monomials.end())
        monomials.insert(std::move(monomial));
    else
        monomials.erase(it);
}

std::string AnfPoly::str() const {
    if (monomials.empty()) return "0";
    std::string s;
    for (const auto& mono : monomials) {
        if (!s.empty()) s += " + ";
        if (mono.empty()) {
            s += "1";
            continue;
        }
        for (std::size_t j = 0; j < mono.size(); ++j) {
            if (j) s += "*";
            s += "x" + std::to_string(mono[j]);
        }
    }
    return s;
}

AnfPoly anf_parity(const LocalFn& f) {
    AnfPoly p;
    for (const OutputGate& g : f.gates()) {
        // Moebius transform of the gate table gives its ANF over the gate's
        // own inputs; xor-accumulate into the global polynomial.
        std::vector<std::uint8_t> a = g.table;
        for (int j = 0; j < g.arity(); ++j)
            for (std::size_t mask = 0; mask < a.size(); ++mask)
                if (mask & (std::size_t{1} << j)) a[mask] ^= a[mask ^ (std::size_t{1} << j)];
        for (std::size_t mask = 0; mask < a.size(); ++mask) {
            if (!a[mask]) continue;
            std::vector<int> mono;
            for (int j = 0; j < g.arity(); ++j)
                if (mask & (std::size_t{1} << j)) mono.push_back(g.inputs[static_cast<std::size_t>(j)]);
            std::sort(mono.begin(), mono.end());
            p.toggle(std::move(mono));
        }
    }
    return p;
}

Rat monomial_bias(const LocalFn& f, const std::vector<int>& outputs, int input_budget) {
    if (outputs.empty()) throw PreconditionError("monomial_bias: empty output set");
    std::set<int> used;
    for (int i : outputs) {
        if (i < 0 || i >= f.n()) throw PreconditionError("monomial_bias: output index out of range");
        for (int in : f.gate(i).inputs) used.insert(in);
    }
    std::vector<int> ins(used.begin(), used.end());
    if (static_cast<int>(ins.size()) > input_budget)
        throw ResourceLimit("monomial_bias: too many feeding inputs");
    long long acc = 0;  // sum of (-1)^{xor of selected outputs}
    std::uint64_t total = std::uint64_t{1} << ins.size();
    for (std::uint64_t a = 0; a < total; ++a) {
        int parity = 0;
        for (int i : outputs) {
            const OutputGate& g = f.gate(i);
            std::size_t idx = 0;
            for (std::size_t j = 0; j < g.inputs.size(); ++j) {
                std::size_t pos = static_cast<std::size_t>(
                    std::lower_bound(ins.begin(), ins.end(), g.inputs[j]) - ins.begin());
                idx |= ((a >> pos) & 1) << j;
            }
            parity ^= g.table[idx];
        }
        acc += parity ? -1 : 1;
    }
    return Rat(Int(acc)) / pow2(static_cast<long>(ins.size()));
}

KwiseReport kwise_check(const LocalFn& f, int k, int input_budget) {
    KwiseReport rep;
    rep.k = k;
    if (k < 1 || k > f.n()) throw PreconditionError("kwise_check: k out of range");
    std::vector<int> subset;
    // enumerate subsets of [n] of size 1..k in lexicographic order
    auto recurse = [&](auto&& self, int start, int remaining) -> bool {
        if (!subset.empty()) {
            ++rep.subsets_checked;
            Rat bias = monomial_bias(f, subset, input_budget);
            if (bias != 0) {
                rep.pass = false;
                rep.witness = subset;
                rep.witness_bias = bias;
                return false;
            }
        }
        if (remaining == 0) return true;
        for (int i = start; i < f.n(); ++i) {
            subset.push_back(i);
            if (!self(self, i + 1, remaining - 1)) return false;
            subset.pop_back();
        }
        return true;
    };
    recurse(recurse, 0, k);
    return rep;
}

namespace {

OutputGate constant_gate(int bit) {
    return OutputGate{{}, {static_cast<std::uint8_t>(bit)}};
}

OutputGate copy_gate(int input) { return OutputGate{{input}, {0, 1}}; }

OutputGate xor2_gate(int a, int b) { return OutputGate{{a, b}, {0, 1, 1, 0}}; }

OutputGate xnor2_gate(int a, int b) { return OutputGate{{a, b}, {1, 0, 0, 1}}; }

}  // namespace

LocalFn canonical(SpecialKind kind, int n) {
    if (n < 1) throw PreconditionError("canonical: n must be >= 1");
    std::vector<OutputGate> gates;
    gates.reserve(static_cast<std::size_t>(n));
    switch (kind) {
        case SpecialKind::zeros:
        case SpecialKind::ones: {
            int bit = kind == SpecialKind::ones ? 1 : 0;
            for (int i = 0; i < n; ++i) gates.push_back(constant_gate(bit));
            return LocalFn(0, 0, std::move(gates));
        }
        case SpecialKind::zerones:
            for (int i = 0; i < n; ++i) gates.push_back(copy_gate(0));
            return LocalFn(1, 1, std::move(gates));
        case SpecialKind::all:
            for (int i = 0; i < n; ++i) gates.push_back(copy_gate(i));
            return LocalFn(n, 1, std::move(gates));
        case SpecialKind::evens:
        case SpecialKind::odds: {
            if (n == 1) {
                gates.push_back(constant_gate(kind == SpecialKind::odds ? 1 : 0));
                return LocalFn(0, 0, std::move(gates));
            }
            for (int i = 0; i < n; ++i) {
                int a = i, b = (i + 1) % n;
                if (i == 0 && kind == SpecialKind::odds)
                    gates.push_back(xnor2_gate(a, b));
                else
                    gates.push_back(xor2_gate(a, b));
            }
            return LocalFn(n, 2, std::move(gates));
        }
    }
    throw PreconditionError("canonical: unknown kind");
}

LocalFn evens_with_flips(int n, int c) {
    if (n < 2) throw PreconditionError("evens_with_flips: n must be >= 2");
    if (c < 1 || c > n) throw PreconditionError("evens_with_flips: c must be in [1, n]");
    std::vector<OutputGate> gates;
    gates.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        int a = i, b = (i + 1) % n;
        if (i < c) {
            // x_a ^ x_b ^ (fresh_a & fresh_b)
            OutputGate g;
            g.inputs = {a, b, n + 2 * i, n + 2 * i + 1};
            g.table.resize(16);
            for (std::size_t idx = 0; idx < 16; ++idx) {
                int xa = idx & 1, xb = (idx >> 1) & 1, fa = (idx >> 2) & 1, fb = (idx >> 3) & 1;
                g.table[idx] = static_cast<std::uint8_t>(xa ^ xb ^ (fa & fb));
            }
            gates.push_back(std::move(g));
        } else {
            gates.push_back(xor2_gate(a, b));
        }
    }
    return LocalFn(n + 2 * c, 4, std::move(gates));
}

LocalFn mixture_evens_odds(int n) {
    if (n < 2) throw PreconditionError("mixture_evens_odds: n must be >= 2");
    std::vector<OutputGate> gates;
    gates.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i + 1 < n; ++i) gates.push_back(xor2_gate(i, i + 1));
    OutputGate last;  // x_{n-1} ^ (x_0 | r)
    last.inputs = {n - 1, 0, n};
    last.table.resize(8);
    for (std::size_t idx = 0; idx < 8; ++idx) {
        int xl = idx & 1, x0 = (idx >> 1) & 1, r = (idx >> 2) & 1;
        last.table[idx] = static_cast<std::uint8_t>(xl ^ (x0 | r));
    }
    gates.push_back(std::move(last));
    return LocalFn(n + 1, 3, std::move(gates));
}

LocalFn random_localfn(int n, int m, int d, SplitMix64& rng) {
    if (n < 1 || m < 1 || d < 0) throw PreconditionError("random_localfn: bad shape");
    std::vector<OutputGate> gates;
    gates.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        OutputGate g;
        int arity = static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(d, m) + 1)));
        std::set<int> chosen;
        while (static_cast<int>(chosen.size()) < arity)
            chosen.insert(static_cast<int>(rng.below(static_cast<std::uint64_t>(m))));
        g.inputs.assign(chosen.begin(), chosen.end());
        g.table.resize(std::size_t{1} << arity);
        for (auto& b : g.table) b = static_cast<std::uint8_t>(rng.coin());
        gates.push_back(std::move(g));
    }
    return LocalFn(m, d, std::move(gates));
}

std::vector<std::uint64_t> sample(const LocalFn& f, std::uint64_t seed, std::size_t count,
                                  int threads) {
    if (f.n() > 62) throw ResourceLimit("sample: packed output needs n <= 62");
    if (threads == 0) threads = default_threads();
    std::size_t words = static_cast<std::size_t>((f.m() + 63) / 64);
    std::vector<std::uint64_t> out(count);
    parallel_shards(count, threads, [&](int, std::size_t begin, std::size_t end) {
        std::vector<std::uint64_t> x(words);
        for (std::size_t j = begin; j < end; ++j) {
            // per-sample stream: depends on (seed, j) only
            SplitMix64 g(seed ^ (0x9e3779b97f4a7c15ULL * (j + 1)));
            for (std::size_t w = 0; w < words; ++w) x[w] = g.next();
            if (f.m() % 64) x[words - 1] &= (std::uint64_t{1} << (f.m() % 64)) - 1;
            if (f.m() <= 64)
                out[j] = f.evaluate(words ? x[0] : 0);
            else
                out[j] = f.evaluate_words(x)[0];
        }
    });
    return out;
}

nlohmann::json to_json(const LocalFn& f) {
    nlohmann::json outputs = nlohmann::json::array();
    for (const OutputGate& g : f.gates()) {
        std::string table;
        table.reserve(g.table.size());
        for (std::uint8_t b : g.table) table += b ? '1' : '0';
        outputs.push_back({{"inputs", g.inputs}, {"table", table}});
    }
    return {{"m", f.m()}, {"n", f.n()}, {"d", f.declared_d()}, {"outputs", outputs}};
}

LocalFn localfn_from_json(const nlohmann::json& j) {
    int m = j.at("m").get<int>();
    int n = j.at("n").get<int>();
    int d = j.at("d").get<int>();
    const auto& outputs = j.at("outputs");
    if (!outputs.is_array() || static_cast<int>(outputs.size()) != n)
        throw ParseError("outputs must be an array of n gates");
    std::vector<OutputGate> gates;
    gates.reserve(outputs.size());
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        const auto& item = outputs[i];
        OutputGate g;
        g.inputs = item.at("inputs").get<std::vector<int>>();
        std::string table = item.at("table").get<std::string>();
        for (char ch : table) {
            if (ch != '0' && ch != '1')
                throw ParseError("gate " + std::to_string(i) + ": table must be '0'/'1' characters");
            g.table.push_back(static_cast<std::uint8_t>(ch == '1'));
        }
        gates.push_back(std::move(g));
    }
    try {
        return LocalFn(m, d, std::move(gates));
    } catch (const PreconditionError& e) {
        throw ParseError(std::string("invalid LocalFn: ") + e.what());
    }
}

}  // namespace lsl
