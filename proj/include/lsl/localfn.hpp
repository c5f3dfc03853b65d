#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "lsl/dist.hpp"
#include "lsl/rng.hpp"

#include <json.hpp>

namespace lsl {

// One output bit: a lookup table over at most d input bits. Table index b is
// built LSB-first: b = sum_j x[inputs[j]] * 2^j.
struct OutputGate {
    std::vector<int> inputs;
    std::vector<std::uint8_t> table;

    int arity() const { return static_cast<int>(inputs.size()); }
};

class LocalFn {
  public:
    LocalFn(int m, int declared_d, std::vector<OutputGate> gates);

    int m() const { return m_; }
    int n() const { return static_cast<int>(gates_.size()); }
    int declared_d() const { return declared_d_; }
    // Max gate arity; always <= declared_d.
    int effective_locality() const;
    const OutputGate& gate(int i) const { return gates_[static_cast<std::size_t>(i)]; }
    const std::vector<OutputGate>& gates() const { return gates_; }

    // Packed evaluation, m <= 64 and n <= 64.
    std::uint64_t evaluate(std::uint64_t x) const;
    // Word-vector evaluation for larger m.
    std::vector<std::uint64_t> evaluate_words(const std::vector<std::uint64_t>& x) const;

  private:
    int m_;
    int declared_d_;
    std::vector<OutputGate> gates_;
};

// Partial assignment of input bits.
struct Subcube {
    std::vector<std::pair<int, int>> fixed;  // (input index, bit), sorted, unique

    Subcube() = default;
    explicit Subcube(std::vector<std::pair<int, int>> fixed_);
};

// Substitutes the fixed inputs into every table. Remaining inputs are
// renumbered order-preserving, so the result has m - |fixed| inputs.
LocalFn restrict_fn(const LocalFn& f, const Subcube& c);

// Multilinear polynomial over GF(2), monomials as sorted input-index lists.
struct AnfPoly {
    std::set<std::vector<int>> monomials;  // contains {} for a constant-1 term

    bool is_zero() const { return monomials.empty(); }
    bool is_one() const { return monomials.size() == 1 && monomials.begin()->empty(); }
    // Degree of the zero polynomial is 0 here.
    int degree() const;
    void toggle(std::vector<int> monomial);
    std::string str() const;
};

// ANF of x -> f_1(x) xor ... xor f_n(x), the parity of the output weight.
AnfPoly anf_parity(const LocalFn& f);

// E[prod_{i in s} (-1)^{f_i}] over uniform inputs; exact dyadic value.
// Only the inputs feeding s are enumerated.
Rat monomial_bias(const LocalFn& f, const std::vector<int>& outputs, int input_budget = 26);

struct KwiseReport {
    bool pass = true;
    int k = 0;
    std::uint64_t subsets_checked = 0;
    std::vector<int> witness;  // first subset with nonzero bias, if any
    Rat witness_bias;
};

// Passes iff every subset of at most k outputs has zero bias, which is
// equivalent to k-wise independence of the output distribution.
KwiseReport kwise_check(const LocalFn& f, int k, int input_budget = 26);

// Canonical samplers for the six special distributions. Localities:
// zeros/ones 0, zerones/all 1, evens/odds 2 (cyclic xor; odds negates the
// first output). n = 1 degenerates to constant gates.
LocalFn canonical(SpecialKind kind, int n);

// evens with the first c outputs independently flipped with probability 1/4
// (one a_i & b_i pair per flipped output); 4-local.
LocalFn evens_with_flips(int n, int c);

// 3-local sampler of 3/4 * evens + 1/4 * odds: o_i = x_i ^ x_{i+1} for
// i < n-1 and o_{n-1} = x_{n-1} ^ (x_0 | r).
LocalFn mixture_evens_odds(int n);

// Uniformly random d-local function: each gate gets an arity in [0, d],
// distinct random inputs and a random table.
LocalFn random_localfn(int n, int m, int d, SplitMix64& rng);

// Deterministic sampling; sample j depends only on (seed, j), never on the
// thread layout. Requires n <= 62.
std::vector<std::uint64_t> sample(const LocalFn& f, std::uint64_t seed, std::size_t count,
                                  int threads = 0);

// {"m":..,"n":..,"d":..,"outputs":[{"inputs":[..],"table":"0110"},..]}
nlohmann::json to_json(const LocalFn& f);
LocalFn localfn_from_json(const nlohmann::json& j);

}  // namespace lsl
