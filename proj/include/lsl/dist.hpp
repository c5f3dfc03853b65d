#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lsl/errors.hpp"
#include "lsl/rational.hpp"

#include <json.hpp>

namespace lsl {

enum class Mode { exact, floating };

// Scalar probability-like result. Exact mode never degrades silently: when a
// mixed-mode operation promotes to floating point, the result carries
// degraded = true.
struct Prob {
    Rat exact;
    double approx = 0.0;
    bool is_exact = true;
    bool degraded = false;

    static Prob from_rat(Rat v) { return Prob{v, to_double(v), true, false}; }
    static Prob from_double(double v, bool degraded = false) {
        return Prob{Rat(0), v, false, degraded};
    }
    double value() const { return is_exact ? to_double(exact) : approx; }
    std::string str() const { return is_exact ? rat_str(exact) : std::to_string(approx); }
};

// Fixed enumeration order; ties in nearest-distribution searches break by it.
enum class SpecialKind { zeros, ones, zerones, evens, odds, all };

constexpr std::array<SpecialKind, 6> kSpecialKinds = {
    SpecialKind::zeros,  SpecialKind::ones, SpecialKind::zerones,
    SpecialKind::evens, SpecialKind::odds, SpecialKind::all};

const char* to_string(SpecialKind k);
SpecialKind special_kind_from_string(const std::string& s);

// Nonempty set of admissible Hamming weights.
struct PsiSet {
    int n = 0;
    std::vector<int> members;  // sorted, strictly increasing, within [0, n]

    PsiSet() = default;
    PsiSet(int n_, std::vector<int> members_);
    bool contains(int w) const;
    std::string str() const;
};

PsiSet psi_of_special(SpecialKind kind, int n);

// Distribution over Hamming weights {0, ..., n}; always stored densely.
class WDist {
  public:
    WDist() = default;
    static WDist exact(int n, std::vector<Rat> pmf);
    static WDist floating(int n, std::vector<double> pmf);

    int n() const { return n_; }
    Mode mode() const { return mode_; }
    bool degraded() const { return degraded_; }
    void mark_degraded() { degraded_ = true; }

    const Rat& q(int w) const { return q_[static_cast<std::size_t>(w)]; }
    double d(int w) const;
    const std::vector<Rat>& exact_pmf() const { return q_; }
    const std::vector<double>& float_pmf() const { return d_; }

  private:
    int n_ = 0;
    Mode mode_ = Mode::exact;
    bool degraded_ = false;
    std::vector<Rat> q_;
    std::vector<double> d_;
};

// Distribution over {0,1}^n. Output bit i of a string maps to bit i of the
// integer key (bit 0 = first output). Dense array up to kDenseBits, sparse
// map above.
class Dist {
  public:
    static constexpr int kDenseBits = 24;
    static constexpr int kMaxBits = 62;

    Dist() = default;
    static Dist exact_dense(int n, std::vector<Rat> pmf);
    static Dist exact_sparse(int n, std::map<std::uint64_t, Rat> pmf);
    static Dist float_dense(int n, std::vector<double> pmf);
    static Dist float_sparse(int n, std::map<std::uint64_t, double> pmf);
    // Masses count[x] / 2^denom_exp.
    static Dist from_counts(int n, const std::map<std::uint64_t, Int>& counts, long denom_exp);
    static Dist point(int n, std::uint64_t x);

    int n() const { return n_; }
    Mode mode() const { return mode_; }
    bool degraded() const { return degraded_; }
    void mark_degraded() { degraded_ = true; }
    bool dense() const { return n_ <= kDenseBits; }

    Rat q(std::uint64_t x) const;
    double d(std::uint64_t x) const;
    std::size_t support_size() const;

    // Iterates nonzero masses in increasing key order.
    template <class Fn>  // Fn(std::uint64_t, const Rat&)
    void for_each_exact(Fn&& fn) const {
        if (dense()) {
            for (std::uint64_t x = 0; x < dq_.size(); ++x)
                if (dq_[x] != 0) fn(x, dq_[x]);
        } else {
            for (const auto& [x, v] : sq_) fn(x, v);
        }
    }
    template <class Fn>  // Fn(std::uint64_t, double)
    void for_each_float(Fn&& fn) const {
        if (dense()) {
            for (std::uint64_t x = 0; x < dd_.size(); ++x)
                if (dd_[x] != 0.0) fn(x, dd_[x]);
        } else {
            for (const auto& [x, v] : sd_) fn(x, v);
        }
    }

  private:
    int n_ = 0;
    Mode mode_ = Mode::exact;
    bool degraded_ = false;
    std::vector<Rat> dq_;
    std::vector<double> dd_;
    std::map<std::uint64_t, Rat> sq_;
    std::map<std::uint64_t, double> sd_;

    void validate() const;
    friend Dist to_float(const Dist& p);
};

Dist to_float(const Dist& p);
WDist to_float(const WDist& p);

// Total variation distance 1/2 sum |p - q|; exact in exact mode; mixed modes
// promote to float and mark the result degraded.
Prob tv_distance(const Dist& p, const Dist& q);
Prob tv_distance(const WDist& p, const WDist& q);

// sum_x max(p(x) - q(x), 0); equals tv_distance exactly.
Prob max_event_gap(const Dist& p, const Dist& q);

// sum_x min(p(x), q(x)); equals 1 - tv_distance exactly.
Prob coupling_overlap(const Dist& p, const Dist& q);

// max over thresholds t in {-1, 0, ..., n} of |Pr_p[x > t] - Pr_q[x > t]|.
Prob kolmogorov_distance(const WDist& p, const WDist& q);

WDist weight_marginal(const Dist& p);

// P_sym(x) = |P|(|x|) / C(n, |x|).
Dist symmetrize(const Dist& p);

// Marginal onto coords (0-based, distinct); output bit j = input bit coords[j].
Dist marginal(const Dist& p, const std::vector<int>& coords);

// Product distribution; factor i occupies the next n_i output bits, low first.
Dist product(const std::vector<Dist>& ps);

// Convex combination with exact rational weights summing to 1.
Dist mixture(const std::vector<Rat>& weights, const std::vector<Dist>& ps);
WDist mixture_w(const std::vector<Rat>& weights, const std::vector<WDist>& ps);

Dist special(SpecialKind kind, int n);
WDist special_w(SpecialKind kind, int n);

// Uniform over strings with |x| in psi.
Dist uniform_symmetric(const PsiSet& psi);
WDist uniform_symmetric_w(const PsiSet& psi);

// Reorders coordinates: output bit perm[i] of the result = bit i of x.
Dist apply_permutation(const Dist& p, const std::vector<int>& perm);

bool exact_equal(const Dist& p, const Dist& q);
bool exact_equal(const WDist& p, const WDist& q);

// JSON forms: {"n":..,"mode":"exact"|"float","pmf":{...}} for Dist (sparse
// object keyed by decimal string index), pmf as an (n+1)-array for WDist.
// Exact masses serialize as "num/den" strings and round-trip bit-exactly.
nlohmann::json to_json(const Dist& p);
nlohmann::json to_json(const WDist& p);
Dist dist_from_json(const nlohmann::json& j);
WDist wdist_from_json(const nlohmann::json& j);

}  // namespace lsl
