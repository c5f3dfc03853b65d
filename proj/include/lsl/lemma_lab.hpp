#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lsl/dist.hpp"
#include "lsl/engine.hpp"
#include "lsl/localfn.hpp"
#include "lsl/rational.hpp"

#include <json.hpp>

namespace lsl {

// Distribution of an integer random variable over a contiguous range.
struct IntPMF {
    long offset = 0;
    std::vector<Rat> masses;  // sum 1, nonnegative

    static IntPMF point(long v);
    static IntPMF uniform(long lo, long hi);
    static IntPMF from_masses(long offset, std::vector<Rat> masses);

    long lo() const { return offset; }
    long hi() const { return offset + static_cast<long>(masses.size()) - 1; }
    Rat at(long v) const;
};

IntPMF convolve(const IntPMF& a, const IntPMF& b);
// Balanced divide-and-conquer fold.
IntPMF convolve_all(const std::vector<IntPMF>& ps);
// Sequential self-convolution with a common denominator; the workhorse for
// large i.i.d. sums.
IntPMF iid_convolve(const IntPMF& base, int count);

nlohmann::json to_json(const IntPMF& p);
IntPMF intpmf_from_json(const nlohmann::json& j);

// Independent bounded-integer variables plus the modulus set Phi.
struct DensityInstance {
    int t = 0;
    std::vector<IntPMF> pmfs;  // supports within [0, t]
    std::vector<int> phi_set;  // subset of {2, ..., t}, sorted
    // i.i.d. shortcut; keeps one copy plus a repeat count
    int iid_count = 0;  // 0 means pmfs holds every variable explicitly

    std::size_t count() const { return iid_count ? static_cast<std::size_t>(iid_count) : pmfs.size(); }
    const IntPMF& pmf(std::size_t i) const { return iid_count ? pmfs.front() : pmfs[i]; }
    void validate() const;
};

nlohmann::json to_json(const DensityInstance& inst);
DensityInstance density_instance_from_json(const nlohmann::json& j);

// X_i uniform over {1,3}: the sum only takes values of one parity, so a shift
// by 1 escapes the support while the theorem's phi equals 2.
DensityInstance parity_counterexample_instance(int n);

struct DensityParams {
    bool applicable = true;
    std::string note;
    int phi = 1;                 // lcm of [t] \ Phi
    std::vector<Rat> l_per_r;    // sum_i (1 - p_{r,i}) for each r in phi_set
    Rat l;                       // min over r
    Rat alpha;                   // (L / (4 n (t+1)))^{t^2 phi}
    long block_count = 0;        // floor(L / (16 t^4 phi))
};

DensityParams density_params(const DensityInstance& inst);

struct VerificationReport {
    std::string suite;
    std::string range;
    std::uint64_t checked = 0;
    std::vector<std::string> violations;
    double max_slack = 0;   // tightest margin bound - value seen over all cases
    bool applicable = true;  // false: hypotheses failed / parameters vacuous
    std::string note;

    bool pass() const { return applicable && violations.empty(); }
};

nlohmann::json to_json(const VerificationReport& rep);

// Density comparison bound for variables with a guaranteed neighboring pair:
// Pr[sum = y] - Pr[sum = y + Delta] <= 22|Delta| / (phi alpha m) for every
// Delta that is a multiple of phi. Hypotheses Pr[Y_i = u_i] >= alpha and
// Pr[Y_i = u_i + phi] >= alpha are checked first; failure yields a
// precondition report, not an exception.
VerificationReport check_density_lemma(const std::vector<IntPMF>& ys, long phi, const Rat& alpha,
                                       const std::vector<long>& us, long delta_max);

// Full bounded-variable version with derived parameters. Deltas must be
// multiples of phi; anything else is rejected up front.
VerificationReport check_density_theorem(const DensityInstance& inst,
                                         const std::vector<long>& deltas);
VerificationReport check_density_theorem(const DensityInstance& inst, long delta_max);

// Any integer combination sum s_j w_j = target; requires gcd | target.
std::vector<Int> bezout_combination(const std::vector<Int>& ws, const Int& target);
// Solution with every |s_j| <= bound, or nullopt. Used to witness the
// |s_j| <= t*phi coefficient bound at theorem parameters.
std::optional<std::vector<long>> bezout_bounded(const std::vector<long>& ws, long target,
                                                long bound);

// 2^{-n} (C(n,b) - C(n,b+1)) <= 7/n; exact rationals up to n = 200,
// log-domain with 1e-9 slack beyond.
VerificationReport verify_nearby_binom(int n_max);
// Entropy sandwich 1 - x^2 <= H((1+x)/2) <= 1 - x^2/(2 ln 2) on a grid.
VerificationReport verify_entropy(int grid_steps);
// Stirling-type bounds on individual binomial coefficients.
VerificationReport verify_individual_binom(int n_max);
// Tail bound: sum_{i<=k} C(n,i) <= min(2^{nH(k/n)}, C(n,k)(n-k+1)/(n-2k+1)).
VerificationReport verify_binom_tail(int n_max);

// Polynomial with exact rational coefficients, ascending degree.
struct RationalPoly {
    std::vector<Rat> coeffs;

    int degree() const;  // -1 for the zero polynomial
    Rat eval(const Rat& x) const;
    void trim();
};

RationalPoly poly_mul(const RationalPoly& a, const RationalPoly& b);

// p(y) = (T_r(y/r)/y)^2 for odd r, in the normalized variable
// y = (x - n/2)/sqrt(n); exact coefficients via the Chebyshev recurrence.
RationalPoly chebyshev_p_coeffs(int r);

// Five properties of p on the grid |y| <= 3r with the given step:
// degree (= 2r-2), p >= 1/2 for |y| <= 1/10, p <= min(1, 1/y^2) for
// |y| <= r, p <= (2|y|/r)^{2r} for |y| >= r, and p >= 0.
VerificationReport verify_p_facts(const std::vector<int>& r_set, const Rat& grid_step);

// ||p||_q <= sqrt(q-1)^d ||p||_2 for random +-1-coefficient multilinear
// polynomials; even q only, exact moments over 2^n points.
VerificationReport verify_hypercontractivity(int trials, int n_max, int d_max,
                                             const std::vector<int>& q_set, std::uint64_t seed);
// Pr[|p| >= ||p||_2 / 2] >= (1/2) 9^{-d}, exact counting.
VerificationReport verify_weak_anticoncentration(int trials, int n_max, int d_max,
                                                 std::uint64_t seed);
// Report-only: exact tail masses Pr[|p| > K ||p||_2] are nonincreasing in K.
VerificationReport poly_anticoncentration_report(int trials, int n_max, int d_max,
                                                 std::uint64_t seed);

// Randomized exact checks of the total variation toolbox.
VerificationReport verify_tv_identities(int trials, int n_max, std::uint64_t seed);
VerificationReport verify_distance_to_sym(int trials, int n_max, std::uint64_t seed);
VerificationReport verify_conditioning(int trials, int n_max, std::uint64_t seed);
VerificationReport verify_product_lemma(int trials, int n_max, std::uint64_t seed);

struct ContinuityRow {
    long delta = 0;
    Rat max_diff;
    double normalized = 0;  // max_diff * n / |delta|
};

struct ContinuityReport {
    int n = 0;
    std::vector<ContinuityRow> rows;
};

// Report-only: max_x |Pr[|f|=x] - Pr[|f|=x+Delta]| for each even Delta.
ContinuityReport continuity_report(const LocalFn& f, const std::vector<long>& deltas,
                                   const EngineOptions& engine = {});
nlohmann::json to_json(const ContinuityReport& rep);

struct KolParityReport {
    Rat eta;
    Rat max_even_dev;
    Rat max_odd_dev;
    Rat objective;  // max of the two at the chosen eta
};

// Splits the CDF comparison against |U^n| by parity and picks eta in [0,1]
// minimizing the larger deviation; the objective is piecewise linear, so the
// exact minimum sits at a line intersection or an endpoint.
KolParityReport kolmogorov_parity_report(const WDist& p);
nlohmann::json to_json(const KolParityReport& rep);

}  // namespace lsl
