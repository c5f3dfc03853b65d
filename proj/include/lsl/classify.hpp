#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lsl/dist.hpp"
#include "lsl/engine.hpp"
#include "lsl/localfn.hpp"

#include <json.hpp>

namespace lsl {

// Weight in psi closest to n/2; ties go to the smaller weight.
int iota(const PsiSet& psi);

struct RegimeLabel {
    bool tail = false;
    int iota_value = 0;
    double threshold = 0.0;  // n^{2/3}, floating point, strict tail comparison

    const char* name() const { return tail ? "tail" : "central"; }
};

RegimeLabel regime(const PsiSet& psi);

// Precomputed per-slice structure over an exact string-level distribution:
// sorted slice masses with prefix sums, so tv(p, D_psi) evaluates in
// O(sum_{w in psi} log) per psi after O(2^n log) setup.
class PsiEvaluator {
  public:
    explicit PsiEvaluator(const Dist& p);

    int n() const { return n_; }
    Rat tv(const PsiSet& psi) const;

  private:
    int n_;
    std::vector<Rat> slice_mass_;          // total mass per weight
    std::vector<std::vector<Rat>> sorted_;  // ascending nonzero masses per weight
    std::vector<std::vector<Rat>> prefix_;  // prefix sums of sorted_
    std::vector<Int> slice_size_;           // C(n, w)
};

// Definition-chasing tv(p, D_psi); the evaluator must match it exactly.
Rat tv_to_psi_naive(const Dist& p, const PsiSet& psi);
Rat tv_to_psi(const Dist& p, const PsiSet& psi);

// Weight-level tv(p, |D_psi|); equals the string-level distance when the
// caller knows p is the weight distribution of a symmetric source.
Rat tv_to_psi_w(const WDist& p, const PsiSet& psi);

std::pair<SpecialKind, Prob> nearest_special(const Dist& p);
std::pair<SpecialKind, Prob> nearest_special_w(const WDist& p);

// Global minimizer of tv(p, D_psi) over all 2^{n+1}-1 nonempty psi; ties go
// to the lexicographically smallest member list. Exact; n <= 20.
std::pair<PsiSet, Rat> best_psi(const Dist& p, int threads = 0);
// Brute-force oracle (no per-slice structure); for cross-checking.
std::pair<PsiSet, Rat> best_psi_naive(const Dist& p);
// Weight-level variant for symmetric sources.
std::pair<PsiSet, Rat> best_psi_w(const WDist& p, int threads = 0);

struct TruncationResult {
    PsiSet truncated;
    Prob tv;           // weight-level tv(D_psi, D_psi_bar) = 1 - Z_bar/Z
    int cap = 0;       // ceil(C * n^{1/3})
    bool within_half = false;
};

// Keeps the min(|psi|, ceil(C n^{1/3})) weights most distant from n/2
// (ties: smaller weight first). Requires psi in the tail regime.
TruncationResult truncate_tail_support(const PsiSet& psi, double C = 6.0);

struct ClassificationReport {
    int n = 0;
    bool weight_level = false;
    std::array<Prob, 6> special_tv;  // indexed by SpecialKind order
    SpecialKind nearest = SpecialKind::zeros;
    Prob eps_d;
    PsiSet psi_star;
    Prob eps_star;
    bool psi_forced = false;
    bool ratio_infinite = false;  // eps_star = 0 < eps_d
    Rat ratio;                    // eps_d / eps_star; 1 when both are zero
    RegimeLabel psi_regime;
};

struct ClassifyOptions {
    bool weight_level = false;              // caller asserts a symmetric source
    std::optional<PsiSet> forced_psi;       // candidate set {forced} + six specials
    EngineOptions engine;
    int best_psi_max_n = 20;
};

ClassificationReport classify(const LocalFn& f, const ClassifyOptions& opts = {});
ClassificationReport classify_dist(const Dist& p, const ClassifyOptions& opts = {});
ClassificationReport classify_wdist(const WDist& p, const ClassifyOptions& opts = {});

nlohmann::json to_json(const ClassificationReport& rep);

struct RatioTrial {
    std::uint64_t trial = 0;
    int n = 0, m = 0, d = 0;
    double eps_d = 0, eps_star = 0;
    bool ratio_infinite = false;
    double ratio = 0;
};

struct RatioSearchReport {
    std::uint64_t trials = 0;
    double max_finite_ratio = 0;
    std::uint64_t infinite_count = 0;
    std::vector<RatioTrial> rows;
};

// Report-only sweep over random d-local functions; no assertion beyond the
// structural eps_star <= eps_d.
RatioSearchReport ratio_search(int n, int d, int trials, std::uint64_t seed,
                               const ClassifyOptions& opts = {});

nlohmann::json to_json(const RatioSearchReport& rep);
std::string ratio_search_csv(const RatioSearchReport& rep);

struct ProbeReport {
    std::string kind;
    Prob tv;
    double reference = 0;  // n^{-1/2} for slice probes, 1/3 for tail probes
    nlohmann::json detail;
};

// tv(f(U), D_{k}); report-only against the 1 - O_d(n^{-1/2}) scale.
ProbeReport slice_probe(const LocalFn& f, int k, const EngineOptions& engine = {});
// tv(f(U), D_psi) against the 1/3 threshold; report-only.
ProbeReport tail_probe(const LocalFn& f, const PsiSet& psi, const EngineOptions& engine = {});

nlohmann::json to_json(const ProbeReport& rep);

}  // namespace lsl
