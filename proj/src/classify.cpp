#include "lsl/classify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "lsl/errors.hpp"
#include "lsl/parallel.hpp"
#include "lsl/rng.hpp"

namespace lsl {

int iota(const PsiSet& psi) {
    int best = psi.members.front();
    long best_dist = std::abs(2L * best - psi.n);
    for (int s : psi.members) {
        long dist = std::abs(2L * s - psi.n);  // |s - n/2| scaled by 2, exact
        if (dist < best_dist) {
            best = s;
            best_dist = dist;
        }
    }
    return best;
}

RegimeLabel regime(const PsiSet& psi) {
    RegimeLabel label;
    label.iota_value = iota(psi);
    label.threshold = std::pow(static_cast<double>(psi.n), 2.0 / 3.0);
    double mid = psi.n / 2.0;
    label.tail = label.iota_value < mid - label.threshold || label.iota_value > mid + label.threshold;
    return label;
}

PsiEvaluator::PsiEvaluator(const Dist& p) : n_(p.n()) {
    if (p.mode() != Mode::exact)
        throw PreconditionError("PsiEvaluator: exact-mode distribution required");
    std::size_t len = static_cast<std::size_t>(n_) + 1;
    slice_mass_.assign(len, Rat(0));
    sorted_.assign(len, {});
    prefix_.assign(len, {});
    slice_size_.resize(len);
    for (int w = 0; w <= n_; ++w)
        slice_size_[static_cast<std::size_t>(w)] =
            binom(static_cast<unsigned long>(n_), static_cast<unsigned long>(w));
    p.for_each_exact([&](std::uint64_t x, const Rat& v) {
        std::size_t w = static_cast<std::size_t>(std::popcount(x));
        slice_mass_[w] += v;
        sorted_[w].push_back(v);
    });
    for (std::size_t w = 0; w < len; ++w) {
        std::sort(sorted_[w].begin(), sorted_[w].end());
        prefix_[w].resize(sorted_[w].size() + 1);
        prefix_[w][0] = 0;
        for (std::size_t i = 0; i < sorted_[w].size(); ++i)
            prefix_[w][i + 1] = prefix_[w][i] + sorted_[w][i];
    }
}

Rat PsiEvaluator::tv(const PsiSet& psi) const {
    if (psi.n != n_) throw DimensionMismatch("PsiEvaluator: weight range mismatch");
    Int z = 0;
    for (int w : psi.members) z += slice_size_[static_cast<std::size_t>(w)];
    Rat q = Rat(1) / Rat(z);
    Rat inside = 0;  // sum over strings with weight in psi of |p(x) - q|
    Rat in_mass = 0;
    for (int w : psi.members) {
        std::size_t wi = static_cast<std::size_t>(w);
        const auto& vs = sorted_[wi];
        const auto& ps = prefix_[wi];
        std::size_t idx = static_cast<std::size_t>(
            std::lower_bound(vs.begin(), vs.end(), q) - vs.begin());
        Rat below = q * static_cast<long>(idx) - ps[idx];
        Rat above = (slice_mass_[wi] - ps[idx]) -
                    q * static_cast<long>(vs.size() - idx);
        Rat zeros = Rat(slice_size_[wi] - static_cast<long>(vs.size())) * q;
        inside += below + above + zeros;
        in_mass += slice_mass_[wi];
    }
    return (Rat(1) - in_mass + inside) / 2;
}

Rat tv_to_psi_naive(const Dist& p, const PsiSet& psi) {
    if (p.mode() != Mode::exact) throw PreconditionError("tv_to_psi: exact mode required");
    if (psi.n != p.n()) throw DimensionMismatch("tv_to_psi: weight range mismatch");
    Int z = 0;
    for (int w : psi.members)
        z += binom(static_cast<unsigned long>(p.n()), static_cast<unsigned long>(w));
    Rat q = Rat(1) / Rat(z);
    std::vector<bool> in(static_cast<std::size_t>(p.n()) + 1, false);
    for (int w : psi.members) in[static_cast<std::size_t>(w)] = true;
    Rat sum = 0;
    std::vector<Int> support_count(static_cast<std::size_t>(p.n()) + 1, Int(0));
    p.for_each_exact([&](std::uint64_t x, const Rat& v) {
        std::size_t w = static_cast<std::size_t>(std::popcount(x));
        ++support_count[w];
        sum += in[w] ? rat_abs(v - q) : v;
    });
    for (int w : psi.members) {
        std::size_t wi = static_cast<std::size_t>(w);
        Int zeros = binom(static_cast<unsigned long>(p.n()), static_cast<unsigned long>(w)) -
                    support_count[wi];
        sum += Rat(zeros) * q;
    }
    return sum / 2;
}

Rat tv_to_psi(const Dist& p, const PsiSet& psi) { return PsiEvaluator(p).tv(psi); }

Rat tv_to_psi_w(const WDist& p, const PsiSet& psi) {
    if (p.mode() != Mode::exact) throw PreconditionError("tv_to_psi_w: exact mode required");
    if (psi.n != p.n()) throw DimensionMismatch("tv_to_psi_w: weight range mismatch");
    WDist target = uniform_symmetric_w(psi);
    Rat sum = 0;
    for (int w = 0; w <= p.n(); ++w) sum += rat_abs(p.q(w) - target.q(w));
    return sum / 2;
}

std::pair<SpecialKind, Prob> nearest_special(const Dist& p) {
    if (p.mode() == Mode::exact) {
        PsiEvaluator eval(p);
        SpecialKind best = SpecialKind::zeros;
        Rat best_tv;
        bool first = true;
        for (SpecialKind k : kSpecialKinds) {
            Rat tv = eval.tv(psi_of_special(k, p.n()));
            if (first || tv < best_tv) {
                best = k;
                best_tv = tv;
                first = false;
            }
        }
        Prob pr = Prob::from_rat(best_tv);
        pr.degraded = p.degraded();
        return {best, pr};
    }
    SpecialKind best = SpecialKind::zeros;
    Prob best_tv;
    bool first = true;
    for (SpecialKind k : kSpecialKinds) {
        Prob tv = tv_distance(p, special(k, p.n()));
        if (first || tv.approx < best_tv.approx) {
            best = k;
            best_tv = tv;
            first = false;
        }
    }
    return {best, best_tv};
}

std::pair<SpecialKind, Prob> nearest_special_w(const WDist& p) {
    SpecialKind best = SpecialKind::zeros;
    Prob best_tv;
    bool first = true;
    for (SpecialKind k : kSpecialKinds) {
        Prob tv = tv_distance(p, special_w(k, p.n()));
        bool better;
        if (first)
            better = true;
        else if (tv.is_exact && best_tv.is_exact)
            better = tv.exact < best_tv.exact;
        else
            better = tv.value() < best_tv.value();
        if (better) {
            best = k;
            best_tv = tv;
            first = false;
        }
    }
    return {best, best_tv};
}

namespace {

std::vector<int> mask_members(std::uint64_t mask) {
    std::vector<int> members;
    for (int w = 0; mask; ++w, mask >>= 1)
        if (mask & 1) members.push_back(w);
    return members;
}

}  // namespace

std::pair<PsiSet, Rat> best_psi(const Dist& p, int threads) {
    if (p.n() > 20) throw ResourceLimit("best_psi: exhaustive search needs n <= 20");
    PsiEvaluator eval(p);
    if (threads == 0) threads = default_threads();
    std::uint64_t total = (std::uint64_t{1} << (p.n() + 1)) - 1;

    struct Best {
        bool set = false;
        Rat tv;
        std::vector<int> members;
    };
    std::size_t nshards = static_cast<std::size_t>(threads);
    if (nshards > total) nshards = static_cast<std::size_t>(total);
    std::vector<Best> bests(std::max<std::size_t>(nshards, 1));
    parallel_shards(total, threads, [&](int shard, std::size_t begin, std::size_t end) {
        Best& b = bests[static_cast<std::size_t>(shard)];
        for (std::uint64_t mask = begin + 1; mask <= end; ++mask) {
            std::vector<int> members = mask_members(mask);
            Rat tv = eval.tv(PsiSet(p.n(), members));
            if (!b.set || tv < b.tv ||
                (tv == b.tv && std::lexicographical_compare(members.begin(), members.end(),
                                                            b.members.begin(), b.members.end()))) {
                b.set = true;
                b.tv = tv;
                b.members = std::move(members);
            }
        }
    });
    Best out;
    for (const Best& b : bests) {
        if (!b.set) continue;
        if (!out.set || b.tv < out.tv ||
            (b.tv == out.tv && std::lexicographical_compare(b.members.begin(), b.members.end(),
                                                            out.members.begin(), out.members.end())))
            out = b;
    }
    return {PsiSet(p.n(), out.members), out.tv};
}

std::pair<PsiSet, Rat> best_psi_naive(const Dist& p) {
    if (p.n() > 16) throw ResourceLimit("best_psi_naive: n too large");
    std::uint64_t total = (std::uint64_t{1} << (p.n() + 1)) - 1;
    bool set = false;
    Rat best_tv;
    std::vector<int> best_members;
    for (std::uint64_t mask = 1; mask <= total; ++mask) {
        std::vector<int> members = mask_members(mask);
        Rat tv = tv_to_psi_naive(p, PsiSet(p.n(), members));
        if (!set || tv < best_tv ||
            (tv == best_tv && std::lexicographical_compare(members.begin(), members.end(),
                                                           best_members.begin(),
                                                           best_members.end()))) {
            set = true;
            best_tv = tv;
            best_members = std::move(members);
        }
    }
    return {PsiSet(p.n(), best_members), best_tv};
}

std::pair<PsiSet, Rat> best_psi_w(const WDist& p, int threads) {
    if (p.n() > 20) throw ResourceLimit("best_psi_w: exhaustive search needs n <= 20");
    if (p.mode() != Mode::exact) throw PreconditionError("best_psi_w: exact mode required");
    if (threads == 0) threads = default_threads();
    std::vector<Int> binoms(static_cast<std::size_t>(p.n()) + 1);
    for (int w = 0; w <= p.n(); ++w)
        binoms[static_cast<std::size_t>(w)] =
            binom(static_cast<unsigned long>(p.n()), static_cast<unsigned long>(w));
    std::uint64_t total = (std::uint64_t{1} << (p.n() + 1)) - 1;

    struct Best {
        bool set = false;
        Rat tv;
        std::vector<int> members;
    };
    std::size_t nshards = static_cast<std::size_t>(threads);
    if (nshards > total) nshards = static_cast<std::size_t>(total);
    std::vector<Best> bests(std::max<std::size_t>(nshards, 1));
    parallel_shards(total, threads, [&](int shard, std::size_t begin, std::size_t end) {
        Best& b = bests[static_cast<std::size_t>(shard)];
        for (std::uint64_t mask = begin + 1; mask <= end; ++mask) {
            Int z = 0;
            for (int w = 0; w <= p.n(); ++w)
                if (mask & (std::uint64_t{1} << w)) z += binoms[static_cast<std::size_t>(w)];
            Rat sum = 0;
            for (int w = 0; w <= p.n(); ++w) {
                if (mask & (std::uint64_t{1} << w))
                    sum += rat_abs(p.q(w) - Rat(binoms[static_cast<std::size_t>(w)]) / Rat(z));
                else
                    sum += p.q(w);
            }
            Rat tv = sum / 2;
            std::vector<int> members = mask_members(mask);
            if (!b.set || tv < b.tv ||
                (tv == b.tv && std::lexicographical_compare(members.begin(), members.end(),
                                                            b.members.begin(), b.members.end()))) {
                b.set = true;
                b.tv = tv;
                b.members = std::move(members);
            }
        }
    });
    Best out;
    for (const Best& b : bests) {
        if (!b.set) continue;
        if (!out.set || b.tv < out.tv ||
            (b.tv == out.tv && std::lexicographical_compare(b.members.begin(), b.members.end(),
                                                            out.members.begin(), out.members.end())))
            out = b;
    }
    return {PsiSet(p.n(), out.members), out.tv};
}

TruncationResult truncate_tail_support(const PsiSet& psi, double C) {
    RegimeLabel label = regime(psi);
    if (!label.tail) throw PreconditionError("truncate_tail_support: psi is not in the tail regime");
    TruncationResult res;
    res.cap = static_cast<int>(std::ceil(C * std::cbrt(static_cast<double>(psi.n))));
    std::vector<int> by_distance = psi.members;
    std::stable_sort(by_distance.begin(), by_distance.end(), [&](int a, int b) {
        long da = std::abs(2L * a - psi.n), db = std::abs(2L * b - psi.n);
        if (da != db) return da > db;  // nonincreasing distance from n/2
        return a < b;
    });
    std::size_t keep = std::min<std::size_t>(by_distance.size(), static_cast<std::size_t>(res.cap));
    std::vector<int> members(by_distance.begin(), by_distance.begin() + static_cast<long>(keep));
    std::sort(members.begin(), members.end());
    res.truncated = PsiSet(psi.n, std::move(members));

    Int z = 0, zbar = 0;
    for (int w : psi.members)
        z += binom(static_cast<unsigned long>(psi.n), static_cast<unsigned long>(w));
    for (int w : res.truncated.members)
        zbar += binom(static_cast<unsigned long>(psi.n), static_cast<unsigned long>(w));
    Rat tv = Rat(1) - Rat(zbar) / Rat(z);
    res.tv = Prob::from_rat(tv);
    res.within_half = tv <= Rat(1, 2);
    if (psi.n >= 100 && !res.within_half)
        throw PostconditionViolation("truncate_tail_support: distance exceeded 1/2");
    return res;
}

namespace {

template <class TvFn>
ClassificationReport classify_core(int n, bool weight_level, const ClassifyOptions& opts,
                                   TvFn&& tv_of_psi,
                                   const std::array<Prob, 6>& special_tv,
                                   std::optional<std::pair<PsiSet, Rat>> searched) {
    ClassificationReport rep;
    rep.n = n;
    rep.weight_level = weight_level;
    rep.special_tv = special_tv;
    bool first = true;
    for (std::size_t i = 0; i < kSpecialKinds.size(); ++i) {
        bool better = first;
        if (!first) {
            if (special_tv[i].is_exact && rep.eps_d.is_exact)
                better = special_tv[i].exact < rep.eps_d.exact;
            else
                better = special_tv[i].value() < rep.eps_d.value();
        }
        if (better) {
            rep.nearest = kSpecialKinds[i];
            rep.eps_d = special_tv[i];
            first = false;
        }
    }

    if (opts.forced_psi) {
        // candidate set: the forced psi plus the six specials' weight sets
        rep.psi_forced = true;
        std::vector<PsiSet> candidates{*opts.forced_psi};
        for (SpecialKind k : kSpecialKinds) candidates.push_back(psi_of_special(k, n));
        bool cfirst = true;
        Rat best;
        for (const PsiSet& cand : candidates) {
            Rat tv = tv_of_psi(cand);
            if (cfirst || tv < best ||
                (tv == best &&
                 std::lexicographical_compare(cand.members.begin(), cand.members.end(),
                                              rep.psi_star.members.begin(),
                                              rep.psi_star.members.end()))) {
                best = tv;
                rep.psi_star = cand;
                cfirst = false;
            }
        }
        rep.eps_star = Prob::from_rat(best);
    } else if (searched) {
        rep.psi_star = searched->first;
        rep.eps_star = Prob::from_rat(searched->second);
    } else {
        throw ResourceLimit("classify: n too large for exhaustive psi search; force a psi");
    }

    if (rep.eps_star.exact == 0) {
        if (rep.eps_d.exact == 0) {
            rep.ratio = 1;
        } else {
            rep.ratio_infinite = true;
        }
    } else {
        rep.ratio = rep.eps_d.exact / rep.eps_star.exact;
    }
    rep.psi_regime = regime(rep.psi_star);
    return rep;
}

}  // namespace

ClassificationReport classify_dist(const Dist& p, const ClassifyOptions& opts) {
    if (p.mode() != Mode::exact) throw PreconditionError("classify: exact mode required");
    PsiEvaluator eval(p);
    std::array<Prob, 6> special_tv;
    for (std::size_t i = 0; i < kSpecialKinds.size(); ++i)
        special_tv[i] = Prob::from_rat(eval.tv(psi_of_special(kSpecialKinds[i], p.n())));
    std::optional<std::pair<PsiSet, Rat>> searched;
    if (!opts.forced_psi && p.n() <= opts.best_psi_max_n) searched = best_psi(p, opts.engine.threads);
    return classify_core(
        p.n(), false, opts, [&](const PsiSet& psi) { return eval.tv(psi); }, special_tv, searched);
}

ClassificationReport classify_wdist(const WDist& p, const ClassifyOptions& opts) {
    if (p.mode() != Mode::exact) throw PreconditionError("classify: exact mode required");
    std::array<Prob, 6> special_tv;
    for (std::size_t i = 0; i < kSpecialKinds.size(); ++i)
        special_tv[i] = Prob::from_rat(tv_to_psi_w(p, psi_of_special(kSpecialKinds[i], p.n())));
    std::optional<std::pair<PsiSet, Rat>> searched;
    if (!opts.forced_psi && p.n() <= opts.best_psi_max_n)
        searched = best_psi_w(p, opts.engine.threads);
    return classify_core(
        p.n(), true, opts, [&](const PsiSet& psi) { return tv_to_psi_w(p, psi); }, special_tv,
        searched);
}

ClassificationReport classify(const LocalFn& f, const ClassifyOptions& opts) {
    if (opts.weight_level) return classify_wdist(weight_distribution(f, opts.engine), opts);
    return classify_dist(output_distribution(f, opts.engine), opts);
}

nlohmann::json to_json(const ClassificationReport& rep) {
    nlohmann::json specials = nlohmann::json::object();
    for (std::size_t i = 0; i < kSpecialKinds.size(); ++i) {
        specials[to_string(kSpecialKinds[i])] = {{"tv", rep.special_tv[i].str()},
                                                 {"tv_float", rep.special_tv[i].value()}};
    }
    nlohmann::json j{{"n", rep.n},
                     {"weight_level", rep.weight_level},
                     {"specials", specials},
                     {"nearest_special", to_string(rep.nearest)},
                     {"eps_d", rep.eps_d.str()},
                     {"eps_d_float", rep.eps_d.value()},
                     {"psi_star", rep.psi_star.members},
                     {"psi_forced", rep.psi_forced},
                     {"eps_star", rep.eps_star.str()},
                     {"eps_star_float", rep.eps_star.value()},
                     {"regime", rep.psi_regime.name()},
                     {"iota", rep.psi_regime.iota_value}};
    if (rep.ratio_infinite)
        j["ratio"] = "inf";
    else {
        j["ratio"] = rat_str(rep.ratio);
        j["ratio_float"] = to_double(rep.ratio);
    }
    return j;
}

RatioSearchReport ratio_search(int n, int d, int trials, std::uint64_t seed,
                               const ClassifyOptions& opts) {
    if (n > 14) throw ResourceLimit("ratio_search: n too large for exhaustive classification");
    RatioSearchReport rep;
    rep.trials = static_cast<std::uint64_t>(trials);
    SplitMix64 rng(seed);
    for (int t = 0; t < trials; ++t) {
        int m = n + static_cast<int>(rng.below(static_cast<std::uint64_t>(n) + 1));
        SplitMix64 sub = rng.split();
        LocalFn f = random_localfn(n, m, d, sub);
        ClassifyOptions copts = opts;
        copts.weight_level = false;
        ClassificationReport cr = classify(f, copts);
        RatioTrial row;
        row.trial = static_cast<std::uint64_t>(t);
        row.n = n;
        row.m = m;
        row.d = d;
        row.eps_d = cr.eps_d.value();
        row.eps_star = cr.eps_star.value();
        row.ratio_infinite = cr.ratio_infinite;
        row.ratio = cr.ratio_infinite ? 0 : to_double(cr.ratio);
        if (cr.ratio_infinite)
            ++rep.infinite_count;
        else
            rep.max_finite_ratio = std::max(rep.max_finite_ratio, row.ratio);
        rep.rows.push_back(row);
    }
    return rep;
}

nlohmann::json to_json(const RatioSearchReport& rep) {
    nlohmann::json rows = nlohmann::json::array();
    for (const RatioTrial& r : rep.rows)
        rows.push_back({{"trial", r.trial},
                        {"n", r.n},
                        {"m", r.m},
                        {"d", r.d},
                        {"eps_d", r.eps_d},
                        {"eps_star", r.eps_star},
                        {"ratio", r.ratio_infinite ? nlohmann::json("inf") : nlohmann::json(r.ratio)}});
    return {{"trials", rep.trials},
            {"max_finite_ratio", rep.max_finite_ratio},
            {"infinite_count", rep.infinite_count},
            {"rows", rows}};
}

std::string ratio_search_csv(const RatioSearchReport& rep) {
    std::ostringstream os;
    os << "trial,n,m,d,eps_d,eps_star,ratio\n";
    for (const RatioTrial& r : rep.rows) {
        os << r.trial << "," << r.n << "," << r.m << "," << r.d << "," << r.eps_d << ","
           << r.eps_star << ",";
        if (r.ratio_infinite)
            os << "inf";
        else
            os << r.ratio;
        os << "\n";
    }
    return os.str();
}

ProbeReport slice_probe(const LocalFn& f, int k, const EngineOptions& engine) {
    if (k < 0 || k > f.n()) throw PreconditionError("slice_probe: k out of range");
    Dist p = output_distribution(f, engine);
    Rat tv = tv_to_psi(p, PsiSet(f.n(), {k}));
    ProbeReport rep;
    rep.kind = "slice";
    rep.tv = Prob::from_rat(tv);
    rep.reference = 1.0 / std::sqrt(static_cast<double>(f.n()));
    rep.detail = {{"k", k},
                  {"one_minus_tv", to_double(Rat(1) - tv)},
                  {"inv_sqrt_n", rep.reference}};
    return rep;
}

ProbeReport tail_probe(const LocalFn& f, const PsiSet& psi, const EngineOptions& engine) {
    Dist p = output_distribution(f, engine);
    Rat tv = tv_to_psi(p, psi);
    ProbeReport rep;
    rep.kind = "tail";
    rep.tv = Prob::from_rat(tv);
    rep.reference = 1.0 / 3.0;
    rep.detail = {{"psi", psi.members},
                  {"exceeds_one_third", tv > Rat(1, 3)},
                  {"regime", regime(psi).name()}};
    return rep;
}

nlohmann::json to_json(const ProbeReport& rep) {
    return {{"kind", rep.kind},
            {"tv", rep.tv.str()},
            {"tv_float", rep.tv.value()},
            {"reference", rep.reference},
            {"detail", rep.detail}};
}

}  // namespace lsl
