#include "lsl/dist.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace lsl {

namespace {

constexpr double kFloatSlack = 1e-12;

int popcount64(std::uint64_t x) { return std::popcount(x); }

void check_same_space(int pn, int qn) {
    if (pn != qn) throw DimensionMismatch("distributions live on different sample spaces");
}

// Enumerates all n-bit strings of weight w in increasing order (Gosper).
template <class Fn>
void for_each_weight(int n, int w, Fn&& fn) {
    if (w == 0) {
        fn(std::uint64_t{0});
        return;
    }
    std::uint64_t v = (std::uint64_t{1} << w) - 1;
    std::uint64_t limit = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n);
    while (v < limit) {
        fn(v);
        std::uint64_t c = v & -v;
        std::uint64_t r = v + c;
        if (r >= limit || r < v) break;
        v = (((r ^ v) >> 2) / c) | r;
    }
}

}  // namespace

const char* to_string(SpecialKind k) {
    switch (k) {
        case SpecialKind::zeros: return "zeros";
        case SpecialKind::ones: return "ones";
        case SpecialKind::zerones: return "zerones";
        case SpecialKind::evens: return "evens";
        case SpecialKind::odds: return "odds";
        case SpecialKind::all: return "all";
    }
    return "?";
}

SpecialKind special_kind_from_string(const std::string& s) {
    for (SpecialKind k : kSpecialKinds)
        if (s == to_string(k)) return k;
    throw ParseError("unknown special distribution: " + s);
}

PsiSet::PsiSet(int n_, std::vector<int> members_) : n(n_), members(std::move(members_)) {
    if (members.empty()) throw PreconditionError("PsiSet must be nonempty");
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (members[i] < 0 || members[i] > n) throw PreconditionError("PsiSet member out of range");
        if (i > 0 && members[i] <= members[i - 1])
            throw PreconditionError("PsiSet members must be strictly increasing");
    }
}

bool PsiSet::contains(int w) const {
    return std::binary_search(members.begin(), members.end(), w);
}

std::string PsiSet::str() const {
    std::string s = "{";
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(members[i]);
    }
    return s + "}";
}

PsiSet psi_of_special(SpecialKind kind, int n) {
    std::vector<int> m;
    switch (kind) {
        case SpecialKind::zeros: m = {0}; break;
        case SpecialKind::ones: m = {n}; break;
        case SpecialKind::zerones:
            m = {0};
            if (n > 0) m.push_back(n);
            break;
        case SpecialKind::evens:
            for (int w = 0; w <= n; w += 2) m.push_back(w);
            break;
        case SpecialKind::odds:
            for (int w = 1; w <= n; w += 2) m.push_back(w);
            break;
        case SpecialKind::all:
            for (int w = 0; w <= n; ++w) m.push_back(w);
            break;
    }
    return PsiSet(n, std::move(m));
}

WDist WDist::exact(int n, std::vector<Rat> pmf) {
    if (n < 0 || pmf.size() != static_cast<std::size_t>(n) + 1)
        throw PreconditionError("WDist pmf must have n+1 entries");
    Rat sum = 0;
    for (const Rat& v : pmf) {
        if (v < 0) throw PreconditionError("negative mass");
        sum += v;
    }
    if (sum != 1) throw PreconditionError("WDist mass must sum to 1 exactly");
    WDist w;
    w.n_ = n;
    w.mode_ = Mode::exact;
    w.q_ = std::move(pmf);
    return w;
}

WDist WDist::floating(int n, std::vector<double> pmf) {
    if (n < 0 || pmf.size() != static_cast<std::size_t>(n) + 1)
        throw PreconditionError("WDist pmf must have n+1 entries");
    double sum = 0;
    for (double v : pmf) {
        if (v < 0) throw PreconditionError("negative mass");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kFloatSlack) throw PreconditionError("WDist mass must sum to 1");
    WDist w;
    w.n_ = n;
    w.mode_ = Mode::floating;
    w.d_ = std::move(pmf);
    return w;
}

double WDist::d(int w) const {
    if (mode_ == Mode::exact) return to_double(q_[static_cast<std::size_t>(w)]);
    return d_[static_cast<std::size_t>(w)];
}

void Dist::validate() const {
    if (n_ < 1 || n_ > kMaxBits) throw PreconditionError("Dist bit count out of range");
    if (mode_ == Mode::exact) {
        Rat sum = 0;
        for_each_exact([&](std::uint64_t x, const Rat& v) {
            if (x >> n_) throw PreconditionError("support key out of range");
            if (v < 0) throw PreconditionError("negative mass");
            sum += v;
        });
        if (sum != 1) throw PreconditionError("Dist mass must sum to 1 exactly");
    } else {
        double sum = 0;
        for_each_float([&](std::uint64_t x, double v) {
            if (x >> n_) throw PreconditionError("support key out of range");
            if (v < 0) throw PreconditionError("negative mass");
            sum += v;
        });
        if (std::abs(sum - 1.0) > kFloatSlack) throw PreconditionError("Dist mass must sum to 1");
    }
}

Dist Dist::exact_dense(int n, std::vector<Rat> pmf) {
    if (n > kDenseBits) throw PreconditionError("dense storage only up to 24 bits");
    Dist p;
    p.n_ = n;
    p.mode_ = Mode::exact;
    if (n >= 1 && pmf.size() != (std::size_t{1} << n))
        throw PreconditionError("dense pmf size must be 2^n");
    p.dq_ = std::move(pmf);
    p.validate();
    return p;
}

Dist Dist::exact_sparse(int n, std::map<std::uint64_t, Rat> pmf) {
    if (n <= kDenseBits) {
        std::vector<Rat> dense(std::size_t{1} << n, Rat(0));
        for (auto& [x, v] : pmf) {
            if (x >> n) throw PreconditionError("support key out of range");
            dense[x] = std::move(v);
        }
        return exact_dense(n, std::move(dense));
    }
    Dist p;
    p.n_ = n;
    p.mode_ = Mode::exact;
    std::erase_if(pmf, [](const auto& kv) { return kv.second == 0; });
    p.sq_ = std::move(pmf);
    p.validate();
    return p;
}

Dist Dist::float_dense(int n, std::vector<double> pmf) {
    if (n > kDenseBits) throw PreconditionError("dense storage only up to 24 bits");
    Dist p;
    p.n_ = n;
    p.mode_ = Mode::floating;
    if (n >= 1 && pmf.size() != (std::size_t{1} << n))
        throw PreconditionError("dense pmf size must be 2^n");
    p.dd_ = std::move(pmf);
    p.validate();
    return p;
}

Dist Dist::float_sparse(int n, std::map<std::uint64_t, double> pmf) {
    if (n <= kDenseBits) {
        std::vector<double> dense(std::size_t{1} << n, 0.0);
        for (auto& [x, v] : pmf) {
            if (x >> n) throw PreconditionError("support key out of range");
            dense[x] = v;
        }
        return float_dense(n, std::move(dense));
    }
    Dist p;
    p.n_ = n;
    p.mode_ = Mode::floating;
    std::erase_if(pmf, [](const auto& kv) { return kv.second == 0.0; });
    p.sd_ = std::move(pmf);
    p.validate();
    return p;
}

Dist Dist::from_counts(int n, const std::map<std::uint64_t, Int>& counts, long denom_exp) {
    Rat denom = pow2(denom_exp);
    std::map<std::uint64_t, Rat> pmf;
    for (const auto& [x, c] : counts)
        if (c != 0) pmf.emplace(x, Rat(c) / denom);
    return exact_sparse(n, std::move(pmf));
}

Dist Dist::point(int n, std::uint64_t x) {
    std::map<std::uint64_t, Rat> pmf;
    pmf.emplace(x, Rat(1));
    return exact_sparse(n, std::move(pmf));
}

Rat Dist::q(std::uint64_t x) const {
    if (dense()) return dq_[x];
    auto it = sq_.find(x);
    return it == sq_.end() ? Rat(0) : it->second;
}

double Dist::d(std::uint64_t x) const {
    if (mode_ == Mode::exact) return to_double(q(x));
    if (dense()) return dd_[x];
    auto it = sd_.find(x);
    return it == sd_.end() ? 0.0 : it->second;
}

std::size_t Dist::support_size() const {
    std::size_t c = 0;
    if (mode_ == Mode::exact)
        for_each_exact([&](std::uint64_t, const Rat&) { ++c; });
    else
        for_each_float([&](std::uint64_t, double) { ++c; });
    return c;
}

Dist to_float(const Dist& p) {
    if (p.mode() == Mode::floating) return p;
    Dist r;
    r.n_ = p.n();
    r.mode_ = Mode::floating;
    r.degraded_ = true;
    if (p.dense()) {
        r.dd_.resize(std::size_t{1} << p.n(), 0.0);
        p.for_each_exact([&](std::uint64_t x, const Rat& v) { r.dd_[x] = to_double(v); });
    } else {
        p.for_each_exact([&](std::uint64_t x, const Rat& v) { r.sd_[x] = to_double(v); });
    }
    return r;
}

WDist to_float(const WDist& p) {
    if (p.mode() == Mode::floating) return p;
    std::vector<double> pmf(static_cast<std::size_t>(p.n()) + 1);
    for (int w = 0; w <= p.n(); ++w) pmf[static_cast<std::size_t>(w)] = to_double(p.q(w));
    WDist r = WDist::floating(p.n(), std::move(pmf));
    r.mark_degraded();
    return r;
}

namespace {

// Merged iteration over the union of two supports.
template <class Fn>
void exact_pair(const Dist& p, const Dist& q, Fn&& fn) {
    if (p.dense()) {
        std::uint64_t size = std::uint64_t{1} << p.n();
        for (std::uint64_t x = 0; x < size; ++x) {
            const Rat& a = p.q(x);
            const Rat& b = q.q(x);
            if (a != 0 || b != 0) fn(a, b);
        }
    } else {
        Rat zero(0);
        p.for_each_exact([&](std::uint64_t x, const Rat& a) { fn(a, q.q(x)); });
        q.for_each_exact([&](std::uint64_t x, const Rat& b) {
            if (p.q(x) == 0) fn(zero, b);
        });
    }
}

template <class Fn>
void float_pair(const Dist& p, const Dist& q, Fn&& fn) {
    if (p.dense()) {
        std::uint64_t size = std::uint64_t{1} << p.n();
        for (std::uint64_t x = 0; x < size; ++x) fn(p.d(x), q.d(x));
    } else {
        p.for_each_float([&](std::uint64_t x, double a) { fn(a, q.d(x)); });
        q.for_each_float([&](std::uint64_t x, double b) {
            if (p.d(x) == 0.0) fn(0.0, b);
        });
    }
}

bool both_exact(const Dist& p, const Dist& q) {
    return p.mode() == Mode::exact && q.mode() == Mode::exact;
}

bool either_degraded(const Dist& p, const Dist& q) {
    return p.degraded() || q.degraded() || p.mode() != q.mode();
}

}  // namespace

Prob tv_distance(const Dist& p, const Dist& q) {
    check_same_space(p.n(), q.n());
    if (both_exact(p, q)) {
        Rat sum = 0;
        exact_pair(p, q, [&](const Rat& a, const Rat& b) { sum += rat_abs(a - b); });
        Prob r = Prob::from_rat(sum / 2);
        r.degraded = p.degraded() || q.degraded();
        return r;
    }
    Dist pf = to_float(p), qf = to_float(q);
    double sum = 0;
    float_pair(pf, qf, [&](double a, double b) { sum += std::abs(a - b); });
    return Prob::from_double(sum / 2, either_degraded(p, q));
}

Prob tv_distance(const WDist& p, const WDist& q) {
    check_same_space(p.n(), q.n());
    if (p.mode() == Mode::exact && q.mode() == Mode::exact) {
        Rat sum = 0;
        for (int w = 0; w <= p.n(); ++w) sum += rat_abs(p.q(w) - q.q(w));
        Prob r = Prob::from_rat(sum / 2);
        r.degraded = p.degraded() || q.degraded();
        return r;
    }
    double sum = 0;
    for (int w = 0; w <= p.n(); ++w) sum += std::abs(p.d(w) - q.d(w));
    return Prob::from_double(sum / 2,
                             p.degraded() || q.degraded() || p.mode() != q.mode());
}

Prob max_event_gap(const Dist& p, const Dist& q) {
    check_same_space(p.n(), q.n());
    if (both_exact(p, q)) {
        Rat sum = 0;
        exact_pair(p, q, [&](const Rat& a, const Rat& b) {
            if (a > b) sum += a - b;
        });
        Prob r = Prob::from_rat(sum);
        r.degraded = p.degraded() || q.degraded();
        return r;
    }
    Dist pf = to_float(p), qf = to_float(q);
    double sum = 0;
    float_pair(pf, qf, [&](double a, double b) { sum += std::max(a - b, 0.0); });
    return Prob::from_double(sum, either_degraded(p, q));
}

Prob coupling_overlap(const Dist& p, const Dist& q) {
    check_same_space(p.n(), q.n());
    if (both_exact(p, q)) {
        Rat sum = 0;
        exact_pair(p, q, [&](const Rat& a, const Rat& b) { sum += std::min(a, b); });
        Prob r = Prob::from_rat(sum);
        r.degraded = p.degraded() || q.degraded();
        return r;
    }
    Dist pf = to_float(p), qf = to_float(q);
    double sum = 0;
    float_pair(pf, qf, [&](double a, double b) { sum += std::min(a, b); });
    return Prob::from_double(sum, either_degraded(p, q));
}

Prob kolmogorov_distance(const WDist& p, const WDist& q) {
    check_same_space(p.n(), q.n());
    if (p.mode() == Mode::exact && q.mode() == Mode::exact) {
        // suffix[t] = Pr[x > t]; t runs over {-1, ..., n} but both suffixes at
        // t = -1 equal 1, so the scan over t in {n-1, ..., 0, -1} suffices.
        Rat sp = 0, sq = 0, best = 0;
        for (int t = p.n() - 1; t >= -1; --t) {
            sp += p.q(t + 1);
            sq += q.q(t + 1);
            best = std::max(best, rat_abs(sp - sq));
        }
        Prob r = Prob::from_rat(best);
        r.degraded = p.degraded() || q.degraded();
        return r;
    }
    double sp = 0, sq = 0, best = 0;
    for (int t = p.n() - 1; t >= -1; --t) {
        sp += p.d(t + 1);
        sq += q.d(t + 1);
        best = std::max(best, std::abs(sp - sq));
    }
    return Prob::from_double(best,
                             p.degraded() || q.degraded() || p.mode() != q.mode());
}

WDist weight_marginal(const Dist& p) {
    std::size_t len = static_cast<std::size_t>(p.n()) + 1;
    if (p.mode() == Mode::exact) {
        std::vector<Rat> pmf(len, Rat(0));
        p.for_each_exact([&](std::uint64_t x, const Rat& v) {
            pmf[static_cast<std::size_t>(popcount64(x))] += v;
        });
        WDist w = WDist::exact(p.n(), std::move(pmf));
        if (p.degraded()) w.mark_degraded();
        return w;
    }
    std::vector<double> pmf(len, 0.0);
    p.for_each_float([&](std::uint64_t x, double v) {
        pmf[static_cast<std::size_t>(popcount64(x))] += v;
    });
    WDist w = WDist::floating(p.n(), std::move(pmf));
    if (p.degraded()) w.mark_degraded();
    return w;
}

Dist symmetrize(const Dist& p) {
    int n = p.n();
    WDist wm = weight_marginal(p);
    if (p.mode() == Mode::exact) {
        std::vector<Rat> slice(static_cast<std::size_t>(n) + 1);
        bool any_big = false;
        std::size_t total = 0;
        for (int w = 0; w <= n; ++w) {
            if (wm.q(w) != 0) {
                Int c = binom(static_cast<unsigned long>(n), static_cast<unsigned long>(w));
                slice[static_cast<std::size_t>(w)] = wm.q(w) / Rat(c);
                if (!p.dense()) {
                    if (!c.fits_ulong_p() || c.get_ui() > (1u << 22))
                        any_big = true;
                    else
                        total += c.get_ui();
                }
            }
        }
        if (p.dense()) {
            std::vector<Rat> pmf(std::size_t{1} << n);
            for (std::uint64_t x = 0; x < pmf.size(); ++x)
                pmf[x] = slice[static_cast<std::size_t>(popcount64(x))];
            Dist r = Dist::exact_dense(n, std::move(pmf));
            if (p.degraded()) r.mark_degraded();
            return r;
        }
        if (any_big || total > (std::size_t{1} << 22))
            throw ResourceLimit("symmetrize: support too large at this bit count");
        std::map<std::uint64_t, Rat> pmf;
        for (int w = 0; w <= n; ++w)
            if (wm.q(w) != 0)
                for_each_weight(n, w, [&](std::uint64_t x) {
                    pmf.emplace(x, slice[static_cast<std::size_t>(w)]);
                });
        Dist r = Dist::exact_sparse(n, std::move(pmf));
        if (p.degraded()) r.mark_degraded();
        return r;
    }
    if (!p.dense()) throw ResourceLimit("symmetrize: float sparse not supported");
    std::vector<double> slice(static_cast<std::size_t>(n) + 1, 0.0);
    for (int w = 0; w <= n; ++w) {
        double c = to_double(Rat(binom(static_cast<unsigned long>(n), static_cast<unsigned long>(w))));
        slice[static_cast<std::size_t>(w)] = wm.d(w) / c;
    }
    std::vector<double> pmf(std::size_t{1} << n);
    for (std::uint64_t x = 0; x < pmf.size(); ++x)
        pmf[x] = slice[static_cast<std::size_t>(popcount64(x))];
    Dist r = Dist::float_dense(n, std::move(pmf));
    if (p.degraded()) r.mark_degraded();
    return r;
}

Dist marginal(const Dist& p, const std::vector<int>& coords) {
    if (coords.empty()) throw PreconditionError("marginal: empty coordinate set");
    std::vector<bool> seen(static_cast<std::size_t>(p.n()), false);
    for (int c : coords) {
        if (c < 0 || c >= p.n()) throw PreconditionError("marginal: coordinate out of range");
        if (seen[static_cast<std::size_t>(c)]) throw PreconditionError("marginal: duplicate coordinate");
        seen[static_cast<std::size_t>(c)] = true;
    }
    int k = static_cast<int>(coords.size());
    auto project = [&](std::uint64_t x) {
        std::uint64_t y = 0;
        for (int j = 0; j < k; ++j) y |= ((x >> coords[static_cast<std::size_t>(j)]) & 1) << j;
        return y;
    };
    if (p.mode() == Mode::exact) {
        std::map<std::uint64_t, Rat> pmf;
        p.for_each_exact([&](std::uint64_t x, const Rat& v) { pmf[project(x)] += v; });
        Dist r = Dist::exact_sparse(k, std::move(pmf));
        if (p.degraded()) r.mark_degraded();
        return r;
    }
    std::map<std::uint64_t, double> pmf;
    p.for_each_float([&](std::uint64_t x, double v) { pmf[project(x)] += v; });
    Dist r = Dist::float_sparse(k, std::move(pmf));
    if (p.degraded()) r.mark_degraded();
    return r;
}

Dist product(const std::vector<Dist>& ps) {
    if (ps.empty()) throw PreconditionError("product: no factors");
    long total = 0;
    bool exact = true, degraded = false;
    for (const Dist& p : ps) {
        total += p.n();
        exact = exact && p.mode() == Mode::exact;
        degraded = degraded || p.degraded();
    }
    if (total > Dist::kMaxBits) throw ResourceLimit("product: too many output bits");
    if (!exact)  // promotion happens whenever an exact factor meets a float one
        for (const Dist& p : ps) degraded = degraded || p.mode() == Mode::exact;

    std::size_t support = 1;
    for (const Dist& p : ps) {
        support *= p.support_size();
        if (support > (std::size_t{1} << 24)) throw ResourceLimit("product: support too large");
    }
    if (exact) {
        std::map<std::uint64_t, Rat> acc;
        acc.emplace(0, Rat(1));
        int shift = 0;
        for (const Dist& p : ps) {
            std::map<std::uint64_t, Rat> next;
            p.for_each_exact([&](std::uint64_t x, const Rat& v) {
                for (const auto& [key, mass] : acc) next[key | (x << shift)] = mass * v;
            });
            acc = std::move(next);
            shift += p.n();
        }
        Dist r = Dist::exact_sparse(static_cast<int>(total), std::move(acc));
        if (degraded) r.mark_degraded();
        return r;
    }
    std::map<std::uint64_t, double> acc;
    acc.emplace(0, 1.0);
    int shift = 0;
    for (const Dist& p : ps) {
        Dist pf = to_float(p);
        std::map<std::uint64_t, double> next;
        pf.for_each_float([&](std::uint64_t x, double v) {
            for (const auto& [key, mass] : acc) next[key | (x << shift)] = mass * v;
        });
        acc = std::move(next);
        shift += p.n();
    }
    Dist r = Dist::float_sparse(static_cast<int>(total), std::move(acc));
    if (degraded) r.mark_degraded();
    return r;
}

Dist mixture(const std::vector<Rat>& weights, const std::vector<Dist>& ps) {
    if (weights.size() != ps.size() || ps.empty())
        throw PreconditionError("mixture: weights and components must align");
    Rat sum = 0;
    for (const Rat& w : weights) {
        if (w < 0) throw PreconditionError("mixture: negative weight");
        sum += w;
    }
    if (sum != 1) throw PreconditionError("mixture: weights must sum to 1");
    int n = ps[0].n();
    bool exact = true, degraded = false;
    for (const Dist& p : ps) {
        check_same_space(n, p.n());
        exact = exact && p.mode() == Mode::exact;
        degraded = degraded || p.degraded();
    }
    if (exact) {
        std::map<std::uint64_t, Rat> pmf;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            if (weights[i] == 0) continue;
            ps[i].for_each_exact(
                [&](std::uint64_t x, const Rat& v) { pmf[x] += weights[i] * v; });
        }
        Dist r = Dist::exact_sparse(n, std::move(pmf));
        if (degraded) r.mark_degraded();
        return r;
    }
    std::map<std::uint64_t, double> pmf;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (weights[i] == 0) continue;
        degraded = degraded || ps[i].mode() == Mode::exact;
        Dist pf = to_float(ps[i]);
        double w = to_double(weights[i]);
        pf.for_each_float([&](std::uint64_t x, double v) { pmf[x] += w * v; });
    }
    Dist r = Dist::float_sparse(n, std::move(pmf));
    if (degraded) r.mark_degraded();
    return r;
}

WDist mixture_w(const std::vector<Rat>& weights, const std::vector<WDist>& ps) {
    if (weights.size() != ps.size() || ps.empty())
        throw PreconditionError("mixture: weights and components must align");
    Rat sum = 0;
    for (const Rat& w : weights) {
        if (w < 0) throw PreconditionError("mixture: negative weight");
        sum += w;
    }
    if (sum != 1) throw PreconditionError("mixture: weights must sum to 1");
    int n = ps[0].n();
    for (const WDist& p : ps) {
        check_same_space(n, p.n());
        if (p.mode() != Mode::exact) throw PreconditionError("mixture_w: exact components required");
    }
    std::vector<Rat> pmf(static_cast<std::size_t>(n) + 1, Rat(0));
    for (std::size_t i = 0; i < ps.size(); ++i)
        for (int w = 0; w <= n; ++w) pmf[static_cast<std::size_t>(w)] += weights[i] * ps[i].q(w);
    return WDist::exact(n, std::move(pmf));
}

Dist special(SpecialKind kind, int n) {
    if (n < 1) throw PreconditionError("special: n must be >= 1");
    return uniform_symmetric(psi_of_special(kind, n));
}

WDist special_w(SpecialKind kind, int n) {
    if (n < 1) throw PreconditionError("special: n must be >= 1");
    return uniform_symmetric_w(psi_of_special(kind, n));
}

Dist uniform_symmetric(const PsiSet& psi) {
    int n = psi.n;
    if (n < 1) throw PreconditionError("uniform_symmetric: n must be >= 1");
    Int z = 0;
    for (int w : psi.members) z += binom(static_cast<unsigned long>(n), static_cast<unsigned long>(w));
    Rat mass = Rat(1) / Rat(z);
    if (n <= Dist::kDenseBits) {
        std::vector<bool> in(static_cast<std::size_t>(n) + 1, false);
        for (int w : psi.members) in[static_cast<std::size_t>(w)] = true;
        std::vector<Rat> pmf(std::size_t{1} << n, Rat(0));
        for (std::uint64_t x = 0; x < pmf.size(); ++x)
            if (in[static_cast<std::size_t>(popcount64(x))]) pmf[x] = mass;
        return Dist::exact_dense(n, std::move(pmf));
    }
    if (!z.fits_ulong_p() || z.get_ui() > (1u << 22))
        throw ResourceLimit("uniform_symmetric: support too large at this bit count");
    std::map<std::uint64_t, Rat> pmf;
    for (int w : psi.members)
        for_each_weight(n, w, [&](std::uint64_t x) { pmf.emplace(x, mass); });
    return Dist::exact_sparse(n, std::move(pmf));
}

WDist uniform_symmetric_w(const PsiSet& psi) {
    int n = psi.n;
    if (n < 1) throw PreconditionError("uniform_symmetric: n must be >= 1");
    Int z = 0;
    for (int w : psi.members) z += binom(static_cast<unsigned long>(n), static_cast<unsigned long>(w));
    std::vector<Rat> pmf(static_cast<std::size_t>(n) + 1, Rat(0));
    for (int w : psi.members)
        pmf[static_cast<std::size_t>(w)] =
            Rat(binom(static_cast<unsigned long>(n), static_cast<unsigned long>(w))) / Rat(z);
    return WDist::exact(n, std::move(pmf));
}

Dist apply_permutation(const Dist& p, const std::vector<int>& perm) {
    if (perm.size() != static_cast<std::size_t>(p.n()))
        throw PreconditionError("apply_permutation: wrong permutation length");
    std::vector<bool> seen(perm.size(), false);
    for (int v : perm) {
        if (v < 0 || v >= p.n() || seen[static_cast<std::size_t>(v)])
            throw PreconditionError("apply_permutation: not a permutation");
        seen[static_cast<std::size_t>(v)] = true;
    }
    auto remap = [&](std::uint64_t x) {
        std::uint64_t y = 0;
        for (int i = 0; i < p.n(); ++i)
            y |= ((x >> i) & 1) << perm[static_cast<std::size_t>(i)];
        return y;
    };
    if (p.mode() == Mode::exact) {
        std::map<std::uint64_t, Rat> pmf;
        p.for_each_exact([&](std::uint64_t x, const Rat& v) { pmf.emplace(remap(x), v); });
        Dist r = Dist::exact_sparse(p.n(), std::move(pmf));
        if (p.degraded()) r.mark_degraded();
        return r;
    }
    std::map<std::uint64_t, double> pmf;
    p.for_each_float([&](std::uint64_t x, double v) { pmf.emplace(remap(x), v); });
    Dist r = Dist::float_sparse(p.n(), std::move(pmf));
    if (p.degraded()) r.mark_degraded();
    return r;
}

bool exact_equal(const Dist& p, const Dist& q) {
    if (p.n() != q.n() || p.mode() != Mode::exact || q.mode() != Mode::exact) return false;
    bool eq = true;
    exact_pair(p, q, [&](const Rat& a, const Rat& b) { eq = eq && a == b; });
    return eq;
}

bool exact_equal(const WDist& p, const WDist& q) {
    if (p.n() != q.n() || p.mode() != Mode::exact || q.mode() != Mode::exact) return false;
    for (int w = 0; w <= p.n(); ++w)
        if (p.q(w) != q.q(w)) return false;
    return true;
}

nlohmann::json to_json(const Dist& p) {
    nlohmann::json pmf = nlohmann::json::object();
    if (p.mode() == Mode::exact)
        p.for_each_exact([&](std::uint64_t x, const Rat& v) { pmf[std::to_string(x)] = rat_str(v); });
    else
        p.for_each_float([&](std::uint64_t x, double v) { pmf[std::to_string(x)] = v; });
    return {{"n", p.n()},
            {"mode", p.mode() == Mode::exact ? "exact" : "float"},
            {"pmf", pmf}};
}

nlohmann::json to_json(const WDist& p) {
    nlohmann::json pmf = nlohmann::json::array();
    for (int w = 0; w <= p.n(); ++w) {
        if (p.mode() == Mode::exact)
            pmf.push_back(rat_str(p.q(w)));
        else
            pmf.push_back(p.d(w));
    }
    return {{"n", p.n()},
            {"mode", p.mode() == Mode::exact ? "exact" : "float"},
            {"pmf", pmf}};
}

namespace {

Mode parse_mode(const nlohmann::json& j) {
    std::string m = j.at("mode").get<std::string>();
    if (m == "exact") return Mode::exact;
    if (m == "float") return Mode::floating;
    throw ParseError("mode must be \"exact\" or \"float\", got \"" + m + "\"");
}

}  // namespace

Dist dist_from_json(const nlohmann::json& j) {
    int n = j.at("n").get<int>();
    Mode mode = parse_mode(j);
    const auto& pmf = j.at("pmf");
    if (!pmf.is_object()) throw ParseError("Dist pmf must be an object keyed by string index");
    if (mode == Mode::exact) {
        std::map<std::uint64_t, Rat> masses;
        for (const auto& [key, val] : pmf.items())
            masses.emplace(std::stoull(key), rat_parse(val.get<std::string>()));
        return Dist::exact_sparse(n, std::move(masses));
    }
    std::map<std::uint64_t, double> masses;
    for (const auto& [key, val] : pmf.items()) masses.emplace(std::stoull(key), val.get<double>());
    return Dist::float_sparse(n, std::move(masses));
}

WDist wdist_from_json(const nlohmann::json& j) {
    int n = j.at("n").get<int>();
    Mode mode = parse_mode(j);
    const auto& pmf = j.at("pmf");
    if (!pmf.is_array() || pmf.size() != static_cast<std::size_t>(n) + 1)
        throw ParseError("WDist pmf must be an array of n+1 entries");
    if (mode == Mode::exact) {
        std::vector<Rat> masses;
        masses.reserve(pmf.size());
        for (const auto& v : pmf) masses.push_back(rat_parse(v.get<std::string>()));
        return WDist::exact(n, std::move(masses));
    }
    std::vector<double> masses;
    masses.reserve(pmf.size());
    for (const auto& v : pmf) masses.push_back(v.get<double>());
    return WDist::floating(n, std::move(masses));
}

}  // namespace lsl
