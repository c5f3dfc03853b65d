#include "lsl/lemma_lab.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "lsl/errors.hpp"
#include "lsl/rng.hpp"

namespace lsl {

namespace {

double binary_entropy(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double log2_binom(long n, long k) {
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    return (std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(k) + 1) -
            std::lgamma(static_cast<double>(n - k) + 1)) /
           std::log(2.0);
}

double log2_mpz(const Int& v) {
    signed long exp;
    double d = mpz_get_d_2exp(&exp, v.get_mpz_t());
    return std::log2(d) + static_cast<double>(exp);
}

void track_slack(VerificationReport& rep, double margin) {
    if (rep.checked == 1)
        rep.max_slack = margin;
    else
        rep.max_slack = std::min(rep.max_slack, margin);
}

}  // namespace

nlohmann::json to_json(const VerificationReport& rep) {
    nlohmann::json violations = nlohmann::json::array();
    for (const std::string& v : rep.violations) violations.push_back({{"witness", v}});
    return {{"suite", rep.suite},     {"range", rep.range},
            {"checked", rep.checked}, {"violations", violations},
            {"max_slack", rep.max_slack}, {"applicable", rep.applicable},
            {"note", rep.note},       {"pass", rep.pass()}};
}

// ---------------------------------------------------------------- IntPMF --

IntPMF IntPMF::point(long v) {
    IntPMF p;
    p.offset = v;
    p.masses = {Rat(1)};
    return p;
}

IntPMF IntPMF::uniform(long lo, long hi) {
    if (hi < lo) throw PreconditionError("IntPMF::uniform: empty range");
    IntPMF p;
    p.offset = lo;
    p.masses.assign(static_cast<std::size_t>(hi - lo + 1), Rat(1, static_cast<unsigned long>(hi - lo + 1)));
    return p;
}

IntPMF IntPMF::from_masses(long offset, std::vector<Rat> masses) {
    IntPMF p;
    p.offset = offset;
    p.masses = std::move(masses);
    Rat sum = 0;
    for (const Rat& v : p.masses) {
        if (v < 0) throw PreconditionError("IntPMF: negative mass");
        sum += v;
    }
    if (sum != 1) throw PreconditionError("IntPMF: masses must sum to 1");
    while (!p.masses.empty() && p.masses.front() == 0) {
        p.masses.erase(p.masses.begin());
        ++p.offset;
    }
    while (!p.masses.empty() && p.masses.back() == 0) p.masses.pop_back();
    if (p.masses.empty()) throw PreconditionError("IntPMF: empty support");
    return p;
}

Rat IntPMF::at(long v) const {
    if (v < lo() || v > hi()) return Rat(0);
    return masses[static_cast<std::size_t>(v - offset)];
}

IntPMF convolve(const IntPMF& a, const IntPMF& b) {
    IntPMF r;
    r.offset = a.offset + b.offset;
    r.masses.assign(a.masses.size() + b.masses.size() - 1, Rat(0));
    for (std::size_t i = 0; i < a.masses.size(); ++i) {
        if (a.masses[i] == 0) continue;
        for (std::size_t j = 0; j < b.masses.size(); ++j)
            if (b.masses[j] != 0) r.masses[i + j] += a.masses[i] * b.masses[j];
    }
    return r;
}

IntPMF convolve_all(const std::vector<IntPMF>& ps) {
    if (ps.empty()) return IntPMF::point(0);
    std::vector<IntPMF> layer = ps;
    while (layer.size() > 1) {
        std::vector<IntPMF> next;
        next.reserve((layer.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < layer.size(); i += 2)
            next.push_back(convolve(layer[i], layer[i + 1]));
        if (layer.size() % 2) next.push_back(layer.back());
        layer = std::move(next);
    }
    return layer.front();
}

IntPMF iid_convolve(const IntPMF& base, int count) {
    if (count < 1) throw PreconditionError("iid_convolve: count must be >= 1");
    // common denominator keeps the inner loop in integer adds
    Int den = 1;
    for (const Rat& v : base.masses) den = lcm(den, v.get_den());
    std::vector<Int> cs(base.masses.size());
    for (std::size_t j = 0; j < cs.size(); ++j)
        cs[j] = base.masses[j].get_num() * (den / base.masses[j].get_den());

    std::vector<Int> acc{Int(1)};
    for (int k = 0; k < count; ++k) {
        std::vector<Int> next(acc.size() + cs.size() - 1, Int(0));
        for (std::size_t i = 0; i < acc.size(); ++i) {
            if (acc[i] == 0) continue;
            for (std::size_t j = 0; j < cs.size(); ++j) {
                if (cs[j] == 0) continue;
                if (cs[j] == 1)
                    next[i + j] += acc[i];
                else
                    mpz_addmul(next[i + j].get_mpz_t(), acc[i].get_mpz_t(), cs[j].get_mpz_t());
            }
        }
        acc = std::move(next);
    }
    Int total = 1;
    mpz_pow_ui(total.get_mpz_t(), den.get_mpz_t(), static_cast<unsigned long>(count));
    IntPMF r;
    r.offset = base.offset * count;
    r.masses.resize(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) r.masses[i] = Rat(acc[i]) / Rat(total);
    return IntPMF::from_masses(r.offset, std::move(r.masses));
}

nlohmann::json to_json(const IntPMF& p) {
    nlohmann::json masses = nlohmann::json::array();
    for (const Rat& v : p.masses) masses.push_back(rat_str(v));
    return {{"offset", p.offset}, {"masses", masses}};
}

IntPMF intpmf_from_json(const nlohmann::json& j) {
    std::vector<Rat> masses;
    for (const auto& v : j.at("masses")) masses.push_back(rat_parse(v.get<std::string>()));
    return IntPMF::from_masses(j.at("offset").get<long>(), std::move(masses));
}

// ------------------------------------------------------ density instance --

void DensityInstance::validate() const {
    if (t < 1) throw PreconditionError("DensityInstance: t must be >= 1");
    if (pmfs.empty()) throw PreconditionError("DensityInstance: no variables");
    if (iid_count && pmfs.size() != 1)
        throw PreconditionError("DensityInstance: iid form keeps exactly one pmf");
    for (const IntPMF& p : pmfs)
        if (p.lo() < 0 || p.hi() > t)
            throw PreconditionError("DensityInstance: support outside [0, t]");
    for (std::size_t i = 0; i < phi_set.size(); ++i) {
        if (phi_set[i] < 2 || phi_set[i] > t)
            throw PreconditionError("DensityInstance: Phi must sit inside {2, ..., t}");
        if (i > 0 && phi_set[i] <= phi_set[i - 1])
            throw PreconditionError("DensityInstance: Phi must be sorted");
    }
}

nlohmann::json to_json(const DensityInstance& inst) {
    nlohmann::json pmfs = nlohmann::json::array();
    for (const IntPMF& p : inst.pmfs) pmfs.push_back(to_json(p));
    return {{"t", inst.t}, {"phi_set", inst.phi_set}, {"pmfs", pmfs}, {"iid_count", inst.iid_count}};
}

DensityInstance density_instance_from_json(const nlohmann::json& j) {
    DensityInstance inst;
    inst.t = j.at("t").get<int>();
    inst.phi_set = j.at("phi_set").get<std::vector<int>>();
    for (const auto& p : j.at("pmfs")) inst.pmfs.push_back(intpmf_from_json(p));
    inst.iid_count = j.value("iid_count", 0);
    inst.validate();
    return inst;
}

DensityInstance parity_counterexample_instance(int n) {
    DensityInstance inst;
    inst.t = 3;
    inst.phi_set = {3};  // r = 2 fails the spread hypothesis, so Phi avoids it
    IntPMF two_odd;
    two_odd.offset = 1;
    two_odd.masses = {Rat(1, 2), Rat(0), Rat(1, 2)};  // uniform over {1, 3}
    inst.pmfs = {IntPMF::from_masses(two_odd.offset, two_odd.masses)};
    inst.iid_count = n;
    inst.validate();
    return inst;
}

DensityParams density_params(const DensityInstance& inst) {
    inst.validate();
    DensityParams out;
    if (inst.phi_set.empty()) {
        out.applicable = false;
        out.note = "Phi is empty; the density theorem does not apply";
        return out;
    }
    std::size_t n = inst.count();
    bool first = true;
    for (int r : inst.phi_set) {
        auto residue_max = [&](const IntPMF& p) {
            std::vector<Rat> res(static_cast<std::size_t>(r), Rat(0));
            for (long v = p.lo(); v <= p.hi(); ++v)
                res[static_cast<std::size_t>(((v % r) + r) % r)] += p.at(v);
            Rat mx = 0;
            for (const Rat& v : res) mx = std::max(mx, v);
            return mx;
        };
        Rat lr = 0;
        if (inst.iid_count) {
            lr = Rat(inst.iid_count) * (Rat(1) - residue_max(inst.pmfs.front()));
        } else {
            for (const IntPMF& p : inst.pmfs) lr += Rat(1) - residue_max(p);
        }
        out.l_per_r.push_back(lr);
        if (first || lr < out.l) out.l = lr;
        first = false;
    }
    if (out.l <= 0) {
        out.applicable = false;
        out.note = "some modulus in Phi has no spread (L = 0); hypothesis fails";
        return out;
    }
    long phi = 1;
    for (int v = 1; v <= inst.t; ++v)
        if (!std::binary_search(inst.phi_set.begin(), inst.phi_set.end(), v))
            phi = std::lcm(phi, static_cast<long>(v));
    out.phi = static_cast<int>(phi);

    unsigned long exp = static_cast<unsigned long>(inst.t) * static_cast<unsigned long>(inst.t) *
                        static_cast<unsigned long>(phi);
    if (exp > 10000) throw ResourceLimit("density_params: alpha exponent too large");
    Rat base = out.l / Rat(4 * static_cast<long>(n) * (inst.t + 1));
    out.alpha = rat_pow(base, exp);
    Rat denom = Rat(16L * inst.t * inst.t * inst.t * inst.t * phi);
    out.block_count = rat_floor(out.l / denom);
    return out;
}

// ---------------------------------------------------------- density checks --

namespace {

// Scans |P(x) - P(x + delta)| <= bound(delta) for delta in the grid; positive
// deltas checked with absolute differences cover both signs.
void scan_density_bound(VerificationReport& rep, const IntPMF& sum, const std::vector<long>& deltas,
                        long phi, const Rat& alpha, long m_blocks) {
    Rat max_diff = 0;
    double max_tightness = 0;
    for (long delta : deltas) {
        Rat bound = Rat(22 * delta) / (Rat(phi) * alpha * Rat(m_blocks));
        for (long y = sum.lo(); y <= sum.hi(); ++y) {
            Rat diff = rat_abs(sum.at(y) - sum.at(y + delta));
            ++rep.checked;
            track_slack(rep, to_double(bound - diff));
            if (diff > bound) {
                rep.violations.push_back("y=" + std::to_string(y) + " delta=" +
                                         std::to_string(delta) + " diff=" + rat_str(diff) +
                                         " bound=" + rat_str(bound));
                if (rep.violations.size() > 8) return;
            }
            max_diff = std::max(max_diff, diff);
            if (bound > 0) max_tightness = std::max(max_tightness, to_double(diff / bound));
        }
    }
    std::ostringstream note;
    note << "max density difference " << to_double(max_diff) << ", tightness " << max_tightness;
    rep.note = note.str();
}

}  // namespace

VerificationReport check_density_lemma(const std::vector<IntPMF>& ys, long phi, const Rat& alpha,
                                       const std::vector<long>& us, long delta_max) {
    VerificationReport rep;
    rep.suite = "density-lemma";
    if (ys.empty() || us.size() != ys.size())
        throw PreconditionError("check_density_lemma: variables and anchors must align");
    if (phi < 1 || alpha <= 0) throw PreconditionError("check_density_lemma: bad phi/alpha");
    rep.range = "m=" + std::to_string(ys.size()) + " phi=" + std::to_string(phi) +
                " delta<=" + std::to_string(delta_max);
    for (std::size_t i = 0; i < ys.size(); ++i) {
        if (ys[i].at(us[i]) < alpha || ys[i].at(us[i] + phi) < alpha) {
            rep.applicable = false;
            rep.note = "hypothesis fails at variable " + std::to_string(i) +
                       ": needs mass >= alpha at u and u+phi";
            return rep;
        }
    }
    IntPMF sum = convolve_all(ys);
    std::vector<long> deltas;
    for (long d = phi; d <= delta_max; d += phi) deltas.push_back(d);
    scan_density_bound(rep, sum, deltas, phi, alpha, static_cast<long>(ys.size()));
    return rep;
}

VerificationReport check_density_theorem(const DensityInstance& inst,
                                         const std::vector<long>& deltas) {
    VerificationReport rep;
    rep.suite = "density-theorem";
    DensityParams params = density_params(inst);
    rep.range = "n=" + std::to_string(inst.count()) + " t=" + std::to_string(inst.t);
    if (!params.applicable) {
        rep.applicable = false;
        rep.note = params.note;
        return rep;
    }
    for (long d : deltas)
        if (d == 0 || d % params.phi != 0)
            throw PreconditionError("check_density_theorem: delta " + std::to_string(d) +
                                    " is not a nonzero multiple of phi = " +
                                    std::to_string(params.phi));
    if (params.block_count < 1) {
        rep.applicable = false;
        rep.note = "block count is zero; the bound is vacuous at this size";
        return rep;
    }
    IntPMF sum = inst.iid_count ? iid_convolve(inst.pmfs.front(), inst.iid_count)
                                : convolve_all(inst.pmfs);
    std::vector<long> pos;
    for (long d : deltas) pos.push_back(std::abs(d));
    std::sort(pos.begin(), pos.end());
    pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
    scan_density_bound(rep, sum, pos, params.phi, params.alpha, params.block_count);
    return rep;
}

VerificationReport check_density_theorem(const DensityInstance& inst, long delta_max) {
    DensityParams params = density_params(inst);
    std::vector<long> deltas;
    if (params.applicable)
        for (long d = params.phi; d <= delta_max; d += params.phi) deltas.push_back(d);
    return check_density_theorem(inst, deltas);
}

// ----------------------------------------------------------------- bezout --

std::vector<Int> bezout_combination(const std::vector<Int>& ws, const Int& target) {
    if (ws.empty()) throw PreconditionError("bezout_combination: no coefficients");
    for (const Int& w : ws)
        if (w == 0) throw PreconditionError("bezout_combination: zero weight");
    std::vector<Int> coeffs{Int(1)};
    Int g = ws[0];
    for (std::size_t j = 1; j < ws.size(); ++j) {
        Int g2, x, y;
        mpz_gcdext(g2.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t(), g.get_mpz_t(),
                   ws[j].get_mpz_t());
        for (Int& c : coeffs) c *= x;
        coeffs.push_back(y);
        g = g2;
    }
    if (target % g != 0)
        throw PreconditionError("bezout_combination: target is not a multiple of the gcd");
    Int scale = target / g;
    for (Int& c : coeffs) c *= scale;
    return coeffs;
}

std::optional<std::vector<long>> bezout_bounded(const std::vector<long>& ws, long target,
                                                long bound) {
    if (ws.empty() || bound < 0) return std::nullopt;
    long reach = 0;
    for (long w : ws) reach += bound * std::abs(w);
    if (reach > 2'000'000) return std::nullopt;
    if (std::abs(target) > reach) return std::nullopt;
    long width = 2 * reach + 1;
    // chosen[j][sum + reach] = coefficient for variable j on some path to sum
    std::vector<std::vector<long>> chosen(ws.size(),
                                          std::vector<long>(static_cast<std::size_t>(width),
                                                            std::numeric_limits<long>::min()));
    std::vector<bool> cur(static_cast<std::size_t>(width), false), next;
    cur[static_cast<std::size_t>(reach)] = true;
    for (std::size_t j = 0; j < ws.size(); ++j) {
        next.assign(static_cast<std::size_t>(width), false);
        for (long s = -reach; s <= reach; ++s) {
            if (!cur[static_cast<std::size_t>(s + reach)]) continue;
            for (long c = -bound; c <= bound; ++c) {
                long s2 = s + c * ws[j];
                if (s2 < -reach || s2 > reach) continue;
                std::size_t idx = static_cast<std::size_t>(s2 + reach);
                if (!next[idx]) {
                    next[idx] = true;
                    chosen[j][idx] = c;
                }
            }
        }
        cur.swap(next);
    }
    if (!cur[static_cast<std::size_t>(target + reach)]) return std::nullopt;
    std::vector<long> out(ws.size(), 0);
    long s = target;
    for (std::size_t j = ws.size(); j-- > 0;) {
        long c = chosen[j][static_cast<std::size_t>(s + reach)];
        out[j] = c;
        s -= c * ws[j];
    }
    return out;
}

// ------------------------------------------------------- binomial suites --

VerificationReport verify_nearby_binom(int n_max) {
    VerificationReport rep;
    rep.suite = "nearby-binom";
    rep.range = "1 <= n <= " + std::to_string(n_max) + ", 1 <= b <= n";
    int exact_cap = std::min(n_max, 200);
    for (int n = 1; n <= exact_cap; ++n) {
        Int pw = pow2(n).get_num();
        for (int b = 1; b <= n; ++b) {
            Int diff = binom(static_cast<unsigned long>(n), static_cast<unsigned long>(b)) -
                       (b + 1 <= n
                            ? binom(static_cast<unsigned long>(n), static_cast<unsigned long>(b + 1))
                            : Int(0));
            ++rep.checked;
            double value = diff > 0 ? to_double(Rat(diff) / Rat(pw)) : 0.0;
            track_slack(rep, 7.0 / n - value);
            if (diff > 0 && diff * n > 7 * pw)
                rep.violations.push_back("exact n=" + std::to_string(n) + " b=" + std::to_string(b));
        }
    }
    for (int n = exact_cap + 1; n <= n_max; ++n) {
        for (int b = 1; b <= n; ++b) {
            ++rep.checked;
            if (2 * b < n) continue;  // C(n,b) <= C(n,b+1); difference is nonpositive
            double lc = log2_binom(n, b);
            double value = std::exp2(lc - n) *
                           (1.0 - static_cast<double>(n - b) / (static_cast<double>(b) + 1.0));
            track_slack(rep, 7.0 / n - value);
            if (value > 7.0 / n + 1e-9)
                rep.violations.push_back("float n=" + std::to_string(n) + " b=" + std::to_string(b));
        }
    }
    return rep;
}

VerificationReport verify_entropy(int grid_steps) {
    VerificationReport rep;
    rep.suite = "entropy";
    rep.range = "x in [-1, 1], " + std::to_string(grid_steps + 1) + " points";
    for (int i = 0; i <= grid_steps; ++i) {
        double x = -1.0 + 2.0 * i / grid_steps;
        double h = binary_entropy((1.0 + x) / 2.0);
        double lower = 1.0 - x * x;
        double upper = 1.0 - x * x / (2.0 * std::log(2.0));
        ++rep.checked;
        track_slack(rep, std::min(h - lower, upper - h));
        if (h < lower - 1e-9 || h > upper + 1e-9)
            rep.violations.push_back("x=" + std::to_string(x));
    }
    return rep;
}

VerificationReport verify_individual_binom(int n_max) {
    VerificationReport rep;
    rep.suite = "individual-binom";
    rep.range = "2 <= n <= " + std::to_string(n_max) + ", 1 <= k <= n-1";
    for (int n = 2; n <= n_max; ++n) {
        for (int k = 1; k <= n - 1; ++k) {
            double lc = log2_binom(n, k);
            double frac = static_cast<double>(k) / n;
            double nh = n * binary_entropy(frac);
            double lower = nh - 0.5 * std::log2(8.0 * k * (1.0 - frac));
            double upper = nh - 0.5 * std::log2(std::acos(-1.0) * k * (1.0 - frac));
            ++rep.checked;
            track_slack(rep, std::min(lc - lower, upper - lc));
            if (lc < lower - 1e-9 || lc > upper + 1e-9)
                rep.violations.push_back("n=" + std::to_string(n) + " k=" + std::to_string(k));
        }
    }
    return rep;
}

VerificationReport verify_binom_tail(int n_max) {
    VerificationReport rep;
    rep.suite = "binom-tail";
    rep.range = "2 <= n <= " + std::to_string(n_max) + ", 1 <= k <= n/2";
    for (int n = 2; n <= n_max; ++n) {
        Int sum = 1;  // i = 0 term
        for (int k = 1; 2 * k <= n; ++k) {
            Int cnk = binom(static_cast<unsigned long>(n), static_cast<unsigned long>(k));
            sum += cnk;
            ++rep.checked;
            // ratio bound, exact integers
            if (sum * (n - 2 * k + 1) > cnk * (n - k + 1))
                rep.violations.push_back("ratio n=" + std::to_string(n) + " k=" + std::to_string(k));
            // entropy bound, log domain
            double lhs = log2_mpz(sum);
            double rhs = n * binary_entropy(static_cast<double>(k) / n);
            track_slack(rep, rhs - lhs);
            if (lhs > rhs + 1e-9)
                rep.violations.push_back("entropy n=" + std::to_string(n) + " k=" + std::to_string(k));
        }
    }
    return rep;
}

// -------------------------------------------------------------- chebyshev --

int RationalPoly::degree() const {
    for (std::size_t i = coeffs.size(); i-- > 0;)
        if (coeffs[i] != 0) return static_cast<int>(i);
    return -1;
}

Rat RationalPoly::eval(const Rat& x) const {
    Rat acc = 0;
    for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
    return acc;
}

void RationalPoly::trim() {
    while (!coeffs.empty() && coeffs.back() == 0) coeffs.pop_back();
}

RationalPoly poly_mul(const RationalPoly& a, const RationalPoly& b) {
    RationalPoly r;
    if (a.coeffs.empty() || b.coeffs.empty()) return r;
    r.coeffs.assign(a.coeffs.size() + b.coeffs.size() - 1, Rat(0));
    for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
        if (a.coeffs[i] == 0) continue;
        for (std::size_t j = 0; j < b.coeffs.size(); ++j)
            r.coeffs[i + j] += a.coeffs[i] * b.coeffs[j];
    }
    r.trim();
    return r;
}

RationalPoly chebyshev_p_coeffs(int r) {
    if (r < 1 || r % 2 == 0) throw PreconditionError("chebyshev_p_coeffs: r must be odd and >= 1");
    // T_j(y/r) via T_{j+1}(z) = 2 z T_j(z) - T_{j-1}(z)
    RationalPoly prev;  // T_0
    prev.coeffs = {Rat(1)};
    RationalPoly cur;  // T_1
    cur.coeffs = {Rat(0), Rat(1, static_cast<unsigned long>(r))};
    for (int j = 1; j < r; ++j) {
        RationalPoly next;
        next.coeffs.assign(cur.coeffs.size() + 1, Rat(0));
        Rat two_over_r = Rat(2, static_cast<unsigned long>(r));
        for (std::size_t i = 0; i < cur.coeffs.size(); ++i)
            next.coeffs[i + 1] = two_over_r * cur.coeffs[i];
        for (std::size_t i = 0; i < prev.coeffs.size(); ++i) next.coeffs[i] -= prev.coeffs[i];
        next.trim();
        prev = std::move(cur);
        cur = std::move(next);
    }
    if (cur.coeffs.empty() || cur.coeffs[0] != 0)
        throw PostconditionViolation("chebyshev_p_coeffs: odd T_r must vanish at 0");
    RationalPoly q;  // T_r(y/r) / y
    q.coeffs.assign(cur.coeffs.begin() + 1, cur.coeffs.end());
    return poly_mul(q, q);
}

VerificationReport verify_p_facts(const std::vector<int>& r_set, const Rat& grid_step) {
    VerificationReport rep;
    rep.suite = "p-facts";
    rep.range = "grid |y| <= 3r, step " + rat_str(grid_step);
    if (grid_step <= 0) throw PreconditionError("verify_p_facts: step must be positive");
    for (int r : r_set) {
        RationalPoly p = chebyshev_p_coeffs(r);
        ++rep.checked;
        if (p.degree() != 2 * r - 2 || p.degree() > 2 * r)
            rep.violations.push_back("degree r=" + std::to_string(r));
        for (Rat y = Rat(-3) * r; y <= Rat(3) * r; y += grid_step) {
            Rat v = p.eval(y);
            Rat ay = rat_abs(y);
            ++rep.checked;
            if (v < 0) rep.violations.push_back("negative r=" + std::to_string(r) + " y=" + rat_str(y));
            if (ay <= Rat(1, 10) && v < Rat(1, 2))
                rep.violations.push_back("center r=" + std::to_string(r) + " y=" + rat_str(y));
            if (ay <= r) {
                if (v > 1)
                    rep.violations.push_back("cap1 r=" + std::to_string(r) + " y=" + rat_str(y));
                if (y != 0 && v > Rat(1) / (y * y))
                    rep.violations.push_back("cap1/y2 r=" + std::to_string(r) + " y=" + rat_str(y));
            }
            if (ay >= r) {
                Rat bound = rat_pow(Rat(2) * ay / r, static_cast<unsigned long>(2 * r));
                track_slack(rep, to_double(bound - v));
                if (v > bound)
                    rep.violations.push_back("tail r=" + std::to_string(r) + " y=" + rat_str(y));
            }
            if (rep.violations.size() > 16) return rep;
        }
    }
    return rep;
}

// --------------------------------------------------- random polynomials --

namespace {

struct RandomPoly {
    int n = 0;
    int degree = 0;  // effective degree
    std::vector<std::pair<std::uint32_t, int>> terms;  // (variable mask, +-1)
};

RandomPoly random_poly(int n, int d, SplitMix64& rng) {
    RandomPoly p;
    p.n = n;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        if (std::popcount(mask) > d) continue;
        if (rng.coin()) continue;
        int coeff = rng.coin() ? 1 : -1;
        p.terms.emplace_back(mask, coeff);
        p.degree = std::max(p.degree, std::popcount(mask));
    }
    return p;
}

// values over all 2^n sign assignments (bit = 1 means x_i = -1)
std::vector<long> eval_all(const RandomPoly& p) {
    std::vector<long> vals(std::size_t{1} << p.n, 0);
    for (std::uint32_t x = 0; x < vals.size(); ++x) {
        long v = 0;
        for (const auto& [mask, coeff] : p.terms)
            v += (std::popcount(mask & x) & 1) ? -coeff : coeff;
        vals[x] = v;
    }
    return vals;
}

}  // namespace

VerificationReport verify_hypercontractivity(int trials, int n_max, int d_max,
                                             const std::vector<int>& q_set, std::uint64_t seed) {
    VerificationReport rep;
    rep.suite = "hypercontractivity";
    rep.range = "n <= " + std::to_string(n_max) + ", d <= " + std::to_string(d_max);
    for (int q : q_set)
        if (q < 2 || q % 2) throw PreconditionError("hypercontractivity: q must be even, >= 2");
    SplitMix64 rng(seed);
    for (int t = 0; t < trials; ++t) {
        int d = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(d_max)));
        int n = d + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_max - d)));
        RandomPoly p = random_poly(n, d, rng);
        std::vector<long> vals = eval_all(p);
        Int s2 = 0;
        for (long v : vals) s2 += Int(v) * v;
        for (int q : q_set) {
            Int sq = 0;
            for (long v : vals) {
                Int pw = Int(v) * v;
                Int acc = pw;
                for (int e = 2; e < q; e += 2) acc *= pw;
                sq += acc;
            }
            ++rep.checked;
            // (S_q / 2^n)^2 <= (q-1)^{dq} (S_2 / 2^n)^q
            Int lhs = sq * sq;
            mpz_mul_2exp(lhs.get_mpz_t(), lhs.get_mpz_t(),
                         static_cast<unsigned long>(n) * static_cast<unsigned long>(q - 2));
            Int rhs;
            mpz_ui_pow_ui(rhs.get_mpz_t(), static_cast<unsigned long>(q - 1),
                          static_cast<unsigned long>(p.degree) * static_cast<unsigned long>(q));
            Int s2q;
            mpz_pow_ui(s2q.get_mpz_t(), s2.get_mpz_t(), static_cast<unsigned long>(q));
            rhs *= s2q;
            if (s2 != 0) {
                double norm_q = std::pow(to_double(Rat(sq) / pow2(n)), 1.0 / q);
                double norm_2 = std::sqrt(to_double(Rat(s2) / pow2(n)));
                track_slack(rep, std::pow(std::sqrt(static_cast<double>(q - 1)), p.degree) -
                                     norm_q / norm_2);
            }
            if (lhs > rhs)
                rep.violations.push_back("trial=" + std::to_string(t) + " q=" + std::to_string(q) +
                                         " n=" + std::to_string(n) + " d=" + std::to_string(p.degree));
        }
    }
    return rep;
}

VerificationReport verify_weak_anticoncentration(int trials, int n_max, int d_max,
                                                 std::uint64_t seed) {
    VerificationReport rep;
    rep.suite = "weak-anticoncentration";
    rep.range = "n <= " + std::to_string(n_max) + ", d <= " + std::to_string(d_max);
    SplitMix64 rng(seed);
    for (int t = 0; t < trials; ++t) {
        int d = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(d_max)));
        int n = d + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_max - d)));
        RandomPoly p = random_poly(n, d, rng);
        std::vector<long> vals = eval_all(p);
        Int s2 = 0;
        for (long v : vals) s2 += Int(v) * v;
        // count x with p(x)^2 >= ||p||_2^2 / 4, i.e. 4 * 2^n * v^2 >= ... kept exact
        Int cnt = 0;
        for (long v : vals) {
            Int lhs = Int(4) * v * v;
            mpz_mul_2exp(lhs.get_mpz_t(), lhs.get_mpz_t(), static_cast<unsigned long>(n));
            if (lhs >= s2) ++cnt;
        }
        ++rep.checked;
        Int nine_d;
        mpz_ui_pow_ui(nine_d.get_mpz_t(), 9, static_cast<unsigned long>(p.degree));
        Int lhs = cnt * 2 * nine_d;
        Int rhs = pow2(n).get_num();
        track_slack(rep, to_double(Rat(cnt) / pow2(n)) -
                             0.5 / to_double(Rat(nine_d)));
        if (lhs < rhs)
            rep.violations.push_back("trial=" + std::to_string(t) + " n=" + std::to_string(n) +
                                     " d=" + std::to_string(p.degree));
    }
    return rep;
}

VerificationReport poly_anticoncentration_report(int trials, int n_max, int d_max,
                                                 std::uint64_t seed) {
    VerificationReport rep;
    rep.suite = "poly-anticoncentration";
    rep.range = "report-only; K in {1,2,3,4}";
    rep.note = "qualitative: exact tail masses, nonincreasing in K";
    SplitMix64 rng(seed);
    double worst_tail = 0;
    for (int t = 0; t < trials; ++t) {
        int d = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(d_max)));
        int n = d + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_max - d)));
        RandomPoly p = random_poly(n, d, rng);
        std::vector<long> vals = eval_all(p);
        Int s2 = 0;
        for (long v : vals) s2 += Int(v) * v;
        Int prev = -1;
        for (int k = 1; k <= 4; ++k) {
            Int cnt = 0;
            for (long v : vals) {
                Int lhs = Int(v) * v;
                mpz_mul_2exp(lhs.get_mpz_t(), lhs.get_mpz_t(), static_cast<unsigned long>(n));
                if (lhs > Int(k) * k * s2) ++cnt;
            }
            ++rep.checked;
            if (prev >= 0 && cnt > prev)
                rep.violations.push_back("tail increased at K=" + std::to_string(k));
            prev = cnt;
            if (k == 2 && s2 != 0) worst_tail = std::max(worst_tail, to_double(Rat(cnt) / pow2(n)));
        }
    }
    rep.max_slack = worst_tail;
    return rep;
}

// ------------------------------------------------ distribution lemma suites --

namespace {

Dist random_exact_dist(int n, SplitMix64& rng) {
    std::uint64_t space = std::uint64_t{1} << n;
    int support = 1 + static_cast<int>(rng.below(std::min<std::uint64_t>(space, 12)));
    std::map<std::uint64_t, Int> weights;
    for (int i = 0; i < support; ++i)
        weights[rng.below(space)] += 1 + static_cast<long>(rng.below(16));
    Int total = 0;
    for (const auto& [k, w] : weights) total += w;
    std::map<std::uint64_t, Rat> pmf;
    for (const auto& [k, w] : weights) pmf.emplace(k, Rat(w) / Rat(total));
    return Dist::exact_sparse(n, std::move(pmf));
}

Dist random_symmetric_dist(int n, SplitMix64& rng) {
    std::vector<Int> weights(static_cast<std::size_t>(n) + 1, Int(0));
    Int total = 0;
    for (int w = 0; w <= n; ++w) {
        if (rng.below(3) == 0) continue;  // keep some slices empty
        weights[static_cast<std::size_t>(w)] = 1 + static_cast<long>(rng.below(16));
        total += weights[static_cast<std::size_t>(w)];
    }
    if (total == 0) {
        weights[0] = 1;
        total = 1;
    }
    std::vector<Rat> pmf(std::size_t{1} << n);
    for (std::uint64_t x = 0; x < pmf.size(); ++x) {
        int w = std::popcount(x);
        if (weights[static_cast<std::size_t>(w)] == 0) continue;
        pmf[x] = Rat(weights[static_cast<std::size_t>(w)]) /
                 (Rat(total) * Rat(binom(static_cast<unsigned long>(n), static_cast<unsigned long>(w))));
    }
    return Dist::exact_dense(n, std::move(pmf));
}

}  // namespace

VerificationReport verify_tv_identities(int trials, int n_max, std::uint64_t seed) {
    VerificationReport rep;
    rep.suite = "tv-identities";
    rep.range = "n <= " + std::to_string(n_max);
    SplitMix64 rng(seed);
    for (int t = 0; t < trials; ++t) {
        int n = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_max - 1)));
        Dist p = random_exact_dist(n, rng);
        Dist q = random_exact_dist(n, rng);
        Rat tv = tv_distance(p, q).exact;
        Rat gap = max_event_gap(p, q).exact;
        Rat overlap = coupling_overlap(p, q).exact;
        rep.checked += 3;
        if (gap != tv) rep.violations.push_back("gap != tv at trial " + std::to_string(t));
        if (overlap != Rat(1) - tv)
            rep.violations.push_back("overlap != 1 - tv at trial " + std::to_string(t));
        if (tv_distance(p, p).exact != 0)
            rep.violations.push_back("tv(p, p) != 0 at trial " + std::to_string(t));
    }
    return rep;
}

VerificationReport verify_distance_to_sym(int trials, int n_max, std::uint64_t seed) {
    VerificationReport rep;
    rep.suite = "distance-to-sym";
    rep.range = "n <= " + std::to_string(n_max);
    SplitMix64 rng(seed);
    for (int t = 0; t < trials; ++t) {
        int n = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_max - 1)));
        Dist a = random_exact_dist(n, rng);
        Dist b = random_symmetric_dist(n, rng);
        Rat tv_ab = tv_distance(a, b).exact;
        Rat tv_sym = tv_distance(a, symmetrize(a)).exact;
        Rat tv_w = tv_distance(weight_marginal(a), weight_marginal(b)).exact;
        rep.checked += 2;
        if (tv_ab > tv_sym + tv_w)
            rep.violations.push_back("upper direction fails at trial " + std::to_string(t));
        if (Rat(3) * tv_ab < tv_sym + tv_w)
            rep.violations.push_back("lower direction fails at trial " + std::to_string(t));
    }
    return rep;
}

VerificationReport verify_conditioning(int trials, int n_max, std::uint64_t seed) {
    VerificationReport rep;
    rep.suite = "conditioning";
    rep.range = "n <= " + std::to_string(n_max) + ", t <= 4";
    SplitMix64 rng(seed);
    for (int trial = 0; trial < trials; ++trial) {
        int n = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_max - 1)));
        int t = 2 + static_cast<int>(rng.below(3));
        Dist q = random_exact_dist(n, rng);
        std::vector<Dist> parts;
        for (int i = 0; i < t; ++i) {
            if (trial % 2) {
                parts.push_back(random_exact_dist(n, rng));
            } else {
                // concentrate away from q's support so the bound has teeth
                std::map<std::uint64_t, Rat> pmf;
                std::uint64_t key = rng.below(std::uint64_t{1} << n);
                pmf.emplace(key, Rat(1));
                parts.push_back(Dist::exact_sparse(n, std::move(pmf)));
            }
        }
        Rat eps = 0;
        for (const Dist& part : parts) eps = std::max(eps, Rat(1) - tv_distance(part, q).exact);
        std::vector<Rat> weights;
        Int total = 0;
        std::vector<long> raw;
        for (int i = 0; i < t; ++i) {
            raw.push_back(1 + static_cast<long>(rng.below(8)));
            total += raw.back();
        }
        for (long r : raw) weights.push_back(Rat(r) / Rat(total));
        Dist mixed = mixture(weights, parts);
        ++rep.checked;
        Rat lhs = tv_distance(mixed, q).exact;
        Rat rhs = Rat(1) - Rat(t + 1) * eps;
        track_slack(rep, to_double(lhs - rhs));
        if (lhs < rhs) rep.violations.push_back("trial " + std::to_string(trial));
    }
    return rep;
}

VerificationReport verify_product_lemma(int trials, int n_max, std::uint64_t seed) {
    VerificationReport rep;
    rep.suite = "product-lemma";
    rep.range = "n <= " + std::to_string(n_max) + ", S = [n]";
    SplitMix64 rng(seed);
    for (int trial = 0; trial < trials; ++trial) {
        int n = 4 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::max(1, n_max - 3))));
        std::vector<Rat> ps, ws;
        Rat eps;
        bool first = true;
        for (int i = 0; i < n; ++i) {
            // marginals pushed to opposite sides; per-coordinate tv = |p_i - w_i|
            Rat pi = Rat(6 + static_cast<long>(rng.below(2)), 8);  // 3/4 or 7/8
            Rat wi = Rat(1 + static_cast<long>(rng.below(2)), 8);  // 1/8 or 1/4
            ps.push_back(pi);
            ws.push_back(wi);
            Rat gap = rat_abs(pi - wi);
            if (first || gap < eps) eps = gap;
            first = false;
        }
        auto product_dist = [&](const std::vector<Rat>& probs) {
            std::vector<Rat> pmf(std::size_t{1} << n);
            for (std::uint64_t x = 0; x < pmf.size(); ++x) {
                Rat mass = 1;
                for (int i = 0; i < n; ++i)
                    mass *= (x >> i) & 1 ? probs[static_cast<std::size_t>(i)]
                                         : Rat(1) - probs[static_cast<std::size_t>(i)];
                pmf[x] = mass;
            }
            return Dist::exact_dense(n, std::move(pmf));
        };
        Dist p = product_dist(ps);
        Dist w = product_dist(ws);
        Dist q = w;
        if (trial % 2) {
            Dist r = random_exact_dist(n, rng);
            q = mixture({Rat(1, 2), Rat(1, 2)}, {w, r});
        }
        // eta = min_x W(x) / Q(x); finite since W is strictly positive
        Rat eta;
        bool efirst = true;
        q.for_each_exact([&](std::uint64_t x, const Rat& qmass) {
            Rat ratio = w.q(x) / qmass;
            if (efirst || ratio < eta) eta = ratio;
            efirst = false;
        });
        Rat lhs = tv_distance(p, q).exact;
        double rhs = 1.0 - 2.0 * std::exp(-to_double(eps * eps) * n / 2.0) / to_double(eta);
        ++rep.checked;
        track_slack(rep, to_double(lhs) - rhs);
        if (to_double(lhs) < rhs - 1e-12)
            rep.violations.push_back("trial " + std::to_string(trial));
    }
    return rep;
}

// ----------------------------------------------------- continuity / parity --

ContinuityReport continuity_report(const LocalFn& f, const std::vector<long>& deltas,
                                   const EngineOptions& engine) {
    ContinuityReport rep;
    rep.n = f.n();
    WDist w = weight_distribution(f, engine);
    for (long delta : deltas) {
        if (delta <= 0 || delta % 2)
            throw PreconditionError("continuity_report: deltas must be positive even integers");
        ContinuityRow row;
        row.delta = delta;
        for (long x = 0; x <= f.n(); ++x) {
            Rat b = x + delta <= f.n() ? w.q(static_cast<int>(x + delta)) : Rat(0);
            row.max_diff = std::max(row.max_diff, rat_abs(w.q(static_cast<int>(x)) - b));
        }
        row.normalized = to_double(row.max_diff) * f.n() / static_cast<double>(delta);
        rep.rows.push_back(row);
    }
    return rep;
}

nlohmann::json to_json(const ContinuityReport& rep) {
    nlohmann::json rows = nlohmann::json::array();
    for (const ContinuityRow& r : rep.rows)
        rows.push_back({{"delta", r.delta},
                        {"max_diff", rat_str(r.max_diff)},
                        {"max_diff_float", to_double(r.max_diff)},
                        {"normalized", r.normalized}});
    return {{"n", rep.n}, {"rows", rows}};
}

KolParityReport kolmogorov_parity_report(const WDist& p) {
    if (p.mode() != Mode::exact)
        throw PreconditionError("kolmogorov_parity_report: exact mode required");
    int n = p.n();
    if (n > 256) throw ResourceLimit("kolmogorov_parity_report: n too large for exact minimax");
    // a_t = Pr[p > t, even], c_t = Pr[p > t, odd], u_t = Pr[|U^n| > t]
    std::vector<Rat> a(static_cast<std::size_t>(n) + 2), c(a.size()), u(a.size());
    Rat pw = pow2(n);
    {
        Rat sa = 0, sc = 0, su = 0;
        for (int t = n - 1; t >= -1; --t) {
            int w = t + 1;
            if (w % 2 == 0)
                sa += p.q(w);
            else
                sc += p.q(w);
            su += Rat(binom(static_cast<unsigned long>(n), static_cast<unsigned long>(w))) / pw;
            a[static_cast<std::size_t>(t + 1)] = sa;
            c[static_cast<std::size_t>(t + 1)] = sc;
            u[static_cast<std::size_t>(t + 1)] = su;
        }
    }
    // deviations are max_t |a_t - eta u_t| and max_t |c_t - (1-eta) u_t|;
    // both are maxima of lines in eta
    struct Line {
        Rat c0, c1;
    };
    std::vector<Line> even_lines, odd_lines;
    for (std::size_t i = 0; i < a.size(); ++i) {
        even_lines.push_back({a[i], -u[i]});
        even_lines.push_back({-a[i], u[i]});
        odd_lines.push_back({c[i] - u[i], u[i]});
        odd_lines.push_back({u[i] - c[i], -u[i]});
    }
    std::vector<Line> all = even_lines;
    all.insert(all.end(), odd_lines.begin(), odd_lines.end());
    auto env = [](const std::vector<Line>& lines, const Rat& eta) {
        Rat best;
        bool first = true;
        for (const Line& l : lines) {
            Rat v = l.c0 + l.c1 * eta;
            if (first || v > best) best = v;
            first = false;
        }
        return best;
    };
    std::vector<Rat> candidates{Rat(0), Rat(1)};
    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = i + 1; j < all.size(); ++j) {
            if (all[i].c1 == all[j].c1) continue;
            if ((all[i].c1 > 0) == (all[j].c1 > 0) && all[i].c1 != 0 && all[j].c1 != 0) continue;
            Rat eta = (all[j].c0 - all[i].c0) / (all[i].c1 - all[j].c1);
            if (eta >= 0 && eta <= 1) candidates.push_back(eta);
        }
    KolParityReport rep;
    bool first = true;
    for (const Rat& eta : candidates) {
        Rat obj = std::max(env(even_lines, eta), env(odd_lines, eta));
        if (first || obj < rep.objective || (obj == rep.objective && eta < rep.eta)) {
            rep.eta = eta;
            rep.objective = obj;
            first = false;
        }
    }
    rep.max_even_dev = env(even_lines, rep.eta);
    rep.max_odd_dev = env(odd_lines, rep.eta);
    return rep;
}

nlohmann::json to_json(const KolParityReport& rep) {
    return {{"eta", rat_str(rep.eta)},
            {"eta_float", to_double(rep.eta)},
            {"max_even_dev", rat_str(rep.max_even_dev)},
            {"max_even_dev_float", to_double(rep.max_even_dev)},
            {"max_odd_dev", rat_str(rep.max_odd_dev)},
            {"max_odd_dev_float", to_double(rep.max_odd_dev)},
            {"objective", rat_str(rep.objective)}};
}

}  // namespace lsl
