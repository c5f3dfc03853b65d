#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lsl {

using Int = mpz_class;
using Rat = mpq_class;

inline Int binom(unsigned long n, unsigned long k) {
    Int r;
    mpz_bin_uiui(r.get_mpz_t(), n, k);
    return r;
}

// 2^e as an exact rational, e may be negative.
inline Rat pow2(long e) {
    Rat r;
    if (e >= 0) {
        mpz_ui_pow_ui(r.get_num().get_mpz_t(), 2, static_cast<unsigned long>(e));
    } else {
        mpz_ui_pow_ui(r.get_den().get_mpz_t(), 2, static_cast<unsigned long>(-e));
    }
    return r;
}

inline Rat rat_pow(const Rat& base, unsigned long e) {
    Rat r;
    mpz_pow_ui(r.get_num().get_mpz_t(), base.get_num().get_mpz_t(), e);
    mpz_pow_ui(r.get_den().get_mpz_t(), base.get_den().get_mpz_t(), e);
    r.canonicalize();
    return r;
}

inline Rat rat_abs(const Rat& x) { return x < 0 ? Rat(-x) : x; }

inline double to_double(const Rat& x) { return x.get_d(); }

// Floor of a nonnegative rational as a machine integer.
inline long rat_floor(const Rat& x) {
    Int q = x.get_num() / x.get_den();  // truncates toward zero; x >= 0 assumed
    if (!q.fits_slong_p()) throw std::overflow_error("rat_floor: value too large");
    return q.get_si();
}

// "num/den" (canonical, den > 0); integers render without the "/1".
inline std::string rat_str(const Rat& x) {
    Rat c = x;
    c.canonicalize();
    if (c.get_den() == 1) return c.get_num().get_str();
    return c.get_num().get_str() + "/" + c.get_den().get_str();
}

inline Rat rat_parse(const std::string& s) {
    Rat r;
    if (r.set_str(s, 10) != 0) throw std::invalid_argument("bad rational: " + s);
    r.canonicalize();
    if (r.get_den() <= 0) throw std::invalid_argument("bad rational: " + s);
    return r;
}

}  // namespace lsl
