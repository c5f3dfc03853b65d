#pragma once

#include <cstdint>

namespace lsl {

// splitmix64: the fixed generator used for all randomized runs. The algorithm
// identifier "splitmix64" is embedded in report headers so runs can be
// reproduced elsewhere. split() derives an independent stream, which is how
// sharded work stays deterministic regardless of thread count.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Unbiased value in [0, bound).
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) return 0;
        std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
        std::uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % bound;
    }

    bool coin() { return next() >> 63; }

    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    SplitMix64 split() { return SplitMix64(next()); }

    static constexpr const char* kAlgorithm = "splitmix64";

  private:
    std::uint64_t state_;
};

}  // namespace lsl
