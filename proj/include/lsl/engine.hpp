#pragma once

#include "lsl/dist.hpp"
#include "lsl/localfn.hpp"

namespace lsl {

enum class Engine { automatic, naive, frontier };

struct EngineOptions {
    Engine engine = Engine::automatic;
    // naive engine: full 2^m enumeration cap
    int naive_input_budget = 26;
    // frontier engine: per-component enumeration cap before the elimination
    // DP kicks in, and the max number of simultaneously live inputs there
    int component_input_budget = 22;
    int frontier_width_budget = 26;
    // string-level support cap when multiplying component distributions
    std::size_t support_budget = std::size_t{1} << 24;
    int threads = 0;  // 0 -> default_threads()
};

// Exact output distribution of f on uniform inputs; dyadic masses with
// denominator 2^m. Both engines agree exactly; automatic tries the frontier
// engine first and falls back to naive enumeration.
Dist output_distribution(const LocalFn& f, const EngineOptions& opts = {});

// Exact distribution of the output Hamming weight. The frontier engine
// handles structured functions (bounded elimination width) far beyond the
// naive 2^m limit.
WDist weight_distribution(const LocalFn& f, const EngineOptions& opts = {});

}  // namespace lsl
