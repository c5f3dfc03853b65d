#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsl/localfn.hpp"

#include <json.hpp>

namespace lsl {

// Dependency view of a local function: one vertex per output bit, one edge
// per input bit containing the outputs that input feeds. Inputs feeding
// nothing are dropped. Locality d means every vertex lies in at most d edges.
struct DepHypergraph {
    int n = 0;
    std::vector<std::vector<int>> edges;  // sorted vertex lists, nonempty
    std::vector<int> edge_input;          // edge -> originating input index

    int max_degree() const;
};

DepHypergraph from_localfn(const LocalFn& f);

// I(v): vertices sharing an edge with v, plus v itself. Computed over the
// edges not flagged in `removed` (empty mask = whole graph).
std::vector<int> closed_neighborhood(const DepHypergraph& g, int v,
                                     const std::vector<bool>& removed = {});
// N(v) = { u : I(u) and I(v) intersect }.
std::vector<int> neighborhood(const DepHypergraph& g, int v,
                              const std::vector<bool>& removed = {});

struct NeighborhoodSelection {
    int t = 0;
    std::vector<int> removed_edge_ids;  // indices into g.edges
    std::vector<int> removed_inputs;    // matching original input indices
    std::vector<int> centers;
    std::vector<std::vector<int>> neighborhoods;  // I(center) in G \ S
    bool ok = false;        // false: budget exhausted with zero centers
    bool verified = false;  // from-scratch invariant re-verification
    std::string note;
};

// Greedy selection: repeatedly take the candidate v minimizing |N(v)|
// (smallest index on ties); accept it when |I(v)| <= t and drop N(N(v)) from
// candidacy, otherwise remove v's largest incident edge while the budget
// lasts. The achieved (r, |S|) pair is reported, never asserted against any
// quality bound.
NeighborhoodSelection find_independent_neighborhoods(const DepHypergraph& g, int t,
                                                     int edge_budget);

// From-scratch re-check of the selection invariants: centers distinct, each
// recorded neighborhood equals I(center) in G \ S with size <= t, and no
// surviving edge meets two distinct neighborhoods.
bool verify_selection(const DepHypergraph& g, const NeighborhoodSelection& sel);

nlohmann::json to_json(const NeighborhoodSelection& sel);

struct IndependenceReport {
    bool pass = true;
    std::uint64_t subcubes_checked = 0;
    std::uint64_t joint_checks = 0;   // exact joint-vs-product comparisons
    std::uint64_t blocks_checked = 0;
    std::vector<std::string> violations;
};

// For sampled assignments of the removed inputs, restricts f and verifies
// that the selected neighborhoods are mutually independent: their feeding
// input sets must be pairwise disjoint (checked from scratch), and the exact
// joint distribution over budget-sized groups of adjacent blocks must equal
// the product of the block marginals.
IndependenceReport conditional_independence_check(const LocalFn& f,
                                                  const NeighborhoodSelection& sel,
                                                  int subcube_samples, std::uint64_t seed,
                                                  int joint_input_budget = 16);

nlohmann::json to_json(const IndependenceReport& rep);

}  // namespace lsl
