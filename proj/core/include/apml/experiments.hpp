#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "apml/bdm.hpp"
#include "apml/ctm.hpp"
#include "apml/optimizer.hpp"

namespace apml {

struct HvBdmPoint {
  int bias;           // expected number of 1s in the 20-bit strings
  double bdm_norm;    // normalized mean (1+BDM(X|Y)) / (1+BDM(X|Z))
  double entropy_norm;
};

// Related-pair vs random-pair conditional complexity across 19 biased
// distributions, partition size 1. Curves are normalized by their maxima.
std::vector<HvBdmPoint> entropy_vs_bdm(const CtmTable& table, uint64_t seed,
                                       int pairs_per_bias = 50);

struct PartitionSweepPoint {
  std::string distribution;
  int size;                // block length
  double mean_normalized;  // mean conditional BDM over the partition size (block count)
};

// Mean conditional BDM between 20-bit same-distribution pairs under
// partition sizes 1..20, for four bit-bias levels.
std::vector<PartitionSweepPoint> partition_sweep(const CtmTable& table, uint64_t seed,
                                                 int pairs_per_point = 3000);

struct SurfaceOptions {
  int n_points = 20;
  uint64_t random_pool = 5000;
  CostAggregation aggregation = CostAggregation::sum_sq;
  PartitionStrategy strategy = PartitionStrategy::vector_blocks(3);
};

struct SurfaceResult {
  // One row per (s1, s2) grid point over the full 8+8 bit space.
  std::vector<std::tuple<double, double, double>> grid;
  double cost_at_truth = 0.0;
  double fraction_not_below_truth = 0.0;  // grid points with cost >= truth's
  double best_grid_cost = 0.0;
  std::pair<double, double> best_grid_point;
  double best_random_cost = 0.0;
  double best_search_cost = 0.0;
  uint64_t search_iterations = 0;
  double best_descent_cost = 0.0;
  uint64_t descent_steps = 0;
  double adjacent_delta_mean = 0.0;    // non-smoothness statistics over the grid
  double adjacent_delta_stddev = 0.0;
};

// Bilinear regression demo: data from y = (2/3)a + (1/3)b, candidates are
// two 8-fractional-bit coefficients, loss is the conditional BDM between
// encoded outputs at partition size 3. Also runs the three-way strategy
// comparison (complexity-ordered search, random pool, grid-local descent).
SurfaceResult regression_surface(const CtmTable& table, uint64_t seed,
                                 const SurfaceOptions& opts = {});

}  // namespace apml
