#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "apml/bdm.hpp"
#include "apml/ctm.hpp"
#include "apml/tensor.hpp"

namespace apml {

class CondCtmTable;

// Fully enumerable space of bit-string candidates.
struct ParameterSpace {
  int bit_width = 0;
  int enumeration_cap_bits = 20;
};

struct CostFunction {
  std::function<double(const BinaryTensor&)> eval;
  std::string description;

  double operator()(const BinaryTensor& candidate) const { return eval(candidate); }
};

// All bit patterns of the space sorted by ascending BDM, ties broken by
// numeric (lexicographic bit) order. The strategy must use single-row
// blocks of at most 12 columns.
std::vector<uint64_t> complexity_order(const ParameterSpace& space, const CtmTable& table,
                                       const PartitionStrategy& strategy);

// Rank of one pattern under the same ordering (0-based).
uint64_t complexity_rank(uint64_t pattern, int bit_width, const CtmTable& table,
                         const PartitionStrategy& strategy);

struct SearchStop {
  std::optional<uint64_t> max_iters;
  std::optional<double> target_cost;
};

struct TraceRow {
  uint64_t rank;
  std::string candidate_bits;
  double cost;
  bool is_new_min;
};

struct SearchResult {
  BinaryTensor best;
  double best_cost = 0.0;
  uint64_t iterations = 0;
  std::vector<TraceRow> trace;  // filled only when requested
};

// Algorithm: walk candidates from least to most complex, keep the running
// minimum, stop on target cost or iteration budget.
SearchResult algorithmic_search(const ParameterSpace& space, const CostFunction& cost,
                                const CtmTable& table, const PartitionStrategy& strategy,
                                const SearchStop& stop, bool keep_trace = false);

// J + lambda * BDM(candidate).
CostFunction regularized(const CostFunction& cost, double lambda, const CtmTable& table,
                         const PartitionStrategy& strategy);

enum class CostAggregation { sum_sq, sum };

// Sum over samples of d(target | predicted)^p. `predict` maps a candidate
// and a sample index to the predicted tensor; `target` yields the expected
// tensor; `distance` is the per-sample conditional complexity.
CostFunction algorithmic_cost(
    std::function<BinaryTensor(const BinaryTensor&, size_t)> predict,
    std::function<const BinaryTensor&(size_t)> target, size_t n_samples,
    std::function<double(const BinaryTensor&, const BinaryTensor&)> distance,
    CostAggregation aggregation, std::string description);

// Lazily yields the patterns of a block region in the same (BDM, numeric)
// order that complexity_order produces, without materializing the space.
// The region is decomposed into `slots` blocks of `block_bits` bits each;
// a pattern is the slot-wise concatenation.
class OrderedPatternStream {
 public:
  OrderedPatternStream(int slots, int block_bits, const CtmTable& table);
  ~OrderedPatternStream();
  OrderedPatternStream(OrderedPatternStream&&) noexcept;

  // Next pattern as slot-wise block values, or nullopt when exhausted.
  std::optional<std::vector<uint16_t>> next();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct BlockRegion {
  int row = 0, col = 0, rows = 0, cols = 0;
  int bit_count() const { return rows * cols; }
};

// Upper-left, upper-right, lower-left, lower-right halves.
std::vector<BlockRegion> quadrant_schedule(int rows, int cols);

struct GreedyOptions {
  uint64_t candidate_budget = 100000;  // per region when streaming
  int exhaustive_cap_bits = 20;
};

struct GreedyResult {
  BinaryTensor model;
  double cost = 0.0;
  std::vector<double> step_costs;
  uint64_t candidates_evaluated = 0;
  uint64_t candidate_budget = 0;
};

// Starts from the all-zeros tensor; for each region in the schedule,
// replaces the region content with the cost arg-min over candidates taken
// in complexity order (exhaustive for small regions, streamed with the
// candidate budget otherwise). The cost never increases across steps.
GreedyResult greedy_block_optimize(int rows, int cols,
                                   const std::vector<BlockRegion>& schedule,
                                   const CostFunction& cost, const CtmTable& table,
                                   const PartitionStrategy& strategy,
                                   const GreedyOptions& opts = {});

}  // namespace apml
