#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "apml/bdm.hpp"
#include "apml/ctm.hpp"
#include "apml/optimizer.hpp"
#include "apml/tensor.hpp"

namespace apml {

// Two-species production/decay system from z(0) = (1, 0):
//   dz1/dt = -theta1 * z1
//   dz2/dt =  theta1 * z1 - theta2 * z2
// integrated with classical fixed-step RK4, h = 0.001.
std::pair<double, double> ode_simulate(double theta1, double theta2, double t);

// 16-bit parameter encoding: theta1 in the first 8 bits, theta2 in the
// last 8; within 8 bits the first 4 are the integer part, the last 4 the
// fractional part.
BinaryTensor encode_theta(double theta1, double theta2);
std::pair<double, double> decode_theta(const BinaryTensor& bits);

// State-pair encoding: 8 fractional bits per state, truncated, z1 first.
// States must lie in [0,1).
BinaryTensor encode_output(double z1, double z2);
std::pair<double, double> decode_output(const BinaryTensor& bits);
// Single value helper (also used by the regression surface demo).
uint8_t encode_fraction8(double z);

struct OdeSample {
  double t;
  double z1, z2;
};

struct OdeFitOptions {
  PartitionStrategy strategy = PartitionStrategy::vector_blocks(4);
  CostAggregation aggregation = CostAggregation::sum_sq;
  SearchStop stop;  // default: full space with target cost 0
  bool keep_trace = false;
};

struct OdeFitResult {
  double theta1 = 0.0, theta2 = 0.0;
  BinaryTensor encoding;
  double best_cost = 0.0;
  uint64_t iterations = 0;
  uint64_t clamped_states = 0;  // states clipped into [0, 1-2^-8) before encoding
  std::vector<TraceRow> trace;
};

// Complexity-ordered sweep of the 2^16 encodings; per-sample loss is the
// coarse conditional BDM between the observed and simulated encoded
// outputs.
OdeFitResult ode_fit(const std::vector<OdeSample>& samples, const CtmTable& table,
                     const OdeFitOptions& opts = {});

struct NoiseOptions {
  std::vector<int> set_sizes = {5, 7, 10};
  std::vector<int> flip_counts = {1, 2, 3, 4, 5, 6, 7, 8};
  int reps = 10;
  uint64_t seed = 1;
  PartitionStrategy strategy = PartitionStrategy::vector_blocks(4);
  CostAggregation aggregation = CostAggregation::sum_sq;
};

struct NoiseCell {
  int set_size = 0;
  int flips = 0;
  double mean_distance = 0.0;  // Euclidean distance of theta-hat from (5,1)
};

// Bit-flip robustness sweep: samples drawn from the 0.05 time grid, the
// encoded outputs corrupted by flipping distinct bit positions, then
// refitted; distances to the hidden parameters are averaged over reps.
std::vector<NoiseCell> ode_noise_experiment(const CtmTable& table,
                                            const NoiseOptions& opts = {});

}  // namespace apml
