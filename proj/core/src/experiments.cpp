#include "apml/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "apml/ode.hpp"
#include "apml/parallel.hpp"
#include "apml/rng.hpp"

namespace apml {

namespace {

BinaryTensor biased_row(Rng& rng, int width, double p) {
  BinaryTensor t(1, width);
  for (int i = 0; i < width; ++i) t.set(0, i, rand_bool(rng, p) ? 1 : 0);
  return t;
}

}  // namespace

std::vector<HvBdmPoint> entropy_vs_bdm(const CtmTable& table, uint64_t seed,
                                       int pairs_per_bias) {
  if (pairs_per_bias < 1) throw std::invalid_argument("pairs_per_bias must be >= 1");
  const int width = 20;
  const PartitionStrategy s = PartitionStrategy::vector_blocks(1);
  std::vector<HvBdmPoint> points(19);

  parallel_chunks(19, [&](size_t begin, size_t end, size_t) {
    for (size_t bi = begin; bi < end; ++bi) {
      const int bias = static_cast<int>(bi) + 1;
      const double p = bias / 20.0;
      double bdm_sum = 0.0, entropy_sum = 0.0;
      Rng rng = sub_rng(seed, 0x48BD + bias);
      for (int i = 0; i < pairs_per_bias; ++i) {
        const BinaryTensor x = biased_row(rng, width, p);
        const BinaryTensor y = biased_row(rng, width, p);
        const BinaryTensor z = biased_row(rng, width, 0.5);
        // The +1 guards keep the denominators away from zero.
        bdm_sum += (1.0 + cond_bdm_coarse(x, y, table, s)) /
                   (1.0 + cond_bdm_coarse(x, z, table, s));
        entropy_sum += (1.0 + cond_entropy(x, y, s)) / (1.0 + cond_entropy(x, z, s));
      }
      points[bi] = {bias, bdm_sum / pairs_per_bias, entropy_sum / pairs_per_bias};
    }
  });

  double max_bdm = 0.0, max_entropy = 0.0;
  for (const auto& pt : points) {
    max_bdm = std::max(max_bdm, pt.bdm_norm);
    max_entropy = std::max(max_entropy, pt.entropy_norm);
  }
  for (auto& pt : points) {
    pt.bdm_norm /= max_bdm;
    pt.entropy_norm /= max_entropy;
  }
  return points;
}

std::vector<PartitionSweepPoint> partition_sweep(const CtmTable& table, uint64_t seed,
                                                 int pairs_per_point) {
  if (pairs_per_point < 1) throw std::invalid_argument("pairs_per_point must be >= 1");
  const int width = 20;
  const std::vector<std::pair<std::string, double>> distributions = {
      {"uniform", 0.5}, {"3/20", 0.15}, {"5/20", 0.25}, {"7/20", 0.35}};

  std::vector<PartitionSweepPoint> points;
  for (const auto& [name, p] : distributions)
    for (int size = 1; size <= width; ++size) points.push_back({name, size, 0.0});

  parallel_chunks(points.size(), [&](size_t begin, size_t end, size_t) {
    for (size_t pi = begin; pi < end; ++pi) {
      auto& pt = points[pi];
      const double p =
          pt.distribution == "uniform" ? 0.5
          : pt.distribution == "3/20"  ? 0.15
          : pt.distribution == "5/20"  ? 0.25
                                       : 0.35;
      // Pairs are seeded per distribution so every size sees the same pairs.
      Rng rng = sub_rng(seed, 0x9A27 + static_cast<uint64_t>(p * 1000));
      const PartitionStrategy s = PartitionStrategy::vector_blocks(pt.size);
      // Normalizer: the size of the partition, i.e. its block count.
      const double n_blocks = width / pt.size;
      double sum = 0.0;
      for (int i = 0; i < pairs_per_point; ++i) {
        const BinaryTensor x = biased_row(rng, width, p);
        const BinaryTensor y = biased_row(rng, width, p);
        sum += cond_bdm_coarse(x, y, table, s) / n_blocks;
      }
      pt.mean_normalized = sum / pairs_per_point;
    }
  });
  return points;
}

SurfaceResult regression_surface(const CtmTable& table, uint64_t seed,
                                 const SurfaceOptions& opts) {
  const double s1_true = 2.0 / 3.0, s2_true = 1.0 / 3.0;
  Rng rng = sub_rng(seed, 0x5F4C);
  std::vector<std::pair<double, double>> inputs;
  std::vector<uint8_t> target_enc;
  for (int i = 0; i < opts.n_points; ++i) {
    const double a = rand_unit(rng), b = rand_unit(rng);
    inputs.emplace_back(a, b);
    target_enc.push_back(encode_fraction8(s1_true * a + s2_true * b));
  }

  const auto strategy = opts.strategy;
  auto encoded_distance = [&](uint8_t x, uint8_t y) {
    return cond_bdm_coarse(uint_to_bits(x, 8), uint_to_bits(y, 8), table, strategy);
  };
  auto cost_at = [&](uint16_t cand) {
    const double s1 = static_cast<double>(cand >> 8) / 256.0;
    const double s2 = static_cast<double>(cand & 0xff) / 256.0;
    double sum = 0.0;
    for (size_t i = 0; i < inputs.size(); ++i) {
      double y = s1 * inputs[i].first + s2 * inputs[i].second;
      if (y > 1.0 - 1.0 / 256.0) y = 1.0 - 1.0 / 256.0;
      const double d = encoded_distance(target_enc[i], encode_fraction8(y));
      sum += opts.aggregation == CostAggregation::sum_sq ? d * d : d;
    }
    return sum;
  };

  SurfaceResult result;
  const size_t n = size_t{1} << 16;
  std::vector<double> costs(n);
  parallel_chunks(n, [&](size_t begin, size_t end, size_t) {
    for (size_t v = begin; v < end; ++v) costs[v] = cost_at(static_cast<uint16_t>(v));
  });

  result.grid.reserve(n);
  size_t best_v = 0;
  for (size_t v = 0; v < n; ++v) {
    result.grid.emplace_back(static_cast<double>(v >> 8) / 256.0,
                             static_cast<double>(v & 0xff) / 256.0, costs[v]);
    if (costs[v] < costs[best_v]) best_v = v;
  }
  result.best_grid_cost = costs[best_v];
  result.best_grid_point = {static_cast<double>(best_v >> 8) / 256.0,
                            static_cast<double>(best_v & 0xff) / 256.0};

  // 0.10101011 and 0.01010101: the 8-bit points nearest the coefficients.
  const uint16_t truth = (0b10101011 << 8) | 0b01010101;
  result.cost_at_truth = costs[truth];
  size_t not_below = 0;
  for (size_t v = 0; v < n; ++v)
    if (costs[v] >= result.cost_at_truth) ++not_below;
  result.fraction_not_below_truth = static_cast<double>(not_below) / static_cast<double>(n);

  // Random pooling baseline.
  Rng pool_rng = sub_rng(seed, 0xF001);
  result.best_random_cost = std::numeric_limits<double>::infinity();
  for (uint64_t i = 0; i < opts.random_pool; ++i) {
    const auto v = static_cast<uint16_t>(rand_below(pool_rng, n));
    result.best_random_cost = std::min(result.best_random_cost, costs[v]);
  }

  // Complexity-ordered search to the best grid cost.
  ParameterSpace space{16, 16};
  auto order = complexity_order(space, table, strategy);
  result.best_search_cost = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < order.size(); ++i) {
    if (costs[order[i]] < result.best_search_cost) {
      result.best_search_cost = costs[order[i]];
      result.search_iterations = i + 1;
    }
    if (result.best_search_cost <= result.best_grid_cost) break;
  }

  // Grid-local descent from a seeded start: greedy over the 4-neighborhood.
  Rng descent_rng = sub_rng(seed, 0xDE5C);
  uint16_t at = static_cast<uint16_t>(rand_below(descent_rng, n));
  while (true) {
    const int s1 = at >> 8, s2 = at & 0xff;
    uint16_t best_nb = at;
    double best_cost = costs[at];
    const int moves[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& mv : moves) {
      const int n1 = s1 + mv[0], n2 = s2 + mv[1];
      if (n1 < 0 || n1 > 255 || n2 < 0 || n2 > 255) continue;
      const auto cand = static_cast<uint16_t>((n1 << 8) | n2);
      if (costs[cand] < best_cost) {
        best_cost = costs[cand];
        best_nb = cand;
      }
    }
    if (best_nb == at) break;
    at = best_nb;
    ++result.descent_steps;
  }
  result.best_descent_cost = costs[at];

  // Non-smoothness: first differences along the s2 axis.
  double sum = 0.0, sum_sq = 0.0;
  size_t count = 0;
  for (size_t v = 0; v + 1 < n; ++v) {
    if ((v & 0xff) == 0xff) continue;  // row boundary
    const double delta = std::abs(costs[v + 1] - costs[v]);
    sum += delta;
    sum_sq += delta * delta;
    ++count;
  }
  result.adjacent_delta_mean = sum / static_cast<double>(count);
  result.adjacent_delta_stddev = std::sqrt(
      std::max(0.0, sum_sq / static_cast<double>(count) -
                        result.adjacent_delta_mean * result.adjacent_delta_mean));
  return result;
}

}  // namespace apml
