#include "apml/ode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "apml/parallel.hpp"
#include "apml/rng.hpp"

namespace apml {

namespace {

constexpr double kStep = 0.001;
constexpr double kMaxEncodable = 1.0 - 1.0 / 256.0;

struct State {
  double z1, z2;
};

State derivative(double theta1, double theta2, const State& s) {
  return {-theta1 * s.z1, theta1 * s.z1 - theta2 * s.z2};
}

State rk4_step(double theta1, double theta2, const State& s, double h) {
  const State k1 = derivative(theta1, theta2, s);
  const State k2 = derivative(theta1, theta2, {s.z1 + h / 2 * k1.z1, s.z2 + h / 2 * k1.z2});
  const State k3 = derivative(theta1, theta2, {s.z1 + h / 2 * k2.z1, s.z2 + h / 2 * k2.z2});
  const State k4 = derivative(theta1, theta2, {s.z1 + h * k3.z1, s.z2 + h * k3.z2});
  return {s.z1 + h / 6 * (k1.z1 + 2 * k2.z1 + 2 * k3.z1 + k4.z1),
          s.z2 + h / 6 * (k1.z2 + 2 * k2.z2 + 2 * k3.z2 + k4.z2)};
}

// Integrates from 0, invoking visit(index) as each requested time is
// reached. `times` must be ascending.
template <typename Visit>
void integrate_at(double theta1, double theta2, const std::vector<double>& times,
                  Visit&& visit) {
  State s{1.0, 0.0};
  double t = 0.0;
  for (size_t i = 0; i < times.size(); ++i) {
    const double target = times[i];
    if (target < t - 1e-12) throw std::invalid_argument("times must be ascending");
    while (target - t > kStep * (1 + 1e-9)) {
      s = rk4_step(theta1, theta2, s, kStep);
      t += kStep;
    }
    const double rem = target - t;
    if (rem > 1e-12) {
      s = rk4_step(theta1, theta2, s, rem);
      t = target;
    }
    visit(i, s.z1, s.z2);
  }
}

}  // namespace

std::pair<double, double> ode_simulate(double theta1, double theta2, double t) {
  if (t < 0.0 || t > 1.0) throw std::invalid_argument("t must be in [0,1]");
  if (theta1 < 0.0 || theta2 < 0.0) throw std::invalid_argument("thetas must be >= 0");
  std::pair<double, double> out{1.0, 0.0};
  if (t == 0.0) return out;
  integrate_at(theta1, theta2, {t}, [&](size_t, double z1, double z2) {
    out = {z1, z2};
  });
  return out;
}

BinaryTensor encode_theta(double theta1, double theta2) {
  auto encode8 = [](double v) {
    const double scaled = v * 16.0;
    const auto q = static_cast<int64_t>(std::llround(scaled));
    if (std::abs(scaled - static_cast<double>(q)) > 1e-9 || q < 0 || q > 255)
      throw std::invalid_argument("theta not representable in 4.4 fixed point");
    return static_cast<uint64_t>(q);
  };
  return uint_to_bits((encode8(theta1) << 8) | encode8(theta2), 16);
}

std::pair<double, double> decode_theta(const BinaryTensor& bits) {
  if (!bits.is_vector() || bits.cols() != 16)
    throw std::invalid_argument("theta encoding must be 16 bits");
  const uint64_t v = bits_to_uint(bits);
  return {static_cast<double>(v >> 8) / 16.0, static_cast<double>(v & 0xff) / 16.0};
}

uint8_t encode_fraction8(double z) {
  if (z < 0.0 || z >= 1.0) throw std::invalid_argument("state out of [0,1)");
  return static_cast<uint8_t>(z * 256.0);  // truncation
}

BinaryTensor encode_output(double z1, double z2) {
  return uint_to_bits((static_cast<uint64_t>(encode_fraction8(z1)) << 8) |
                          encode_fraction8(z2),
                      16);
}

std::pair<double, double> decode_output(const BinaryTensor& bits) {
  if (!bits.is_vector() || bits.cols() != 16)
    throw std::invalid_argument("output encoding must be 16 bits");
  const uint64_t v = bits_to_uint(bits);
  return {static_cast<double>(v >> 8) / 256.0, static_cast<double>(v & 0xff) / 256.0};
}

namespace {

// Coarse conditional BDM between two 16-bit encodings under (1,4) blocks,
// via nibble counting. Term order matches the generic map-based formula.
struct Enc16Distance {
  double ctm4[16];
  explicit Enc16Distance(const CtmTable& table) {
    for (int v = 0; v < 16; ++v) {
      std::string key(4, '0');
      for (int i = 0; i < 4; ++i) key[3 - i] = ((v >> i) & 1) ? '1' : '0';
      ctm4[v] = table.value(key);
    }
  }
  double operator()(uint16_t x, uint16_t y) const {
    uint8_t cx[16] = {0}, cy[16] = {0};
    for (int s = 0; s < 4; ++s) {
      ++cx[(x >> (12 - 4 * s)) & 0xf];
      ++cy[(y >> (12 - 4 * s)) & 0xf];
    }
    double sum = 0.0;
    for (int v = 0; v < 16; ++v) {
      if (cx[v] == 0) continue;
      if (cy[v] == 0)
        sum += ctm4[v] + std::log2(static_cast<double>(cx[v]));
      else if (cx[v] != cy[v])
        sum += std::log2(static_cast<double>(cx[v]));
    }
    return sum;
  }
};

uint64_t clamp_encode(double z1, double z2, uint64_t& clamped) {
  auto clamp1 = [&clamped](double z) {
    if (z < 0.0) {
      ++clamped;
      return 0.0;
    }
    if (z > kMaxEncodable) {
      ++clamped;
      return kMaxEncodable;
    }
    return z;
  };
  const double a = clamp1(z1), b = clamp1(z2);
  return (static_cast<uint64_t>(encode_fraction8(a)) << 8) | encode_fraction8(b);
}

}  // namespace

OdeFitResult ode_fit(const std::vector<OdeSample>& samples, const CtmTable& table,
                     const OdeFitOptions& opts) {
  if (samples.empty()) throw std::invalid_argument("at least one sample required");
  if (opts.strategy.block_rows != 1 || opts.strategy.block_cols != 4)
    throw std::invalid_argument("ode fit uses (1,4) blocks over 16-bit encodings");

  std::vector<size_t> order_by_t(samples.size());
  for (size_t i = 0; i < order_by_t.size(); ++i) order_by_t[i] = i;
  std::sort(order_by_t.begin(), order_by_t.end(),
            [&](size_t a, size_t b) { return samples[a].t < samples[b].t; });
  std::vector<double> times;
  for (size_t i : order_by_t) times.push_back(samples[i].t);

  OdeFitResult result;
  std::vector<uint16_t> sample_enc(samples.size());
  for (size_t i = 0; i < samples.size(); ++i)
    sample_enc[i] =
        static_cast<uint16_t>(clamp_encode(samples[i].z1, samples[i].z2,
                                           result.clamped_states));

  Enc16Distance distance(table);
  uint64_t clamped = 0;
  CostFunction cost{
      [&](const BinaryTensor& candidate) {
        auto [t1, t2] = decode_theta(candidate);
        std::vector<uint16_t> sim_enc(samples.size());
        integrate_at(t1, t2, times, [&](size_t pos, double z1, double z2) {
          sim_enc[order_by_t[pos]] = static_cast<uint16_t>(clamp_encode(z1, z2, clamped));
        });
        double sum = 0.0;
        for (size_t i = 0; i < samples.size(); ++i) {
          const double d = distance(sample_enc[i], sim_enc[i]);
          sum += opts.aggregation == CostAggregation::sum_sq ? d * d : d;
        }
        return sum;
      },
      "sum cond BDM between encoded outputs"};

  SearchStop stop = opts.stop;
  if (!stop.max_iters && !stop.target_cost) {
    stop.max_iters = uint64_t{1} << 16;
    stop.target_cost = 0.0;
  }
  ParameterSpace space{16, 16};
  SearchResult search =
      algorithmic_search(space, cost, table, opts.strategy, stop, opts.keep_trace);
  result.encoding = search.best;
  result.best_cost = search.best_cost;
  result.iterations = search.iterations;
  result.trace = std::move(search.trace);
  std::tie(result.theta1, result.theta2) = decode_theta(result.encoding);
  result.clamped_states += clamped;
  return result;
}

std::vector<NoiseCell> ode_noise_experiment(const CtmTable& table,
                                            const NoiseOptions& opts) {
  // Time grid {0.05, 0.10, ..., 1.00}.
  std::vector<double> grid;
  for (int g = 1; g <= 20; ++g) grid.push_back(g * 0.05);

  // Simulated encodings for every candidate at every grid time, shared by
  // all cells of the experiment.
  const size_t n_candidates = size_t{1} << 16;
  std::vector<uint16_t> sim(n_candidates * grid.size());
  std::vector<uint64_t> clamp_counts(static_cast<size_t>(worker_count()), 0);
  parallel_chunks(n_candidates, [&](size_t begin, size_t end, size_t chunk) {
    uint64_t clamped = 0;
    for (size_t v = begin; v < end; ++v) {
      auto [t1, t2] = decode_theta(uint_to_bits(v, 16));
      integrate_at(t1, t2, grid, [&](size_t g, double z1, double z2) {
        sim[v * grid.size() + g] = static_cast<uint16_t>(clamp_encode(z1, z2, clamped));
      });
    }
    clamp_counts[chunk] += clamped;
  });

  ParameterSpace space{16, 16};
  const std::vector<uint64_t> order = complexity_order(space, table, opts.strategy);
  Enc16Distance distance(table);
  const uint64_t truth = bits_to_uint(encode_theta(5.0, 1.0));

  std::vector<NoiseCell> cells;
  for (int set_size : opts.set_sizes)
    for (int flips : opts.flip_counts) cells.push_back({set_size, flips, 0.0});

  parallel_chunks(cells.size(), [&](size_t begin, size_t end, size_t) {
    for (size_t ci = begin; ci < end; ++ci) {
      NoiseCell& cell = cells[ci];
      double total_distance = 0.0;
      for (int rep = 0; rep < opts.reps; ++rep) {
        Rng rng = sub_rng(opts.seed,
                          (static_cast<uint64_t>(cell.set_size) << 32) ^
                              (static_cast<uint64_t>(cell.flips) << 16) ^ rep);
        auto picks = sample_distinct(rng, grid.size(), cell.set_size);
        std::sort(picks.begin(), picks.end());
        std::vector<uint16_t> observed(picks.size());
        for (size_t i = 0; i < picks.size(); ++i) {
          uint16_t enc = sim[truth * grid.size() + picks[i]];
          auto bit_positions = sample_distinct(rng, 16, cell.flips);
          for (uint64_t b : bit_positions) enc = static_cast<uint16_t>(enc ^ (1u << b));
          observed[i] = enc;
        }
        // Complexity-ordered sweep of the cached candidate encodings.
        double best = std::numeric_limits<double>::infinity();
        uint64_t best_candidate = 0;
        for (uint64_t v : order) {
          double sum = 0.0;
          for (size_t i = 0; i < picks.size(); ++i) {
            const double d = distance(observed[i], sim[v * grid.size() + picks[i]]);
            sum += opts.aggregation == CostAggregation::sum_sq ? d * d : d;
          }
          if (sum < best) {
            best = sum;
            best_candidate = v;
            if (best == 0.0) break;
          }
        }
        auto [t1, t2] = decode_theta(uint_to_bits(best_candidate, 16));
        total_distance += std::hypot(t1 - 5.0, t2 - 1.0);
      }
      cell.mean_distance = total_distance / opts.reps;
    }
  });
  return cells;
}

}  // namespace apml
