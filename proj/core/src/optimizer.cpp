#include "apml/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <unordered_set>

#include "apml/parallel.hpp"

namespace apml {

namespace {

// Per-type ctm values for all blocks of `bits` bits, plus canonical-order
// BDM evaluation used by both the exhaustive sort and the lazy stream, so
// that ties agree bitwise.
struct TypeTable {
  int bits;
  std::vector<double> ctm;  // indexed by block value

  TypeTable(int block_bits, const CtmTable& table) : bits(block_bits) {
    if (block_bits < 1 || block_bits > 12)
      throw std::invalid_argument("block bits must be in [1,12] for ordered enumeration");
    ctm.resize(size_t{1} << block_bits);
    std::string key(static_cast<size_t>(block_bits), '0');
    for (size_t v = 0; v < ctm.size(); ++v) {
      for (int i = 0; i < block_bits; ++i)
        key[block_bits - 1 - i] = ((v >> i) & 1) ? '1' : '0';
      ctm[v] = table.value(key);
    }
  }

  // BDM of a multiset given as (type value -> count), iterated in ascending
  // type value order.
  double bdm_of_counts(const std::map<uint16_t, uint64_t>& counts) const {
    double sum = 0.0;
    for (const auto& [v, n] : counts)
      sum += ctm[v] + std::log2(static_cast<double>(n));
    return sum;
  }
};

// BDM of a w-bit pattern under single-row blocks of `b` bits, leftover
// bits discarded. Touched-type counting in ascending type order.
double pattern_bdm(uint64_t pattern, int w, const TypeTable& types,
                   std::vector<uint32_t>& counts, std::vector<uint16_t>& touched) {
  const int b = types.bits;
  const int slots = w / b;
  touched.clear();
  for (int s = 0; s < slots; ++s) {
    const int shift = w - (s + 1) * b;
    const auto v = static_cast<uint16_t>((pattern >> shift) & ((uint64_t{1} << b) - 1));
    if (counts[v]++ == 0) touched.push_back(v);
  }
  std::sort(touched.begin(), touched.end());
  double sum = 0.0;
  for (uint16_t v : touched) {
    sum += types.ctm[v] + std::log2(static_cast<double>(counts[v]));
    counts[v] = 0;
  }
  return sum;
}

bool fast_path_ok(const ParameterSpace& space, const PartitionStrategy& s) {
  if (s.block_rows != 1 || s.block_cols < 1 || s.block_cols > 12) return false;
  if (s.leftover == LeftoverPolicy::keep_if_scored && space.bit_width % s.block_cols != 0)
    return false;
  return s.block_cols <= space.bit_width;
}

}  // namespace

std::vector<uint64_t> complexity_order(const ParameterSpace& space, const CtmTable& table,
                                       const PartitionStrategy& strategy) {
  if (space.bit_width < 1) throw std::invalid_argument("empty parameter space");
  if (space.bit_width > space.enumeration_cap_bits)
    throw std::invalid_argument("parameter space exceeds the enumeration cap");
  const uint64_t n = uint64_t{1} << space.bit_width;
  std::vector<double> scores(n);

  if (fast_path_ok(space, strategy)) {
    TypeTable types(strategy.block_cols, table);
    parallel_chunks(n, [&](size_t begin, size_t end, size_t) {
      std::vector<uint32_t> counts(size_t{1} << strategy.block_cols, 0);
      std::vector<uint16_t> touched;
      for (uint64_t v = begin; v < end; ++v)
        scores[v] = pattern_bdm(v, space.bit_width, types, counts, touched);
    });
  } else {
    parallel_chunks(n, [&](size_t begin, size_t end, size_t) {
      for (uint64_t v = begin; v < end; ++v)
        scores[v] = bdm(uint_to_bits(v, space.bit_width), table, strategy);
    });
  }

  std::vector<uint64_t> order(n);
  std::iota(order.begin(), order.end(), uint64_t{0});
  std::sort(order.begin(), order.end(), [&](uint64_t a, uint64_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return a < b;
  });
  return order;
}

uint64_t complexity_rank(uint64_t pattern, int bit_width, const CtmTable& table,
                         const PartitionStrategy& strategy) {
  ParameterSpace space{bit_width, bit_width};
  auto order = complexity_order(space, table, strategy);
  for (uint64_t i = 0; i < order.size(); ++i)
    if (order[i] == pattern) return i;
  throw std::logic_error("pattern not found in its own space");
}

SearchResult algorithmic_search(const ParameterSpace& space, const CostFunction& cost,
                                const CtmTable& table, const PartitionStrategy& strategy,
                                const SearchStop& stop, bool keep_trace) {
  if (!stop.max_iters && !stop.target_cost)
    throw std::invalid_argument("a stop condition is required");
  auto order = complexity_order(space, table, strategy);

  SearchResult result;
  double best = std::numeric_limits<double>::infinity();
  uint64_t best_value = 0;
  const uint64_t limit = stop.max_iters ? std::min<uint64_t>(*stop.max_iters, order.size())
                                        : order.size();
  for (uint64_t i = 0; i < limit; ++i) {
    const BinaryTensor candidate = uint_to_bits(order[i], space.bit_width);
    const double c = cost(candidate);
    ++result.iterations;
    const bool is_min = c < best;
    if (is_min) {
      best = c;
      best_value = order[i];
    }
    if (keep_trace) result.trace.push_back({i, candidate.bit_string(), c, is_min});
    if (stop.target_cost && best <= *stop.target_cost) break;
  }
  result.best = uint_to_bits(best_value, space.bit_width);
  result.best_cost = best;
  return result;
}

CostFunction regularized(const CostFunction& cost, double lambda, const CtmTable& table,
                         const PartitionStrategy& strategy) {
  if (lambda < 0) throw std::invalid_argument("lambda must be >= 0");
  auto inner = cost.eval;
  return CostFunction{
      [inner, lambda, &table, strategy](const BinaryTensor& m) {
        return inner(m) + lambda * bdm(m, table, strategy);
      },
      cost.description + " + lambda*BDM"};
}

CostFunction algorithmic_cost(
    std::function<BinaryTensor(const BinaryTensor&, size_t)> predict,
    std::function<const BinaryTensor&(size_t)> target, size_t n_samples,
    std::function<double(const BinaryTensor&, const BinaryTensor&)> distance,
    CostAggregation aggregation, std::string description) {
  return CostFunction{
      [=](const BinaryTensor& candidate) {
        double sum = 0.0;
        for (size_t i = 0; i < n_samples; ++i) {
          const double d = distance(target(i), predict(candidate, i));
          sum += aggregation == CostAggregation::sum_sq ? d * d : d;
        }
        return sum;
      },
      std::move(description)};
}

// ---------------------------------------------------------------------------
// OrderedPatternStream

namespace {

struct PartitionRow {
  std::vector<int> parts;  // descending
  double g;                // sum of log2(part)
};

std::vector<std::vector<PartitionRow>> partitions_by_k(int m) {
  // partitions[k] = partitions of m into exactly k positive parts
  std::vector<std::vector<PartitionRow>> by_k(m + 1);
  std::vector<int> cur;
  std::function<void(int, int)> rec = [&](int remaining, int max_part) {
    if (remaining == 0) {
      double g = 0.0;
      for (int p : cur) g += std::log2(static_cast<double>(p));
      by_k[cur.size()].push_back({cur, g});
      return;
    }
    for (int p = std::min(remaining, max_part); p >= 1; --p) {
      cur.push_back(p);
      rec(remaining - p, p);
      cur.pop_back();
    }
  };
  rec(m, m);
  for (auto& rows : by_k)
    std::sort(rows.begin(), rows.end(), [](const PartitionRow& a, const PartitionRow& b) {
      if (a.g != b.g) return a.g < b.g;
      return a.parts < b.parts;
    });
  return by_k;
}

}  // namespace

struct OrderedPatternStream::Impl {
  int slots;
  int block_bits;
  TypeTable types;
  // type ids sorted by (ctm, value); id -> value and id -> ctm
  std::vector<uint16_t> id_value;
  std::vector<double> id_ctm;
  std::vector<std::vector<PartitionRow>> partitions;

  struct State {
    double f_lb;               // subset ctm sum + partition g (frontier bound)
    std::vector<uint16_t> subset;  // type ids, strictly ascending
    uint32_t pidx;

    bool operator>(const State& o) const {
      if (f_lb != o.f_lb) return f_lb > o.f_lb;
      if (subset != o.subset) return subset > o.subset;
      return pidx > o.pidx;
    }
  };
  std::priority_queue<State, std::vector<State>, std::greater<State>> frontier;
  std::unordered_set<std::string> visited;

  struct Generator {
    double f;                        // canonical BDM of this content multiset
    std::vector<uint16_t> slots_vec; // current arrangement, type values, lex order

    bool operator>(const Generator& o) const {
      if (f != o.f) return f > o.f;
      return slots_vec > o.slots_vec;
    }
  };
  std::priority_queue<Generator, std::vector<Generator>, std::greater<Generator>> output;

  Impl(int slots_, int block_bits_, const CtmTable& table)
      : slots(slots_), block_bits(block_bits_), types(block_bits_, table) {
    if (slots_ < 1 || slots_ > 32)
      throw std::invalid_argument("ordered stream supports 1..32 slots");
    const size_t n_types = types.ctm.size();
    id_value.resize(n_types);
    std::iota(id_value.begin(), id_value.end(), uint16_t{0});
    std::sort(id_value.begin(), id_value.end(), [&](uint16_t a, uint16_t b) {
      if (types.ctm[a] != types.ctm[b]) return types.ctm[a] < types.ctm[b];
      return a < b;
    });
    id_ctm.resize(n_types);
    for (size_t i = 0; i < n_types; ++i) id_ctm[i] = types.ctm[id_value[i]];
    partitions = partitions_by_k(slots);

    const int max_k = static_cast<int>(std::min<size_t>(slots, n_types));
    for (int k = 1; k <= max_k; ++k) {
      State s;
      s.subset.resize(k);
      std::iota(s.subset.begin(), s.subset.end(), uint16_t{0});
      s.pidx = 0;
      s.f_lb = f_of(s);
      push_state(std::move(s));
    }
  }

  double f_of(const State& s) const {
    double sum = partitions[s.subset.size()][s.pidx].g;
    for (uint16_t id : s.subset) sum += id_ctm[id];
    return sum;
  }

  std::string state_key(const State& s) const {
    std::string key(reinterpret_cast<const char*>(s.subset.data()),
                    s.subset.size() * sizeof(uint16_t));
    key.append(reinterpret_cast<const char*>(&s.pidx), sizeof(s.pidx));
    return key;
  }

  void push_state(State s) {
    auto key = state_key(s);
    if (visited.insert(std::move(key)).second) frontier.push(std::move(s));
  }

  void expand(const State& s) {
    const int k = static_cast<int>(s.subset.size());
    // Successors: bump one subset index (keeping it strictly ascending) or
    // move to the next partition of the same size.
    const auto n_types = static_cast<uint16_t>(id_value.size());
    for (int i = 0; i < k; ++i) {
      const uint16_t upper = (i + 1 < k) ? s.subset[i + 1] : n_types;
      if (s.subset[i] + 1 < upper) {
        State nxt = s;
        ++nxt.subset[i];
        nxt.f_lb = f_of(nxt);
        push_state(std::move(nxt));
      }
    }
    if (s.pidx + 1 < partitions[k].size()) {
      State nxt = s;
      ++nxt.pidx;
      nxt.f_lb = f_of(nxt);
      push_state(std::move(nxt));
    }

    // Generators: one per distinct assignment of parts to the subset types.
    std::vector<int> parts = partitions[k][s.pidx].parts;
    std::sort(parts.begin(), parts.end());
    do {
      std::map<uint16_t, uint64_t> counts;
      for (int i = 0; i < k; ++i) counts[id_value[s.subset[i]]] = parts[i];
      Generator g;
      g.f = types.bdm_of_counts(counts);
      g.slots_vec.reserve(slots);
      for (const auto& [value, count] : counts)
        g.slots_vec.insert(g.slots_vec.end(), count, value);
      output.push(std::move(g));
    } while (std::next_permutation(parts.begin(), parts.end()));
  }

  std::optional<std::vector<uint16_t>> next() {
    // Expand every frontier state that could still contribute a pattern at
    // or below the best pending one (1e-9 slack absorbs summation-order
    // rounding between the bound and canonical BDM).
    while (!frontier.empty() &&
           (output.empty() || frontier.top().f_lb <= output.top().f + 1e-9)) {
      State s = frontier.top();
      frontier.pop();
      expand(s);
    }
    if (output.empty()) return std::nullopt;
    Generator g = output.top();
    output.pop();
    auto result = g.slots_vec;
    if (std::next_permutation(g.slots_vec.begin(), g.slots_vec.end()))
      output.push(std::move(g));
    return result;
  }
};

OrderedPatternStream::OrderedPatternStream(int slots, int block_bits, const CtmTable& table)
    : impl_(std::make_unique<Impl>(slots, block_bits, table)) {}
OrderedPatternStream::~OrderedPatternStream() = default;
OrderedPatternStream::OrderedPatternStream(OrderedPatternStream&&) noexcept = default;

std::optional<std::vector<uint16_t>> OrderedPatternStream::next() { return impl_->next(); }

// ---------------------------------------------------------------------------
// Greedy block optimization

std::vector<BlockRegion> quadrant_schedule(int rows, int cols) {
  const int hr = rows / 2, hc = cols / 2;
  if (hr < 1 || hc < 1 || rows % 2 || cols % 2)
    throw std::invalid_argument("quadrant schedule needs even dimensions");
  return {{0, 0, hr, hc}, {0, hc, hr, cols - hc}, {hr, 0, rows - hr, hc},
          {hr, hc, rows - hr, cols - hc}};
}

namespace {

void check_tiling(int rows, int cols, const std::vector<BlockRegion>& schedule) {
  std::vector<uint8_t> covered(static_cast<size_t>(rows) * cols, 0);
  for (const auto& reg : schedule) {
    if (reg.row < 0 || reg.col < 0 || reg.rows < 1 || reg.cols < 1 ||
        reg.row + reg.rows > rows || reg.col + reg.cols > cols)
      throw std::invalid_argument("schedule region out of bounds");
    for (int r = reg.row; r < reg.row + reg.rows; ++r)
      for (int c = reg.col; c < reg.col + reg.cols; ++c) {
        auto& cell = covered[static_cast<size_t>(r) * cols + c];
        if (cell) throw std::invalid_argument("schedule regions overlap");
        cell = 1;
      }
  }
  for (uint8_t c : covered)
    if (!c) throw std::invalid_argument("schedule does not tile the model shape");
}

void write_region_pattern(BinaryTensor& model, const BlockRegion& reg, uint64_t pattern) {
  for (int i = 0; i < reg.bit_count(); ++i) {
    const int r = reg.row + i / reg.cols;
    const int c = reg.col + i % reg.cols;
    model.set(r, c, static_cast<uint8_t>((pattern >> (reg.bit_count() - 1 - i)) & 1));
  }
}

void write_region_slots(BinaryTensor& model, const BlockRegion& reg, int block_cols,
                        const std::vector<uint16_t>& slot_values) {
  const int per_row = reg.cols / block_cols;
  for (size_t s = 0; s < slot_values.size(); ++s) {
    const int r = reg.row + static_cast<int>(s) / per_row;
    const int c0 = reg.col + (static_cast<int>(s) % per_row) * block_cols;
    for (int b = 0; b < block_cols; ++b)
      model.set(r, c0 + b,
                static_cast<uint8_t>((slot_values[s] >> (block_cols - 1 - b)) & 1));
  }
}

// Deterministic parallel arg-min over a batch of candidates: each thread
// evaluates on its own model copy, reduction favors the lowest index.
template <typename WriteCandidate>
std::pair<double, size_t> batch_best(const BinaryTensor& model, size_t n,
                                     const CostFunction& cost, WriteCandidate&& write) {
  std::vector<double> costs(n);
  parallel_chunks(n, [&](size_t begin, size_t end, size_t) {
    BinaryTensor scratch = model;
    for (size_t i = begin; i < end; ++i) {
      write(scratch, i);
      costs[i] = cost(scratch);
    }
  });
  size_t best_i = 0;
  for (size_t i = 1; i < n; ++i)
    if (costs[i] < costs[best_i]) best_i = i;
  return {costs[best_i], best_i};
}

}  // namespace

GreedyResult greedy_block_optimize(int rows, int cols,
                                   const std::vector<BlockRegion>& schedule,
                                   const CostFunction& cost, const CtmTable& table,
                                   const PartitionStrategy& strategy,
                                   const GreedyOptions& opts) {
  check_tiling(rows, cols, schedule);
  GreedyResult result;
  result.candidate_budget = opts.candidate_budget;
  result.model = BinaryTensor(rows, cols);
  double current = cost(result.model);

  for (const auto& reg : schedule) {
    const int bits = reg.bit_count();
    double best_cost = current;
    bool improved = false;

    if (bits <= opts.exhaustive_cap_bits) {
      ParameterSpace region_space{bits, opts.exhaustive_cap_bits};
      std::vector<uint64_t> order;
      if (reg.rows == 1 || reg.cols % strategy.block_cols == 0) {
        // Region-shaped BDM ordering; cost ties resolve to the earlier
        // (less complex) candidate.
        const uint64_t n = uint64_t{1} << bits;
        std::vector<double> scores(n);
        parallel_chunks(n, [&](size_t begin, size_t end, size_t) {
          BinaryTensor block(reg.rows, reg.cols);
          for (uint64_t v = begin; v < end; ++v) {
            for (int i = 0; i < bits; ++i)
              block.set(i / reg.cols, i % reg.cols,
                        static_cast<uint8_t>((v >> (bits - 1 - i)) & 1));
            scores[v] = bdm(block, table, strategy);
          }
        });
        order.resize(n);
        std::iota(order.begin(), order.end(), uint64_t{0});
        std::sort(order.begin(), order.end(), [&](uint64_t a, uint64_t b) {
          if (scores[a] != scores[b]) return scores[a] < scores[b];
          return a < b;
        });
      } else {
        order = complexity_order(region_space, table, strategy);
      }
      uint64_t best_pattern = 0;
      bool have_pattern = false;
      const size_t batch = 8192;
      for (size_t start = 0; start < order.size(); start += batch) {
        const size_t count = std::min(batch, order.size() - start);
        auto [c, idx] = batch_best(result.model, count, cost,
                                   [&](BinaryTensor& m, size_t i) {
                                     write_region_pattern(m, reg, order[start + i]);
                                   });
        result.candidates_evaluated += count;
        if (c < best_cost) {
          best_cost = c;
          best_pattern = order[start + idx];
          have_pattern = true;
          improved = true;
        }
      }
      if (have_pattern) write_region_pattern(result.model, reg, best_pattern);
    } else {
      if (strategy.block_rows != 1 || reg.cols % strategy.block_cols != 0)
        throw std::invalid_argument(
            "streamed region search needs single-row blocks aligned to the region");
      const int slots = reg.rows * (reg.cols / strategy.block_cols);
      OrderedPatternStream stream(slots, strategy.block_cols, table);
      std::vector<uint16_t> best_slots;
      uint64_t seen = 0;
      const size_t batch = 4096;
      std::vector<std::vector<uint16_t>> pending;
      while (seen < opts.candidate_budget) {
        pending.clear();
        while (pending.size() < batch && seen + pending.size() < opts.candidate_budget) {
          auto nxt = stream.next();
          if (!nxt) break;
          pending.push_back(std::move(*nxt));
        }
        if (pending.empty()) break;
        auto [c, idx] = batch_best(result.model, pending.size(), cost,
                                   [&](BinaryTensor& m, size_t i) {
                                     write_region_slots(m, reg, strategy.block_cols,
                                                        pending[i]);
                                   });
        seen += pending.size();
        result.candidates_evaluated += pending.size();
        if (c < best_cost) {
          best_cost = c;
          best_slots = pending[idx];
          improved = true;
        }
      }
      if (improved) write_region_slots(result.model, reg, strategy.block_cols, best_slots);
    }

    current = improved ? best_cost : current;
    result.step_costs.push_back(current);
  }
  result.cost = current;
  return result;
}

}  // namespace apml
