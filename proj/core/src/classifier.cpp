#include "apml/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "apml/io.hpp"
#include "apml/parallel.hpp"

#include "json.hpp"

namespace apml {

namespace {

std::string db_outcome_key(const CondCtmTable& db, const BinaryTensor& x) {
  (void)db;  // every current domain keys outcomes by their raw bits
  return x.bit_string();
}

}  // namespace

double centroid_distance(const DistanceMode& mode, const DistanceContext& ctx,
                         const BinaryTensor& x, const BinaryTensor& centroid) {
  if (mode.kind == DistanceKind::cond_bdm_coarse) {
    if (ctx.table == nullptr) throw std::invalid_argument("coarse distance needs a table");
    return cond_bdm_coarse(x, centroid, *ctx.table, mode.strategy);
  }
  if (ctx.db == nullptr) throw std::invalid_argument("cond_ctm distance needs a database");
  return cond_ctm(*ctx.db, db_outcome_key(*ctx.db, x), centroid.bit_string());
}

namespace {

// Fast class cost for coarse-BDM centroid training with single-row blocks:
// samples are flattened to (block value, multiplicity, precomputed terms)
// and candidates to a dense count array, so one candidate evaluation is a
// linear pass with no hashing. Matches the generic formula term for term.
struct CoarseClassCost {
  struct Entry {
    uint16_t block;
    uint32_t mult;
    double absent_term;  // ctm(block) + log2(mult)
    double diff_term;    // log2(mult)
  };
  std::vector<std::vector<Entry>> samples;
  int block_cols = 0;
  std::vector<uint16_t> scratch_counts;

  CoarseClassCost(const std::vector<const BinaryTensor*>& class_samples,
                  const CtmTable& table, const PartitionStrategy& s)
      : block_cols(s.block_cols), scratch_counts(size_t{1} << s.block_cols, 0) {
    if (s.block_rows != 1 || s.block_cols > 12)
      throw std::invalid_argument("fast coarse cost needs single-row blocks of <= 12 bits");
    for (const BinaryTensor* x : class_samples) {
      BlockMultiset adj = partition(*x, s, &table);
      std::vector<Entry> entries;
      entries.reserve(adj.counts.size());
      for (const auto& [key, n] : adj.counts) {
        uint16_t v = 0;
        for (char c : key) v = static_cast<uint16_t>((v << 1) | (c == '1'));
        entries.push_back({v, static_cast<uint32_t>(n),
                           table.value(key) + std::log2(static_cast<double>(n)),
                           std::log2(static_cast<double>(n))});
      }
      samples.push_back(std::move(entries));
    }
  }

  // counts = candidate centroid block counts indexed by block value.
  double eval(const std::vector<uint16_t>& counts) const {
    double sum = 0.0;
    for (const auto& entries : samples)
      for (const auto& e : entries) {
        const uint16_t nc = counts[e.block];
        if (nc == 0)
          sum += e.absent_term;
        else if (nc != e.mult)
          sum += e.diff_term;
      }
    return sum;
  }
};

std::vector<uint16_t> centroid_block_counts(const BinaryTensor& centroid, int block_cols) {
  std::vector<uint16_t> counts(size_t{1} << block_cols, 0);
  for (int r = 0; r < centroid.rows(); ++r)
    for (int c = 0; c + block_cols <= centroid.cols(); c += block_cols) {
      uint16_t v = 0;
      for (int b = 0; b < block_cols; ++b)
        v = static_cast<uint16_t>((v << 1) | centroid.at(r, c + b));
      ++counts[v];
    }
  return counts;
}

CentroidModel train_centroids_coarse(const LabelledDataset& ds, int rows, int cols,
                                     const DistanceMode& mode, const DistanceContext& ctx,
                                     const TrainOptions& opts) {
  const CtmTable& table = *ctx.table;
  std::vector<BlockRegion> schedule =
      opts.schedule.empty() ? quadrant_schedule(rows, cols) : opts.schedule;

  CentroidModel model;
  model.mode = mode;
  model.meta.candidate_budget = opts.greedy.candidate_budget;
  model.meta.schedule = std::to_string(schedule.size()) + " regions";

  for (const std::string& label : ds.classes()) {
    std::vector<const BinaryTensor*> class_samples;
    for (const auto& s : ds.samples)
      if (s.label == label) class_samples.push_back(&s.tensor);
    if (class_samples.empty()) throw std::invalid_argument("empty class " + label);

    CoarseClassCost fast(class_samples, table, mode.strategy);
    CostFunction cost{
        [&fast, &mode](const BinaryTensor& candidate) {
          return fast.eval(centroid_block_counts(candidate, mode.strategy.block_cols));
        },
        "sum coarse cond BDM over class"};
    GreedyResult res =
        greedy_block_optimize(rows, cols, schedule, cost, table, mode.strategy, opts.greedy);
    model.meta.candidates_evaluated += res.candidates_evaluated;
    model.centroids.emplace(label, std::move(res.model));
  }
  return model;
}

// Literal candidate spaces for the conditional-CTM domains.
std::vector<std::pair<std::string, BinaryTensor>> literal_space(const CondCtmTable& db) {
  std::vector<std::pair<std::string, BinaryTensor>> out;
  if (db.domain() == "nk-topology-4") {
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) pairs.emplace_back(a, b);
    for (int i0 = 0; i0 < 6; ++i0)
      for (int i1 = 0; i1 < 6; ++i1)
        for (int i2 = 0; i2 < 6; ++i2)
          for (int i3 = 0; i3 < 6; ++i3) {
            std::vector<std::vector<int>> inputs{
                {pairs[i0].first, pairs[i0].second}, {pairs[i1].first, pairs[i1].second},
                {pairs[i2].first, pairs[i2].second}, {pairs[i3].first, pairs[i3].second}};
            std::string key = nk_topology_key(inputs, 4);
            BinaryTensor t(4, 4);
            for (int i = 0; i < 16; ++i)
              t.set(i / 4, i % 4, key[i] == '1');
            out.emplace_back(std::move(key), std::move(t));
          }
    return out;
  }
  if (db.domain() == "nk-rules-4") {
    for (int v = 0; v < 256; ++v) {
      BinaryTensor t = uint_to_bits(static_cast<uint64_t>(v), 8);
      out.emplace_back(t.bit_string(), std::move(t));
    }
    return out;
  }
  throw std::invalid_argument("no literal candidate space for domain " + db.domain());
}

CentroidModel train_centroids_cond_ctm(const LabelledDataset& ds, int rows, int cols,
                                       const DistanceMode& mode, const DistanceContext& ctx,
                                       const TrainOptions& opts) {
  const CondCtmTable& db = *ctx.db;
  CentroidModel model;
  model.mode = mode;

  if (db.domain() == "eca12") {
    // One full-width region: the whole 2^12 space is enumerable, and the
    // cost is a needle around the generating string, so half-by-half
    // optimization has no gradient to follow.
    std::vector<BlockRegion> schedule = opts.schedule.empty()
                                            ? std::vector<BlockRegion>{{0, 0, 1, cols}}
                                            : opts.schedule;
    model.meta.schedule = schedule.size() == 1 ? "single block" : "custom";
    if (opts.ordering_table == nullptr)
      throw std::invalid_argument("eca12 training needs an ordering table");
    for (const std::string& label : ds.classes()) {
      std::vector<std::string> outcome_keys;
      for (const auto& s : ds.samples)
        if (s.label == label) outcome_keys.push_back(db_outcome_key(db, s.tensor));
      if (outcome_keys.empty()) throw std::invalid_argument("empty class " + label);
      CostFunction cost{
          [&db, &outcome_keys](const BinaryTensor& candidate) {
            const std::string cond = candidate.bit_string();
            double sum = 0.0;
            for (const auto& out : outcome_keys) sum += db.value(cond, out);
            return sum;
          },
          "sum cond CTM over class"};
      GreedyResult res = greedy_block_optimize(rows, cols, schedule, cost,
                                               *opts.ordering_table,
                                               opts.ordering_strategy, opts.greedy);
      model.meta.candidates_evaluated += res.candidates_evaluated;
      model.centroids.emplace(label, std::move(res.model));
    }
    return model;
  }

  // NK domains: sweep the literal key space exhaustively in complexity
  // order (the spaces are small).
  auto space = literal_space(db);
  std::vector<size_t> order(space.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (opts.ordering_table != nullptr) {
    std::vector<double> score(space.size());
    for (size_t i = 0; i < space.size(); ++i)
      score[i] = bdm(BinaryTensor::vector_from_bits(space[i].first),
                     *opts.ordering_table, opts.ordering_strategy);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      if (score[a] != score[b]) return score[a] < score[b];
      return space[a].first < space[b].first;
    });
  }
  model.meta.schedule = "exhaustive literal space (" + std::to_string(space.size()) + ")";
  model.meta.candidates_evaluated = 0;

  for (const std::string& label : ds.classes()) {
    std::vector<std::string> outcome_keys;
    for (const auto& s : ds.samples)
      if (s.label == label) outcome_keys.push_back(db_outcome_key(db, s.tensor));
    if (outcome_keys.empty()) throw std::invalid_argument("empty class " + label);
    double best = std::numeric_limits<double>::infinity();
    size_t best_idx = 0;
    for (size_t idx : order) {
      const std::string& cond = space[idx].first;
      double sum = 0.0;
      for (const auto& out : outcome_keys) sum += db.value(cond, out);
      if (sum < best) {
        best = sum;
        best_idx = idx;
      }
    }
    model.meta.candidates_evaluated += space.size();
    model.centroids.emplace(label, space[best_idx].second);
  }
  return model;
}

}  // namespace

CentroidModel train_centroids(const LabelledDataset& ds, int centroid_rows,
                              int centroid_cols, const DistanceMode& mode,
                              const DistanceContext& ctx, const TrainOptions& opts) {
  ds.check_uniform_shape();
  if (ds.samples.empty()) throw std::invalid_argument("empty training set");
  if (mode.kind == DistanceKind::cond_bdm_coarse) {
    if (ctx.table == nullptr) throw std::invalid_argument("coarse training needs a table");
    return train_centroids_coarse(ds, centroid_rows, centroid_cols, mode, ctx, opts);
  }
  if (ctx.db == nullptr) throw std::invalid_argument("cond_ctm training needs a database");
  return train_centroids_cond_ctm(ds, centroid_rows, centroid_cols, mode, ctx, opts);
}

std::string predict(const CentroidModel& model, const DistanceContext& ctx,
                    const BinaryTensor& x) {
  if (model.centroids.empty()) throw std::invalid_argument("model has no centroids");
  const std::string* best_label = nullptr;
  double best = 0.0;
  for (const auto& [label, centroid] : model.centroids) {
    const double d = centroid_distance(model.mode, ctx, x, centroid);
    if (best_label == nullptr || d < best) {
      best = d;
      best_label = &label;
    }
  }
  return *best_label;
}

ScalarModel train_scalar(const LabelledDataset& ds, const CtmTable& table,
                         const PartitionStrategy& s, bool entropy_based) {
  ScalarModel model;
  model.entropy_based = entropy_based;
  model.strategy = s;
  std::map<std::string, std::pair<double, uint64_t>> sums;
  for (const auto& sample : ds.samples) {
    const double v = entropy_based ? block_entropy(sample.tensor, s)
                                   : bdm(sample.tensor, table, s);
    auto& [sum, n] = sums[sample.label];
    sum += v;
    ++n;
  }
  if (sums.empty()) throw std::invalid_argument("empty training set");
  for (const auto& [label, sn] : sums)
    model.class_means[label] = sn.first / static_cast<double>(sn.second);
  return model;
}

std::string predict_scalar(const ScalarModel& model, const CtmTable& table,
                           const BinaryTensor& x) {
  const double v = model.entropy_based ? block_entropy(x, model.strategy)
                                       : bdm(x, table, model.strategy);
  const std::string* best_label = nullptr;
  double best = 0.0;
  for (const auto& [label, mean] : model.class_means) {
    const double d = std::abs(v - mean);
    if (best_label == nullptr || d < best) {
      best = d;
      best_label = &label;
    }
  }
  return *best_label;
}

ScalarNnModel train_scalar_nn(const LabelledDataset& ds, const CtmTable& table,
                              const PartitionStrategy& s, bool entropy_based) {
  ScalarNnModel model;
  model.entropy_based = entropy_based;
  model.strategy = s;
  for (const auto& sample : ds.samples) {
    const double v = entropy_based ? block_entropy(sample.tensor, s)
                                   : bdm(sample.tensor, table, s);
    model.points.emplace_back(v, sample.label);
  }
  std::sort(model.points.begin(), model.points.end());
  return model;
}

std::string predict_scalar_nn(const ScalarNnModel& model, const CtmTable& table,
                              const BinaryTensor& x) {
  if (model.points.empty()) throw std::invalid_argument("empty scalar NN model");
  const double v = model.entropy_based ? block_entropy(x, model.strategy)
                                       : bdm(x, table, model.strategy);
  const std::string* best_label = nullptr;
  double best = 0.0;
  for (const auto& [pv, label] : model.points) {
    const double d = std::abs(v - pv);
    if (best_label == nullptr || d < best) {
      best = d;
      best_label = &label;
    }
  }
  return *best_label;
}

Evaluation evaluate(const std::function<std::string(const BinaryTensor&)>& predictor,
                    const LabelledDataset& ds) {
  Evaluation ev;
  ev.classes = ds.classes();
  std::map<std::string, size_t> index;
  for (size_t i = 0; i < ev.classes.size(); ++i) index[ev.classes[i]] = i;
  ev.confusion.assign(ev.classes.size(), std::vector<uint64_t>(ev.classes.size(), 0));

  std::vector<std::string> predictions(ds.samples.size());
  parallel_chunks(ds.samples.size(), [&](size_t begin, size_t end, size_t) {
    for (size_t i = begin; i < end; ++i)
      predictions[i] = predictor(ds.samples[i].tensor);
  });

  uint64_t correct = 0;
  for (size_t i = 0; i < ds.samples.size(); ++i) {
    const auto& truth = ds.samples[i].label;
    auto pred_it = index.find(predictions[i]);
    if (pred_it == index.end()) {
      // Prediction outside the dataset's label set: grow the matrix.
      index[predictions[i]] = ev.classes.size();
      ev.classes.push_back(predictions[i]);
      for (auto& row : ev.confusion) row.resize(ev.classes.size(), 0);
      ev.confusion.emplace_back(ev.classes.size(), 0);
      pred_it = index.find(predictions[i]);
    }
    ++ev.confusion[index[truth]][pred_it->second];
    if (predictions[i] == truth) ++correct;
  }
  ev.total = ds.samples.size();
  ev.accuracy = ev.total == 0 ? 0.0 : static_cast<double>(correct) / ev.total;
  return ev;
}

namespace {

nlohmann::json strategy_json(const PartitionStrategy& s) {
  return {{"block_rows", s.block_rows},
          {"block_cols", s.block_cols},
          {"leftover", s.leftover == LeftoverPolicy::discard ? "discard" : "keep_if_scored"}};
}

PartitionStrategy strategy_from_json(const nlohmann::json& j) {
  PartitionStrategy s;
  s.block_rows = j.at("block_rows").get<int>();
  s.block_cols = j.at("block_cols").get<int>();
  s.leftover = j.at("leftover").get<std::string>() == "discard"
                   ? LeftoverPolicy::discard
                   : LeftoverPolicy::keep_if_scored;
  return s;
}

}  // namespace

void save_centroid_model(const CentroidModel& model, const std::filesystem::path& path) {
  nlohmann::json j;
  j["kind"] = "centroid";
  j["distance_mode"] = {
      {"kind", model.mode.kind == DistanceKind::cond_bdm_coarse ? "cond_bdm_coarse"
                                                                : "cond_ctm"},
      {"strategy", strategy_json(model.mode.strategy)},
      {"table_path", model.mode.table_path},
      {"table_hash", model.mode.table_hash},
      {"db_path", model.mode.db_path},
      {"db_hash", model.mode.db_hash}};
  j["training"] = {{"schedule", model.meta.schedule},
                   {"candidate_budget", model.meta.candidate_budget},
                   {"candidates_evaluated", model.meta.candidates_evaluated}};
  nlohmann::json cj = nlohmann::json::object();
  for (const auto& [label, c] : model.centroids) cj[label] = c.to_string();
  j["centroids"] = cj;
  atomic_write_file(path, j.dump(2) + "\n");
}

CentroidModel load_centroid_model(const std::filesystem::path& path) {
  auto j = nlohmann::json::parse(read_file(path));
  if (j.at("kind").get<std::string>() != "centroid")
    throw std::runtime_error("not a centroid model file: " + path.string());
  CentroidModel model;
  const auto& dm = j.at("distance_mode");
  model.mode.kind = dm.at("kind").get<std::string>() == "cond_bdm_coarse"
                        ? DistanceKind::cond_bdm_coarse
                        : DistanceKind::cond_ctm;
  model.mode.strategy = strategy_from_json(dm.at("strategy"));
  model.mode.table_path = dm.value("table_path", "");
  model.mode.table_hash = dm.value("table_hash", "");
  model.mode.db_path = dm.value("db_path", "");
  model.mode.db_hash = dm.value("db_hash", "");
  model.meta.schedule = j.at("training").value("schedule", "");
  model.meta.candidate_budget = j.at("training").value("candidate_budget", uint64_t{0});
  model.meta.candidates_evaluated =
      j.at("training").value("candidates_evaluated", uint64_t{0});
  for (const auto& [label, text] : j.at("centroids").items())
    model.centroids.emplace(label, BinaryTensor::parse(text.get<std::string>()));
  return model;
}

void save_scalar_model(const ScalarModel& model, const std::filesystem::path& path) {
  nlohmann::json j;
  j["kind"] = "scalar";
  j["entropy_based"] = model.entropy_based;
  j["strategy"] = strategy_json(model.strategy);
  j["class_means"] = model.class_means;
  atomic_write_file(path, j.dump(2) + "\n");
}

ScalarModel load_scalar_model(const std::filesystem::path& path) {
  auto j = nlohmann::json::parse(read_file(path));
  if (j.at("kind").get<std::string>() != "scalar")
    throw std::runtime_error("not a scalar model file: " + path.string());
  ScalarModel model;
  model.entropy_based = j.at("entropy_based").get<bool>();
  model.strategy = strategy_from_json(j.at("strategy"));
  model.class_means = j.at("class_means").get<std::map<std::string, double>>();
  return model;
}

}  // namespace apml
