#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "apml/bdm.hpp"
#include "apml/cond_ctm.hpp"
#include "apml/generators.hpp"
#include "apml/optimizer.hpp"

namespace apml {

enum class DistanceKind { cond_bdm_coarse, cond_ctm };

// How sample-to-centroid distances are computed. Conditional-CTM mode keys
// lookups by the table's domain: eca12 crops the outcome, the NK domains
// use raw bits. File references (path + content hash) ride along for model
// serialization.
struct DistanceMode {
  DistanceKind kind = DistanceKind::cond_bdm_coarse;
  PartitionStrategy strategy;  // coarse mode
  std::string table_path, table_hash;
  std::string db_path, db_hash;
};

struct DistanceContext {
  const CtmTable* table = nullptr;
  const CondCtmTable* db = nullptr;
};

struct TrainingMeta {
  std::string schedule;
  uint64_t candidate_budget = 0;
  uint64_t candidates_evaluated = 0;
};

struct CentroidModel {
  std::map<std::string, BinaryTensor> centroids;  // label -> centroid
  DistanceMode mode;
  TrainingMeta meta;
};

double centroid_distance(const DistanceMode& mode, const DistanceContext& ctx,
                         const BinaryTensor& x, const BinaryTensor& centroid);

struct TrainOptions {
  std::vector<BlockRegion> schedule;  // empty = quadrant schedule
  GreedyOptions greedy;
  // Candidate ordering for the literal-space search of conditional-CTM
  // models; falls back to numeric order when no table is given.
  const CtmTable* ordering_table = nullptr;
  PartitionStrategy ordering_strategy;
};

// Per-class centroid = arg-min of the summed distance from the class
// samples, via greedy block optimization (coarse mode, eca12) or an
// exhaustive complexity-ordered sweep of the literal key space (NK
// domains). Classes train independently.
CentroidModel train_centroids(const LabelledDataset& ds, int centroid_rows,
                              int centroid_cols, const DistanceMode& mode,
                              const DistanceContext& ctx, const TrainOptions& opts = {});

// Arg-min class; ties go to the first label in sorted order.
std::string predict(const CentroidModel& model, const DistanceContext& ctx,
                    const BinaryTensor& x);

struct ScalarModel {
  std::map<std::string, double> class_means;  // label -> mean complexity
  bool entropy_based = false;
  PartitionStrategy strategy;
};

ScalarModel train_scalar(const LabelledDataset& ds, const CtmTable& table,
                         const PartitionStrategy& s, bool entropy_based = false);
std::string predict_scalar(const ScalarModel& model, const CtmTable& table,
                           const BinaryTensor& x);

// Nearest neighbour over per-sample scalar BDM values.
struct ScalarNnModel {
  std::vector<std::pair<double, std::string>> points;  // sorted by value
  bool entropy_based = false;
  PartitionStrategy strategy;
};
ScalarNnModel train_scalar_nn(const LabelledDataset& ds, const CtmTable& table,
                              const PartitionStrategy& s, bool entropy_based = false);
std::string predict_scalar_nn(const ScalarNnModel& model, const CtmTable& table,
                              const BinaryTensor& x);

struct Evaluation {
  double accuracy = 0.0;
  std::vector<std::string> classes;           // row/col order
  std::vector<std::vector<uint64_t>> confusion;  // true x predicted
  uint64_t total = 0;
};

Evaluation evaluate(const std::function<std::string(const BinaryTensor&)>& predictor,
                    const LabelledDataset& ds);

void save_centroid_model(const CentroidModel& model, const std::filesystem::path& path);
CentroidModel load_centroid_model(const std::filesystem::path& path);
void save_scalar_model(const ScalarModel& model, const std::filesystem::path& path);
ScalarModel load_scalar_model(const std::filesystem::path& path);

}  // namespace apml
