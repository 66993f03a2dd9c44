#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "apml/rng.hpp"
#include "apml/tensor.hpp"

namespace apml {

struct EcaRule {
  int number = 0;
  explicit EcaRule(int n) : number(n) {
    if (n < 0 || n > 255) throw std::invalid_argument("ECA rule must be in [0,255]");
  }
};

// Evolution of a width-w elementary cellular automaton with cyclic boundary.
// Row 0 is the initial state; each following row applies the rule once.
BinaryTensor eca_evolve(EcaRule rule, const BinaryTensor& init, int steps);

// Boolean network: node i has k distinct input nodes and a truth table of
// 2^k bits indexed by the input states, first listed input as MSB.
struct NkNetwork {
  int n = 0;
  int k = 0;
  std::vector<std::vector<int>> inputs;
  std::vector<std::vector<uint8_t>> functions;

  void validate() const;
};

// Concatenation of the n-bit states after each synchronous update; the
// initial state is not included, so the result is 1 x (n*steps).
BinaryTensor nk_evolve(const NkNetwork& net, const std::vector<uint8_t>& init, int steps);

// The four named rules used by the NK classification tasks, with their
// 2-bit codes as serialized in conditional table keys.
enum class NkRule : uint8_t { And = 0, Or = 1, Nand = 2, XOr = 3 };
std::vector<uint8_t> nk_rule_truth_table(NkRule r);
const char* nk_rule_name(NkRule r);

enum class Split { training, validation, test };
const char* split_name(Split s);

struct Sample {
  BinaryTensor tensor;
  std::string label;
};

struct LabelledDataset {
  std::vector<Sample> samples;
  Split split = Split::training;
  uint64_t seed = 0;

  std::vector<std::string> classes() const;  // sorted distinct labels
  void check_uniform_shape() const;
};

struct DatasetBundle {
  LabelledDataset training;
  LabelledDataset validation;
  LabelledDataset test;
  std::string task;
  uint64_t seed = 0;
  std::vector<std::string> classes;
};

// 11 ECA rules, 25 samples per class for training/validation and 125 for
// test; each sample is the 32x32 evolution of a random 32-bit row.
extern const std::vector<int> kEcaRuleClasses;
DatasetBundle gen_eca_rule_dataset(uint64_t seed, int train_per_class = 25,
                                   int test_per_class = 125);

// Classes are width-bit integers; a sample is the `steps`-row evolution of
// the class string under a random rule in [0, n_rules), with the
// initialization row removed. width=12 uses the ten fixed class integers;
// other widths draw `n_classes` distinct random integers.
extern const std::vector<uint32_t> kEcaInitClasses12;
DatasetBundle gen_eca_init_dataset(uint64_t seed, int width = 12, int steps = 4,
                                   int n_rules = 128, int samples_per_class = 20,
                                   int n_classes = 0);

enum class NkTask { k_class, rules, topology };
struct NkGenOptions {
  int topology_nodes = 10;   // node count for the topology task
  bool require_nand = false; // additionally require Nand in rule lists
};
DatasetBundle gen_nk_datasets(NkTask task, uint64_t seed, const NkGenOptions& opts = {});

// Strict threshold mask: value above `threshold` maps to 1.
BinaryTensor binarize(const std::vector<double>& values, int rows, int cols,
                      double threshold = 0.5);

// Shuffles pct_pixels of the pixel positions within each selected sample
// (a permutation: the multiset of pixel values is unchanged).
struct SaltResult {
  LabelledDataset dataset;
  std::vector<size_t> salted_indices;
};
SaltResult salt(const LabelledDataset& ds, double pct_samples, double pct_pixels,
                uint64_t seed);

// One sample per line: <class_label>\t<RxC>:<bits>
void save_dataset(const LabelledDataset& ds, const std::filesystem::path& path);
LabelledDataset load_dataset(const std::filesystem::path& path);

void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir);
DatasetBundle load_bundle(const std::filesystem::path& dir);

}  // namespace apml
