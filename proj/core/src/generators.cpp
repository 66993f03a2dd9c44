#include "apml/generators.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include "apml/io.hpp"
#include "apml/parallel.hpp"

#include "json.hpp"

namespace apml {

const std::vector<int> kEcaRuleClasses = {167, 11, 129, 215, 88, 32, 237, 156, 173, 236, 110};
const std::vector<uint32_t> kEcaInitClasses12 = {704,  3572, 3067, 3184, 1939,
                                                 2386, 2896, 205,  828,  3935};

BinaryTensor eca_evolve(EcaRule rule, const BinaryTensor& init, int steps) {
  if (!init.is_vector()) throw std::invalid_argument("ECA init must be a row vector");
  const int w = init.cols();
  if (w < 3) throw std::invalid_argument("ECA width must be >= 3");
  if (steps < 0) throw std::invalid_argument("steps must be >= 0");
  BinaryTensor out(steps + 1, w);
  out.assign_submatrix(0, 0, init);
  for (int t = 1; t <= steps; ++t)
    for (int c = 0; c < w; ++c) {
      const uint8_t l = out.at(t - 1, (c + w - 1) % w);
      const uint8_t m = out.at(t - 1, c);
      const uint8_t r = out.at(t - 1, (c + 1) % w);
      const int idx = (l << 2) | (m << 1) | r;
      out.set(t, c, static_cast<uint8_t>((rule.number >> idx) & 1));
    }
  return out;
}

void NkNetwork::validate() const {
  if (n < 1 || k < 1) throw std::invalid_argument("NK network needs n,k >= 1");
  if (static_cast<int>(inputs.size()) != n || static_cast<int>(functions.size()) != n)
    throw std::invalid_argument("NK network needs one input list and function per node");
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(inputs[i].size()) != k)
      throw std::invalid_argument("input list size must equal k");
    std::set<int> distinct(inputs[i].begin(), inputs[i].end());
    if (static_cast<int>(distinct.size()) != k)
      throw std::invalid_argument("input nodes must be distinct");
    for (int src : inputs[i])
      if (src < 0 || src >= n) throw std::invalid_argument("input node out of range");
    if (functions[i].size() != (size_t{1} << k))
      throw std::invalid_argument("truth table must have 2^k bits");
  }
}

BinaryTensor nk_evolve(const NkNetwork& net, const std::vector<uint8_t>& init, int steps) {
  net.validate();
  if (static_cast<int>(init.size()) != net.n)
    throw std::invalid_argument("init state length must equal n");
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  std::vector<uint8_t> state = init;
  std::vector<uint8_t> next(net.n);
  BinaryTensor out(1, net.n * steps);
  for (int t = 0; t < steps; ++t) {
    for (int i = 0; i < net.n; ++i) {
      int idx = 0;
      for (int src : net.inputs[i]) idx = (idx << 1) | state[src];
      next[i] = net.functions[i][idx];
    }
    state = next;
    for (int i = 0; i < net.n; ++i) out.set(0, t * net.n + i, state[i]);
  }
  return out;
}

std::vector<uint8_t> nk_rule_truth_table(NkRule r) {
  switch (r) {
    case NkRule::And:  return {0, 0, 0, 1};
    case NkRule::Or:   return {0, 1, 1, 1};
    case NkRule::Nand: return {1, 1, 1, 0};
    case NkRule::XOr:  return {0, 1, 1, 0};
  }
  throw std::invalid_argument("unknown NK rule");
}

const char* nk_rule_name(NkRule r) {
  switch (r) {
    case NkRule::And:  return "And";
    case NkRule::Or:   return "Or";
    case NkRule::Nand: return "Nand";
    case NkRule::XOr:  return "XOr";
  }
  return "?";
}

const char* split_name(Split s) {
  switch (s) {
    case Split::training:   return "training";
    case Split::validation: return "validation";
    case Split::test:       return "test";
  }
  return "?";
}

std::vector<std::string> LabelledDataset::classes() const {
  std::set<std::string> labels;
  for (const auto& s : samples) labels.insert(s.label);
  return {labels.begin(), labels.end()};
}

void LabelledDataset::check_uniform_shape() const {
  if (samples.empty()) return;
  const int r = samples.front().tensor.rows();
  const int c = samples.front().tensor.cols();
  for (const auto& s : samples)
    if (s.tensor.rows() != r || s.tensor.cols() != c)
      throw std::invalid_argument("dataset tensors must share one shape");
}

namespace {

uint64_t sample_key(int split, int cls, int idx) {
  return (static_cast<uint64_t>(split) * 1000003ull + cls) * 1000003ull + idx;
}

BinaryTensor random_row(Rng& rng, int width) {
  BinaryTensor t(1, width);
  for (int i = 0; i < width; ++i) t.set(0, i, rand_bool(rng, 0.5) ? 1 : 0);
  return t;
}

}  // namespace

DatasetBundle gen_eca_rule_dataset(uint64_t seed, int train_per_class, int test_per_class) {
  DatasetBundle bundle;
  bundle.task = "eca-rules";
  bundle.seed = seed;
  for (int r : kEcaRuleClasses) bundle.classes.push_back(std::to_string(r));

  auto gen_split = [&](Split split, int per_class) {
    LabelledDataset ds;
    ds.split = split;
    ds.seed = seed;
    const int split_idx = static_cast<int>(split);
    for (size_t ci = 0; ci < kEcaRuleClasses.size(); ++ci) {
      const int rule = kEcaRuleClasses[ci];
      for (int i = 0; i < per_class; ++i) {
        Rng rng = sub_rng(seed, sample_key(split_idx, static_cast<int>(ci), i));
        BinaryTensor init = random_row(rng, 32);
        ds.samples.push_back({eca_evolve(EcaRule(rule), init, 31), std::to_string(rule)});
      }
    }
    return ds;
  };
  bundle.training = gen_split(Split::training, train_per_class);
  bundle.validation = gen_split(Split::validation, train_per_class);
  bundle.test = gen_split(Split::test, test_per_class);
  return bundle;
}

DatasetBundle gen_eca_init_dataset(uint64_t seed, int width, int steps, int n_rules,
                                   int samples_per_class, int n_classes) {
  if (width < 3 || width > 32) throw std::invalid_argument("width must be in [3,32]");
  if (n_rules < 1 || n_rules > 256) throw std::invalid_argument("n_rules must be in [1,256]");
  std::vector<uint32_t> class_ints;
  if (width == 12 && (n_classes == 0 || n_classes == 10)) {
    class_ints = kEcaInitClasses12;
  } else {
    if (n_classes == 0) n_classes = 20;
    Rng rng = sub_rng(seed, 0xC1A55);
    std::set<uint32_t> chosen;
    while (static_cast<int>(chosen.size()) < n_classes)
      chosen.insert(static_cast<uint32_t>(rand_below(rng, uint64_t{1} << width)));
    class_ints.assign(chosen.begin(), chosen.end());
  }

  DatasetBundle bundle;
  bundle.task = "eca-init";
  bundle.seed = seed;
  for (uint32_t v : class_ints) bundle.classes.push_back(std::to_string(v));

  auto gen_split = [&](Split split) {
    LabelledDataset ds;
    ds.split = split;
    ds.seed = seed;
    const int split_idx = static_cast<int>(split);
    for (size_t ci = 0; ci < class_ints.size(); ++ci) {
      const BinaryTensor init = uint_to_bits(class_ints[ci], width);
      for (int i = 0; i < samples_per_class; ++i) {
        Rng rng = sub_rng(seed, sample_key(split_idx, static_cast<int>(ci), i));
        const int rule = static_cast<int>(rand_below(rng, n_rules));
        BinaryTensor evo = eca_evolve(EcaRule(rule), init, steps);
        // The initialization row is removed, otherwise the task is trivial.
        ds.samples.push_back({evo.submatrix(1, 0, steps, width),
                              std::to_string(class_ints[ci])});
      }
    }
    return ds;
  };
  bundle.training = gen_split(Split::training);
  bundle.validation = gen_split(Split::validation);
  bundle.test = gen_split(Split::test);
  return bundle;
}

namespace {

NkRule random_named_rule(Rng& rng) { return static_cast<NkRule>(rand_below(rng, 4)); }

std::vector<NkRule> random_rule_list(Rng& rng, int n, bool require_xor, bool require_nand) {
  while (true) {
    std::vector<NkRule> rules(n);
    for (auto& r : rules) r = random_named_rule(rng);
    const bool has_xor = std::count(rules.begin(), rules.end(), NkRule::XOr) > 0;
    const bool has_nand = std::count(rules.begin(), rules.end(), NkRule::Nand) > 0;
    if ((!require_xor || has_xor) && (!require_nand || has_nand)) return rules;
  }
}

// k distinct inputs in ascending order.
std::vector<int> random_inputs(Rng& rng, int n, int k) {
  auto picks = sample_distinct(rng, n, k);
  std::vector<int> inputs(picks.begin(), picks.end());
  std::sort(inputs.begin(), inputs.end());
  return inputs;
}

// Adjacency with exactly two 1s per column; column j holds the inputs of
// node j.
BinaryTensor random_topology_matrix(Rng& rng, int n) {
  BinaryTensor adj(n, n);
  for (int j = 0; j < n; ++j) {
    auto rows = sample_distinct(rng, n, 2);
    adj.set(static_cast<int>(rows[0]), j, 1);
    adj.set(static_cast<int>(rows[1]), j, 1);
  }
  return adj;
}

NkNetwork network_from(const std::vector<std::vector<int>>& inputs,
                       const std::vector<NkRule>& rules) {
  NkNetwork net;
  net.n = static_cast<int>(inputs.size());
  net.k = static_cast<int>(inputs.front().size());
  net.inputs = inputs;
  for (NkRule r : rules) net.functions.push_back(nk_rule_truth_table(r));
  return net;
}

std::vector<std::vector<int>> inputs_from_adjacency(const BinaryTensor& adj) {
  std::vector<std::vector<int>> inputs(adj.cols());
  for (int j = 0; j < adj.cols(); ++j)
    for (int i = 0; i < adj.rows(); ++i)
      if (adj.at(i, j)) inputs[j].push_back(i);
  return inputs;
}

}  // namespace

DatasetBundle gen_nk_datasets(NkTask task, uint64_t seed, const NkGenOptions& opts) {
  DatasetBundle bundle;
  bundle.seed = seed;

  if (task == NkTask::k_class) {
    bundle.task = "nk-k";
    bundle.classes = {"1", "2", "3"};
    const int n = 24, steps = 10, per_class = 100;
    auto gen_split = [&](Split split) {
      LabelledDataset ds;
      ds.split = split;
      ds.seed = seed;
      const int split_idx = static_cast<int>(split);
      for (int k = 1; k <= 3; ++k)
        for (int i = 0; i < per_class; ++i) {
          Rng rng = sub_rng(seed, sample_key(split_idx, k, i));
          NkNetwork net;
          net.n = n;
          net.k = k;
          for (int node = 0; node < n; ++node) {
            net.inputs.push_back(random_inputs(rng, n, k));
            // Full function range for the arity: any truth table of 2^k bits.
            std::vector<uint8_t> tt(size_t{1} << k);
            for (auto& b : tt) b = rand_bool(rng, 0.5) ? 1 : 0;
            net.functions.push_back(std::move(tt));
          }
          std::vector<uint8_t> init(n);
          for (auto& b : init) b = rand_bool(rng, 0.5) ? 1 : 0;
          ds.samples.push_back({nk_evolve(net, init, steps), std::to_string(k)});
        }
      return ds;
    };
    bundle.training = gen_split(Split::training);
    bundle.validation = gen_split(Split::validation);
    bundle.test = gen_split(Split::test);
    return bundle;
  }

  if (task == NkTask::rules) {
    bundle.task = "nk-rules";
    const int n = 4, steps = 10;
    // Ten fixed rule lists define the classes.
    Rng class_rng = sub_rng(seed, 0x101);
    std::vector<std::vector<NkRule>> class_rules;
    for (int c = 0; c < 10; ++c)
      class_rules.push_back(random_rule_list(class_rng, n, true, opts.require_nand));
    for (int c = 0; c < 10; ++c) bundle.classes.push_back("r" + std::to_string(c));

    auto gen_split = [&](Split split, int per_class) {
      LabelledDataset ds;
      ds.split = split;
      ds.seed = seed;
      const int split_idx = static_cast<int>(split);
      for (int c = 0; c < 10; ++c)
        for (int i = 0; i < per_class; ++i) {
          Rng rng = sub_rng(seed, sample_key(split_idx, c, i));
          std::vector<std::vector<int>> inputs(n);
          for (auto& in : inputs) in = random_inputs(rng, n, 2);
          NkNetwork net = network_from(inputs, class_rules[c]);
          std::vector<uint8_t> init(n, 0);
          ds.samples.push_back({nk_evolve(net, init, steps), "r" + std::to_string(c)});
        }
      return ds;
    };
    bundle.training = gen_split(Split::training, 20);
    bundle.validation = gen_split(Split::validation, 20);
    bundle.test = gen_split(Split::test, 200);
    return bundle;
  }

  // topology task
  bundle.task = "nk-topology";
  const int n = opts.topology_nodes, steps = 10;
  Rng class_rng = sub_rng(seed, 0x202);
  std::vector<BinaryTensor> class_adj;
  for (int c = 0; c < 10; ++c) class_adj.push_back(random_topology_matrix(class_rng, n));
  for (int c = 0; c < 10; ++c) bundle.classes.push_back("t" + std::to_string(c));

  auto gen_split = [&](Split split, int per_class) {
    LabelledDataset ds;
    ds.split = split;
    ds.seed = seed;
    const int split_idx = static_cast<int>(split);
    for (int c = 0; c < 10; ++c) {
      auto inputs = inputs_from_adjacency(class_adj[c]);
      for (int i = 0; i < per_class; ++i) {
        Rng rng = sub_rng(seed, sample_key(split_idx, c, i));
        auto rules = random_rule_list(rng, n, true, false);
        NkNetwork net = network_from(inputs, rules);
        std::vector<uint8_t> init(n, 0);
        ds.samples.push_back({nk_evolve(net, init, steps), "t" + std::to_string(c)});
      }
    }
    return ds;
  };
  bundle.training = gen_split(Split::training, 20);
  bundle.validation = gen_split(Split::validation, 20);
  bundle.test = gen_split(Split::test, 200);
  return bundle;
}

BinaryTensor binarize(const std::vector<double>& values, int rows, int cols,
                      double threshold) {
  if (values.size() != static_cast<size_t>(rows) * cols)
    throw std::invalid_argument("value count does not match shape");
  BinaryTensor out(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      out.set(r, c, values[static_cast<size_t>(r) * cols + c] > threshold ? 1 : 0);
  return out;
}

SaltResult salt(const LabelledDataset& ds, double pct_samples, double pct_pixels,
                uint64_t seed) {
  if (pct_samples < 0 || pct_samples > 1 || pct_pixels < 0 || pct_pixels > 1)
    throw std::invalid_argument("salting percentages must be in [0,1]");
  SaltResult result{ds, {}};
  const size_t n = ds.samples.size();
  const size_t n_salted = static_cast<size_t>(pct_samples * static_cast<double>(n) + 0.5);
  if (n_salted == 0) return result;

  Rng pick_rng = sub_rng(seed, 0x5A17);
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  shuffle_inplace(pick_rng, order);
  result.salted_indices.assign(order.begin(), order.begin() + n_salted);
  std::sort(result.salted_indices.begin(), result.salted_indices.end());

  for (size_t idx : result.salted_indices) {
    BinaryTensor& t = result.dataset.samples[idx].tensor;
    Rng rng = sub_rng(seed, 0xB17 + idx);
    const size_t pixels = t.size();
    const size_t n_pix = static_cast<size_t>(pct_pixels * static_cast<double>(pixels) + 0.5);
    if (n_pix < 2) continue;
    auto positions = sample_distinct(rng, pixels, n_pix);
    std::vector<uint8_t> vals;
    vals.reserve(n_pix);
    for (uint64_t p : positions) vals.push_back(t.bits()[p]);
    shuffle_inplace(rng, vals);
    for (size_t i = 0; i < positions.size(); ++i) t.bits()[positions[i]] = vals[i];
  }
  return result;
}

void save_dataset(const LabelledDataset& ds, const std::filesystem::path& path) {
  std::ostringstream out;
  for (const auto& s : ds.samples) out << s.label << "\t" << s.tensor.to_string() << "\n";
  atomic_write_file(path, out.str());
}

LabelledDataset load_dataset(const std::filesystem::path& path) {
  LabelledDataset ds;
  std::istringstream in(read_file(path));
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("malformed dataset line " + std::to_string(lineno));
    ds.samples.push_back({BinaryTensor::parse(line.substr(tab + 1)), line.substr(0, tab)});
  }
  ds.check_uniform_shape();
  return ds;
}

void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_dataset(bundle.training, dir / "training.tsv");
  save_dataset(bundle.validation, dir / "validation.tsv");
  save_dataset(bundle.test, dir / "test.tsv");
  nlohmann::json manifest{
      {"task", bundle.task},
      {"seed", bundle.seed},
      {"classes", bundle.classes},
      {"splits",
       {{"training", bundle.training.samples.size()},
        {"validation", bundle.validation.samples.size()},
        {"test", bundle.test.samples.size()}}},
  };
  manifest["config_hash"] = fnv1a_hex(bundle.task + ":" + std::to_string(bundle.seed));
  atomic_write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

DatasetBundle load_bundle(const std::filesystem::path& dir) {
  DatasetBundle bundle;
  auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  bundle.task = manifest.at("task").get<std::string>();
  bundle.seed = manifest.at("seed").get<uint64_t>();
  bundle.classes = manifest.at("classes").get<std::vector<std::string>>();
  bundle.training = load_dataset(dir / "training.tsv");
  bundle.training.split = Split::training;
  bundle.validation = load_dataset(dir / "validation.tsv");
  bundle.validation.split = Split::validation;
  bundle.test = load_dataset(dir / "test.tsv");
  bundle.test.split = Split::test;
  bundle.training.seed = bundle.validation.seed = bundle.test.seed = bundle.seed;
  return bundle;
}

}  // namespace apml
