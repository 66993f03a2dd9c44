#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "apml/bdm.hpp"
#include "apml/generators.hpp"

namespace apml {

// Ordered weighting tiers, highest percentile first, last tier phi = 0 as
// catch-all. A sample fires the first tier whose class-percentile value
// its complexity reaches.
struct WeightTier {
  double phi;    // percentile in [0,100]
  double gamma;  // positive weight
};

struct WeightSpec {
  std::vector<WeightTier> tiers;

  void validate() const;
  static WeightSpec default_spec() { return {{{75, 0.01}, {50, 0.5}, {0, 2}}}; }
};

// Per-class sorted per-sample complexities with nearest-rank percentile
// lookup.
struct ClassQuantiles {
  std::map<std::string, std::vector<double>> sorted_values;
  std::vector<double> sample_values;  // per dataset index

  double percentile(const std::string& label, double phi) const;
};

ClassQuantiles class_quantiles(const LabelledDataset& ds, const CtmTable& table,
                               const PartitionStrategy& s);

double weight_for(const std::string& label, double complexity, const WeightSpec& spec,
                  const ClassQuantiles& quantiles);

double weight(const BinaryTensor& x, const std::string& label, const WeightSpec& spec,
              const ClassQuantiles& quantiles, const CtmTable& table,
              const PartitionStrategy& s);

struct WeightRow {
  size_t index;
  std::string label;
  double bdm_value;
  double weight;
};

// CSV `index,class,bdm,weight`, ordered by index.
std::vector<WeightRow> export_weights(const LabelledDataset& ds, const WeightSpec& spec,
                                      const CtmTable& table, const PartitionStrategy& s,
                                      const std::filesystem::path& path);

}  // namespace apml
