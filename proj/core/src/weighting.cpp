#include "apml/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "apml/io.hpp"
#include "apml/parallel.hpp"

namespace apml {

void WeightSpec::validate() const {
  if (tiers.empty()) throw std::invalid_argument("weight spec needs at least one tier");
  for (size_t i = 0; i < tiers.size(); ++i) {
    if (tiers[i].phi < 0 || tiers[i].phi > 100)
      throw std::invalid_argument("percentile out of [0,100]");
    if (tiers[i].gamma <= 0) throw std::invalid_argument("weights must be positive");
    if (i > 0 && tiers[i].phi >= tiers[i - 1].phi)
      throw std::invalid_argument("percentiles must be strictly decreasing");
  }
  if (tiers.back().phi != 0)
    throw std::invalid_argument("last tier must have phi = 0 as catch-all");
}

double ClassQuantiles::percentile(const std::string& label, double phi) const {
  auto it = sorted_values.find(label);
  if (it == sorted_values.end()) throw std::invalid_argument("unknown class " + label);
  const auto& v = it->second;
  if (phi <= 0.0) return v.front();
  const size_t n = v.size();
  // Nearest rank: smallest value with at least phi% of the class at or
  // below it.
  auto rank = static_cast<size_t>(std::ceil(phi / 100.0 * static_cast<double>(n)));
  if (rank < 1) rank = 1;
  if (rank > n) rank = n;
  return v[rank - 1];
}

ClassQuantiles class_quantiles(const LabelledDataset& ds, const CtmTable& table,
                               const PartitionStrategy& s) {
  if (ds.samples.empty()) throw std::invalid_argument("empty dataset");
  ClassQuantiles q;
  q.sample_values.resize(ds.samples.size());
  parallel_chunks(ds.samples.size(), [&](size_t begin, size_t end, size_t) {
    for (size_t i = begin; i < end; ++i)
      q.sample_values[i] = bdm(ds.samples[i].tensor, table, s);
  });
  for (size_t i = 0; i < ds.samples.size(); ++i)
    q.sorted_values[ds.samples[i].label].push_back(q.sample_values[i]);
  for (auto& [label, values] : q.sorted_values) std::sort(values.begin(), values.end());
  return q;
}

double weight_for(const std::string& label, double complexity, const WeightSpec& spec,
                  const ClassQuantiles& quantiles) {
  spec.validate();
  for (const auto& tier : spec.tiers)
    if (complexity >= quantiles.percentile(label, tier.phi)) return tier.gamma;
  return spec.tiers.back().gamma;  // unreachable: phi=0 always fires
}

double weight(const BinaryTensor& x, const std::string& label, const WeightSpec& spec,
              const ClassQuantiles& quantiles, const CtmTable& table,
              const PartitionStrategy& s) {
  return weight_for(label, bdm(x, table, s), spec, quantiles);
}

std::vector<WeightRow> export_weights(const LabelledDataset& ds, const WeightSpec& spec,
                                      const CtmTable& table, const PartitionStrategy& s,
                                      const std::filesystem::path& path) {
  spec.validate();
  ClassQuantiles q = class_quantiles(ds, table, s);
  std::vector<WeightRow> rows;
  rows.reserve(ds.samples.size());
  for (size_t i = 0; i < ds.samples.size(); ++i) {
    const auto& label = ds.samples[i].label;
    rows.push_back({i, label, q.sample_values[i],
                    weight_for(label, q.sample_values[i], spec, q)});
  }
  if (!path.empty()) {
    std::ostringstream out;
    out << "index,class,bdm,weight\n";
    for (const auto& r : rows)
      out << r.index << "," << r.label << "," << format_fixed6(r.bdm_value) << ","
          << format_fixed6(r.weight) << "\n";
    atomic_write_file(path, out.str());
  }
  return rows;
}

}  // namespace apml
