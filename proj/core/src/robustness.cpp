#include "apml/robustness.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "apml/io.hpp"
#include "apml/parallel.hpp"

namespace apml {

namespace {

std::string dataset_checksum(const LabelledDataset& ds) {
  std::string all;
  for (const auto& s : ds.samples) {
    all += s.label;
    all += '\t';
    all += s.tensor.bit_string();
    all += '\n';
  }
  return fnv1a_hex(all);
}

// Count-array evaluation of the coarse distance for single-row blocks;
// avoids re-partitioning the sample for each of the rows*cols flips.
struct FastSweeper {
  int block_cols;
  size_t n_types;
  std::vector<std::string> labels;
  std::vector<std::vector<uint16_t>> centroid_counts;
  std::vector<double> type_ctm;
  std::vector<double> log2_tab;

  FastSweeper(const CentroidModel& model, const CtmTable& table, size_t max_mult)
      : block_cols(model.mode.strategy.block_cols),
        n_types(size_t{1} << model.mode.strategy.block_cols) {
    type_ctm.resize(n_types);
    std::string key(static_cast<size_t>(block_cols), '0');
    for (size_t v = 0; v < n_types; ++v) {
      for (int i = 0; i < block_cols; ++i)
        key[block_cols - 1 - i] = ((v >> i) & 1) ? '1' : '0';
      type_ctm[v] = table.value(key);
    }
    log2_tab.resize(max_mult + 2, 0.0);
    for (size_t n = 1; n < log2_tab.size(); ++n)
      log2_tab[n] = std::log2(static_cast<double>(n));
    for (const auto& [label, centroid] : model.centroids) {
      labels.push_back(label);
      std::vector<uint16_t> counts(n_types, 0);
      for (int r = 0; r < centroid.rows(); ++r)
        for (int c = 0; c + block_cols <= centroid.cols(); c += block_cols) {
          uint16_t v = 0;
          for (int b = 0; b < block_cols; ++b)
            v = static_cast<uint16_t>((v << 1) | centroid.at(r, c + b));
          ++counts[v];
        }
      centroid_counts.push_back(std::move(counts));
    }
  }

  size_t predict_index(const std::vector<uint16_t>& cx) const {
    size_t best = 0;
    double best_d = 0.0;
    for (size_t k = 0; k < labels.size(); ++k) {
      const auto& cc = centroid_counts[k];
      double d = 0.0;
      for (size_t v = 0; v < n_types; ++v) {
        if (cx[v] == 0) continue;
        if (cc[v] == 0)
          d += type_ctm[v] + log2_tab[cx[v]];
        else if (cx[v] != cc[v])
          d += log2_tab[cx[v]];
      }
      if (k == 0 || d < best_d) {
        best_d = d;
        best = k;
      }
    }
    return best;
  }
};

}  // namespace

SweepReport one_pixel_sweep(const CentroidModel& model, const DistanceContext& ctx,
                            const LabelledDataset& ds) {
  if (ds.samples.empty()) throw std::invalid_argument("empty dataset");
  ds.check_uniform_shape();
  SweepReport report;
  report.samples = ds.samples.size();
  report.pixels_per_sample = ds.samples.front().tensor.size();
  report.checksum_before = dataset_checksum(ds);

  const bool fast = model.mode.kind == DistanceKind::cond_bdm_coarse &&
                    ctx.table != nullptr && model.mode.strategy.block_rows == 1 &&
                    model.mode.strategy.block_cols <= 12 &&
                    model.mode.strategy.leftover == LeftoverPolicy::discard &&
                    ds.samples.front().tensor.cols() % model.mode.strategy.block_cols == 0;

  std::vector<uint64_t> per_sample(ds.samples.size(), 0);
  if (fast) {
    FastSweeper sweeper(model, *ctx.table, report.pixels_per_sample);
    const int b = sweeper.block_cols;
    parallel_chunks(ds.samples.size(), [&](size_t begin, size_t end, size_t) {
      for (size_t i = begin; i < end; ++i) {
        const BinaryTensor& x = ds.samples[i].tensor;
        const int per_row = x.cols() / b;
        std::vector<uint16_t> blocks(static_cast<size_t>(x.rows()) * per_row, 0);
        std::vector<uint16_t> cx(sweeper.n_types, 0);
        for (int r = 0; r < x.rows(); ++r)
          for (int g = 0; g < per_row; ++g) {
            uint16_t v = 0;
            for (int k = 0; k < b; ++k)
              v = static_cast<uint16_t>((v << 1) | x.at(r, g * b + k));
            blocks[static_cast<size_t>(r) * per_row + g] = v;
            ++cx[v];
          }
        const size_t clean = sweeper.predict_index(cx);
        for (int r = 0; r < x.rows(); ++r)
          for (int c = 0; c < x.cols(); ++c) {
            const size_t tile = static_cast<size_t>(r) * per_row + c / b;
            const uint16_t old_v = blocks[tile];
            const auto new_v =
                static_cast<uint16_t>(old_v ^ (1u << (b - 1 - (c % b))));
            --cx[old_v];
            ++cx[new_v];
            blocks[tile] = new_v;
            if (sweeper.predict_index(cx) != clean) ++per_sample[i];
            --cx[new_v];
            ++cx[old_v];
            blocks[tile] = old_v;
          }
      }
    });
  } else {
    parallel_chunks(ds.samples.size(), [&](size_t begin, size_t end, size_t) {
      for (size_t i = begin; i < end; ++i) {
        BinaryTensor x = ds.samples[i].tensor;
        const std::string clean = predict(model, ctx, x);
        for (int r = 0; r < x.rows(); ++r)
          for (int c = 0; c < x.cols(); ++c) {
            x.flip(r, c);
            if (predict(model, ctx, x) != clean) ++per_sample[i];
            x.flip(r, c);
          }
      }
    });
  }

  for (uint64_t v : per_sample) report.total_vulnerabilities += v;
  report.per_sample_mean =
      static_cast<double>(report.total_vulnerabilities) / static_cast<double>(report.samples);
  report.pct_pixels = static_cast<double>(report.total_vulnerabilities) /
                      (static_cast<double>(report.samples) *
                       static_cast<double>(report.pixels_per_sample));
  report.checksum_after = dataset_checksum(ds);
  return report;
}

}  // namespace apml
