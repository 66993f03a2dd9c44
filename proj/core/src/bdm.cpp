#include "apml/bdm.hpp"

#include <cmath>
#include <stdexcept>

#include "apml/cond_ctm.hpp"

namespace apml {

namespace {

double ctm_by_key(const CtmTable& table, const std::string& key, int rows) {
  if (table.is_1d()) {
    if (rows != 1) throw std::invalid_argument("2d block scored against a 1d table");
  }
  return table.value(key);
}

void check_block_shape(const CtmTable& table, const PartitionStrategy& s) {
  if (table.is_1d()) {
    if (s.block_rows != 1)
      throw std::invalid_argument("1d table requires single-row blocks");
  } else {
    auto [r, c] = table.block_shape_2d();
    if (s.block_rows != r || s.block_cols != c)
      throw std::invalid_argument("block shape does not match table domain");
  }
}

bool fragment_scored(const CtmTable* table, const BinaryTensor& frag) {
  if (table == nullptr) return false;
  if (table->is_1d())
    return frag.rows() == 1 && table->contains(frag.bit_string());
  auto [r, c] = table->block_shape_2d();
  return frag.rows() == r && frag.cols() == c && table->contains(frag.bit_string());
}

}  // namespace

uint64_t BlockMultiset::total_blocks() const {
  uint64_t n = 0;
  for (const auto& [k, c] : counts) n += c;
  return n;
}

BlockMultiset partition(const BinaryTensor& x, const PartitionStrategy& s,
                        const CtmTable* table) {
  if (x.size() == 0) throw std::invalid_argument("cannot partition an empty tensor");
  if (s.block_rows < 1 || s.block_cols < 1)
    throw std::invalid_argument("block dims must be >= 1");
  if (s.block_rows > x.rows() || s.block_cols > x.cols())
    throw std::invalid_argument("block does not fit inside tensor");

  BlockMultiset adj;
  const int full_r = x.rows() / s.block_rows * s.block_rows;
  const int full_c = x.cols() / s.block_cols * s.block_cols;
  for (int r = 0; r + s.block_rows <= x.rows(); r += s.block_rows)
    for (int c = 0; c + s.block_cols <= x.cols(); c += s.block_cols)
      ++adj.counts[x.submatrix(r, c, s.block_rows, s.block_cols).bit_string()];

  if (s.leftover == LeftoverPolicy::keep_if_scored) {
    // Right edge fragments (full block rows, short columns).
    if (full_c < x.cols())
      for (int r = 0; r + s.block_rows <= x.rows(); r += s.block_rows) {
        BinaryTensor frag = x.submatrix(r, full_c, s.block_rows, x.cols() - full_c);
        if (fragment_scored(table, frag)) ++adj.counts[frag.bit_string()];
      }
    // Bottom edge fragments (short rows, full block columns and corner).
    if (full_r < x.rows())
      for (int c = 0; c < x.cols(); c += s.block_cols) {
        const int w = std::min(s.block_cols, x.cols() - c);
        BinaryTensor frag = x.submatrix(full_r, c, x.rows() - full_r, w);
        if (fragment_scored(table, frag)) ++adj.counts[frag.bit_string()];
      }
  }
  return adj;
}

double f_multiplicity(uint64_t nx, uint64_t ny) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("multiplicities must be >= 1");
  return nx == ny ? 0.0 : std::log2(static_cast<double>(nx));
}

double bdm_from_multiset(const BlockMultiset& adj, const CtmTable& table) {
  double sum = 0.0;
  for (const auto& [key, n] : adj.counts)
    sum += table.value(key) + std::log2(static_cast<double>(n));
  return sum;
}

double bdm(const BinaryTensor& x, const CtmTable& table, const PartitionStrategy& s) {
  check_block_shape(table, s);
  return bdm_from_multiset(partition(x, s, &table), table);
}

double cond_bdm_coarse_from_multisets(const BlockMultiset& x, const BlockMultiset& y,
                                      const CtmTable& table) {
  double sum = 0.0;
  for (const auto& [key, nx] : x.counts) {
    auto it = y.counts.find(key);
    if (it == y.counts.end())
      sum += table.value(key) + std::log2(static_cast<double>(nx));
    else
      sum += f_multiplicity(nx, it->second);
  }
  return sum;
}

double cond_bdm_coarse(const BinaryTensor& x, const BinaryTensor& y,
                       const CtmTable& table, const PartitionStrategy& s) {
  check_block_shape(table, s);
  return cond_bdm_coarse_from_multisets(partition(x, s, &table), partition(y, s, &table),
                                        table);
}

double cond_bdm_strong_from_multisets(const BlockMultiset& x, const BlockMultiset& y,
                                      const CondCtmTable* cond, const CtmTable& table) {
  if (y.counts.empty()) throw std::invalid_argument("empty conditioning multiset");
  double sum = 0.0;
  for (const auto& [rx, nx] : x.counts) {
    const double ctm_rx = table.value(rx);
    double best = 0.0;
    bool first = true;
    for (const auto& [ry, ny] : y.counts) {
      double score;
      if (rx == ry)
        score = 0.0;  // identical blocks carry no conditional cost
      else if (cond != nullptr)
        score = std::min(cond->value(ry, rx), ctm_rx);
      else
        score = ctm_rx;
      const double cand = score + f_multiplicity(nx, ny);
      if (first || cand < best) {
        best = cand;
        first = false;
      }
    }
    sum += best;
  }
  return sum;
}

double cond_bdm_strong(const BinaryTensor& x, const BinaryTensor& y,
                       const CondCtmTable* cond, const CtmTable& table,
                       const PartitionStrategy& s) {
  check_block_shape(table, s);
  return cond_bdm_strong_from_multisets(partition(x, s, &table), partition(y, s, &table),
                                        cond, table);
}

double joint_bdm(const BinaryTensor& x, const BinaryTensor& y, const CtmTable& table,
                 const PartitionStrategy& s) {
  return cond_bdm_coarse(y, x, table, s) + bdm(x, table, s);
}

double mutual_bdm(const BinaryTensor& x, const BinaryTensor& y, const CtmTable& table,
                  const PartitionStrategy& s) {
  return bdm(x, table, s) - cond_bdm_coarse(x, y, table, s);
}

double block_entropy(const BinaryTensor& x, const PartitionStrategy& s) {
  BlockMultiset adj = partition(x, s);
  const double total = static_cast<double>(adj.total_blocks());
  double h = 0.0;
  for (const auto& [key, n] : adj.counts) {
    const double p = static_cast<double>(n) / total;
    h -= p * std::log2(p);
  }
  return h;
}

double cond_entropy(const BinaryTensor& x, const BinaryTensor& y,
                    const PartitionStrategy& s) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw std::invalid_argument("conditional entropy requires equal shapes");
  if (s.block_rows > x.rows() || s.block_cols > x.cols())
    throw std::invalid_argument("block does not fit inside tensor");
  std::map<std::string, uint64_t> pair_counts;
  std::map<std::string, uint64_t> y_counts;
  uint64_t total = 0;
  for (int r = 0; r + s.block_rows <= x.rows(); r += s.block_rows)
    for (int c = 0; c + s.block_cols <= x.cols(); c += s.block_cols) {
      std::string bx = x.submatrix(r, c, s.block_rows, s.block_cols).bit_string();
      std::string by = y.submatrix(r, c, s.block_rows, s.block_cols).bit_string();
      ++pair_counts[bx + "|" + by];
      ++y_counts[by];
      ++total;
    }
  auto entropy = [total](const std::map<std::string, uint64_t>& counts) {
    double h = 0.0;
    for (const auto& [k, n] : counts) {
      const double p = static_cast<double>(n) / static_cast<double>(total);
      h -= p * std::log2(p);
    }
    return h;
  };
  return entropy(pair_counts) - entropy(y_counts);
}

}  // namespace apml
