#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "apml/ctm.hpp"
#include "apml/tensor.hpp"

namespace apml {

class CondCtmTable;

enum class LeftoverPolicy { discard, keep_if_scored };

// Non-overlapping row-major tiling into block_rows x block_cols blocks.
// Trailing fragments smaller than the block are dropped by default;
// keep_if_scored keeps a fragment only when the scoring table contains it.
struct PartitionStrategy {
  int block_rows = 1;
  int block_cols = 1;
  LeftoverPolicy leftover = LeftoverPolicy::discard;

  static PartitionStrategy vector_blocks(int width) { return {1, width}; }
};

// Decomposition Adj(X): distinct blocks with multiplicities. Keys are
// row-major 01 strings; all full blocks share the strategy's shape, kept
// fragments are always single-row.
struct BlockMultiset {
  std::map<std::string, uint64_t> counts;

  uint64_t total_blocks() const;
  bool operator==(const BlockMultiset& o) const { return counts == o.counts; }
};

BlockMultiset partition(const BinaryTensor& x, const PartitionStrategy& s,
                        const CtmTable* table = nullptr);

// Def: 0 when multiplicities agree, log2(nx) otherwise.
double f_multiplicity(uint64_t nx, uint64_t ny);

double bdm_from_multiset(const BlockMultiset& adj, const CtmTable& table);
double bdm(const BinaryTensor& x, const CtmTable& table, const PartitionStrategy& s);

// Coarse conditional BDM: full cost for blocks of X absent from Y, the
// multiplicity term f for shared blocks.
double cond_bdm_coarse_from_multisets(const BlockMultiset& x, const BlockMultiset& y,
                                      const CtmTable& table);
double cond_bdm_coarse(const BinaryTensor& x, const BinaryTensor& y,
                       const CtmTable& table, const PartitionStrategy& s);

// Strong conditional BDM. Y blocks pair without restriction, so the best
// pairing decomposes per X block:
//   sum over (rx,nx) of min over (ry,ny) of pair_score(rx|ry) + f(nx,ny)
// pair_score is 0 for identical blocks; otherwise the conditional table
// lookup clamped to ctm(rx), or plain ctm(rx) when no table is given
// (fallback mode).
double cond_bdm_strong_from_multisets(const BlockMultiset& x, const BlockMultiset& y,
                                      const CondCtmTable* cond, const CtmTable& table);
double cond_bdm_strong(const BinaryTensor& x, const BinaryTensor& y,
                       const CondCtmTable* cond, const CtmTable& table,
                       const PartitionStrategy& s);

// JointBDM(X,Y) = BDM(Y|X) + BDM(X); MutualBDM(X,Y) = BDM(X) - BDM(X|Y).
double joint_bdm(const BinaryTensor& x, const BinaryTensor& y, const CtmTable& table,
                 const PartitionStrategy& s);
double mutual_bdm(const BinaryTensor& x, const BinaryTensor& y, const CtmTable& table,
                  const PartitionStrategy& s);

// Shannon entropy of the empirical block distribution.
double block_entropy(const BinaryTensor& x, const PartitionStrategy& s);
// H(X|Y) over position-aligned block pairs: H(pairs) - H(Y blocks).
// Requires equal shapes.
double cond_entropy(const BinaryTensor& x, const BinaryTensor& y,
                    const PartitionStrategy& s);

}  // namespace apml
