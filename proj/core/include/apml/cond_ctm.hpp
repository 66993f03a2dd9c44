#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>

#include "apml/generators.hpp"
#include "apml/tensor.hpp"

namespace apml {

// Frequency database over (condition, outcome) pairs from an exhaustive
// enumeration of a computable space. value = -log2(count/total), or the
// missing-pair penalty when the pair was never produced.
class CondCtmTable {
 public:
  CondCtmTable() = default;
  CondCtmTable(std::string domain, double missing_penalty,
               std::map<std::string, std::string> meta = {});

  void add_pair(const std::string& condition, const std::string& outcome,
                uint64_t count = 1);
  void merge(const CondCtmTable& other);

  double value(const std::string& condition, const std::string& outcome) const;
  uint64_t count(const std::string& condition, const std::string& outcome) const;

  uint64_t total() const { return total_; }
  double missing_penalty() const { return missing_penalty_; }
  const std::string& domain() const { return domain_; }
  const std::map<std::string, std::string>& meta() const { return meta_; }
  size_t pair_count() const;
  size_t condition_count() const { return entries_.size(); }

  const std::unordered_map<std::string, std::unordered_map<std::string, uint64_t>>&
  entries() const {
    return entries_;
  }

 private:
  std::string domain_;
  double missing_penalty_ = 0.0;
  uint64_t total_ = 0;
  std::map<std::string, std::string> meta_;
  std::unordered_map<std::string, std::unordered_map<std::string, uint64_t>> entries_;
};

// -log2(count/total) or the penalty; argument order follows CTM(x|s).
double cond_ctm(const CondCtmTable& db, const std::string& outcome,
                const std::string& condition);

// All 12-bit initial strings under the first 128 ECA rules, evolved 4
// steps. Condition key: the full 12-bit string. Outcome key: the 4x12
// evolution with the initialization row removed, row-major. Missing
// pairs score 20.
CondCtmTable build_eca_cond_db();

// All 331,776 NK networks with n=4, k=2 over {And,Or,Nand,XOr}, evolved
// 10 steps from the zero state. P1 keys (topology, vector), P2 keys
// (rule list, vector). Missing pairs score 19.
struct NkCondDbs {
  CondCtmTable topology;  // P1
  CondCtmTable rules;     // P2
};
NkCondDbs build_nk_cond_dbs();

// Row-major 4x4 adjacency bits; entry (i,j)=1 when node i feeds node j.
std::string nk_topology_key(const std::vector<std::vector<int>>& inputs, int n);
// Four 2-bit codes in node order: And=00 Or=01 Nand=10 XOr=11.
std::string nk_rules_key(const std::vector<NkRule>& rules);

void persist_cond_table(const CondCtmTable& db, const std::filesystem::path& path);
CondCtmTable load_cond_table(const std::filesystem::path& path);

}  // namespace apml
