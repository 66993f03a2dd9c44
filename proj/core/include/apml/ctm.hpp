#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>

#include "apml/tensor.hpp"

namespace apml {

// Space of small Turing machines: `states` work states over a binary
// alphabet, one implicit halt state. A transition writes, moves, then
// switches state; a machine that has not halted after max_steps is
// treated as non-halting.
struct TuringMachineSpec {
  int states = 2;
  int symbols = 2;  // fixed at 2 for v1
  int max_steps = 107;

  // (2*symbols*(states+1)) ^ (states*symbols)
  uint64_t machine_count() const;
};

struct EnumerationLimits {
  uint64_t max_machines = 100'000'000;  // refuses (4,2) and beyond by default
};

// Frequency-derived complexity table over binary blocks.
// 1d tables key blocks by their raw 01 string (any length); 2d tables have
// a fixed block shape and key blocks by row-major bits.
class CtmTable {
 public:
  CtmTable() = default;
  CtmTable(std::string domain, std::unordered_map<std::string, double> entries,
           uint64_t total_halting, std::string source, double missing_penalty);

  // Value in bits, or missing_penalty when the block is absent.
  double value(const std::string& block_key) const;
  bool contains(const std::string& block_key) const { return entries_.count(block_key) > 0; }

  const std::unordered_map<std::string, double>& entries() const { return entries_; }
  const std::string& domain() const { return domain_; }
  const std::string& source() const { return source_; }
  uint64_t total_halting() const { return total_halting_; }
  double missing_penalty() const { return missing_penalty_; }
  double max_value() const { return max_value_; }

  bool is_1d() const { return domain_ == "1d"; }
  // For 2d domains, expected block shape (rows, cols).
  std::pair<int, int> block_shape_2d() const;

  // Arithmetic mean of stored entries whose block has `length` bits
  // (0 = all entries). Missing blocks are not included.
  double mean_value(size_t length = 0) const;

  // Sum of 2^(-value) over entries.
  double probability_mass() const;

  bool operator==(const CtmTable& o) const;

 private:
  std::string domain_ = "1d";
  std::unordered_map<std::string, double> entries_;
  uint64_t total_halting_ = 0;
  std::string source_;
  double missing_penalty_ = 0.0;
  double max_value_ = 0.0;
};

// Runs every machine in the space from a blank tape and records the tape
// segment scanned by each halting machine. value(s) = -log2(count(s)/total),
// rounded up to 6 decimals so the probability-mass bound survives the
// 6-decimal file serialization. missing_penalty = ceil(max value) + 1.
CtmTable enumerate_machines(const TuringMachineSpec& spec,
                            const EnumerationLimits& limits = {});

void persist_table(const CtmTable& table, const std::filesystem::path& path);
CtmTable load_table(const std::filesystem::path& path);

// Table lookup for a tensor-shaped block; checks the block shape against
// the table domain.
double ctm(const CtmTable& table, const BinaryTensor& block);

}  // namespace apml
