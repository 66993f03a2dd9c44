#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace apml {

// Binary tensor in row-major order. Vectors are stored as 1xN.
// Serialized form is "RxC:bits", e.g. "2x3:010110".
class BinaryTensor {
 public:
  BinaryTensor() = default;
  BinaryTensor(int rows, int cols)
      : rows_(rows), cols_(cols), bits_(static_cast<size_t>(rows) * cols, 0) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("tensor dims must be >= 1");
  }
  BinaryTensor(int rows, int cols, std::vector<uint8_t> bits)
      : rows_(rows), cols_(cols), bits_(std::move(bits)) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("tensor dims must be >= 1");
    if (bits_.size() != static_cast<size_t>(rows) * cols)
      throw std::invalid_argument("bit count does not match shape");
    for (uint8_t b : bits_)
      if (b > 1) throw std::invalid_argument("tensor values must be 0 or 1");
  }

  // Parses either "RxC:bits" or a bare 01-string (treated as 1xN).
  static BinaryTensor parse(const std::string& text);
  static BinaryTensor vector_from_bits(const std::string& bits01);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return bits_.size(); }
  bool is_vector() const { return rows_ == 1; }

  uint8_t at(int r, int c) const { return bits_[static_cast<size_t>(r) * cols_ + c]; }
  void set(int r, int c, uint8_t v) { bits_[static_cast<size_t>(r) * cols_ + c] = v; }
  void flip(int r, int c) { bits_[static_cast<size_t>(r) * cols_ + c] ^= 1; }

  const std::vector<uint8_t>& bits() const { return bits_; }
  std::vector<uint8_t>& bits() { return bits_; }

  // Raw row-major 01 characters, no shape prefix.
  std::string bit_string() const;
  // Shape-prefixed serialization "RxC:bits".
  std::string to_string() const;

  BinaryTensor submatrix(int r0, int c0, int nrows, int ncols) const;
  void assign_submatrix(int r0, int c0, const BinaryTensor& block);

  // Rows stacked: this tensor's rows followed by other's.
  static BinaryTensor vstack(const BinaryTensor& a, const BinaryTensor& b);

  bool operator==(const BinaryTensor& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && bits_ == o.bits_;
  }
  bool operator!=(const BinaryTensor& o) const { return !(*this == o); }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<uint8_t> bits_;
};

// Unsigned value of the first `width` bits, MSB first.
uint64_t bits_to_uint(const BinaryTensor& t);
// 1xwidth tensor holding `value` MSB first.
BinaryTensor uint_to_bits(uint64_t value, int width);

}  // namespace apml
