#include "apml/tensor.hpp"

#include <charconv>

namespace apml {

namespace {

std::vector<uint8_t> parse_bits01(const std::string& s) {
  std::vector<uint8_t> out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '0')
      out.push_back(0);
    else if (c == '1')
      out.push_back(1);
    else
      throw std::invalid_argument("invalid bit character in tensor literal");
  }
  return out;
}

}  // namespace

BinaryTensor BinaryTensor::parse(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos) return vector_from_bits(text);
  auto x = text.find('x');
  if (x == std::string::npos || x > colon)
    throw std::invalid_argument("expected RxC:bits, got: " + text);
  int rows = 0, cols = 0;
  auto r1 = std::from_chars(text.data(), text.data() + x, rows);
  auto r2 = std::from_chars(text.data() + x + 1, text.data() + colon, cols);
  if (r1.ec != std::errc{} || r2.ec != std::errc{} || rows < 1 || cols < 1)
    throw std::invalid_argument("bad tensor shape prefix: " + text);
  return BinaryTensor(rows, cols, parse_bits01(text.substr(colon + 1)));
}

BinaryTensor BinaryTensor::vector_from_bits(const std::string& bits01) {
  auto bits = parse_bits01(bits01);
  if (bits.empty()) throw std::invalid_argument("empty tensor literal");
  return BinaryTensor(1, static_cast<int>(bits.size()), std::move(bits));
}

std::string BinaryTensor::bit_string() const {
  std::string s(bits_.size(), '0');
  for (size_t i = 0; i < bits_.size(); ++i) s[i] = bits_[i] ? '1' : '0';
  return s;
}

std::string BinaryTensor::to_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_) + ":" + bit_string();
}

BinaryTensor BinaryTensor::submatrix(int r0, int c0, int nrows, int ncols) const {
  if (r0 < 0 || c0 < 0 || r0 + nrows > rows_ || c0 + ncols > cols_)
    throw std::out_of_range("submatrix out of range");
  BinaryTensor out(nrows, ncols);
  for (int r = 0; r < nrows; ++r)
    for (int c = 0; c < ncols; ++c) out.set(r, c, at(r0 + r, c0 + c));
  return out;
}

void BinaryTensor::assign_submatrix(int r0, int c0, const BinaryTensor& block) {
  if (r0 < 0 || c0 < 0 || r0 + block.rows() > rows_ || c0 + block.cols() > cols_)
    throw std::out_of_range("assign_submatrix out of range");
  for (int r = 0; r < block.rows(); ++r)
    for (int c = 0; c < block.cols(); ++c) set(r0 + r, c0 + c, block.at(r, c));
}

BinaryTensor BinaryTensor::vstack(const BinaryTensor& a, const BinaryTensor& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("vstack column mismatch");
  BinaryTensor out(a.rows() + b.rows(), a.cols());
  out.assign_submatrix(0, 0, a);
  out.assign_submatrix(a.rows(), 0, b);
  return out;
}

uint64_t bits_to_uint(const BinaryTensor& t) {
  if (t.size() > 64) throw std::invalid_argument("tensor too wide for uint");
  uint64_t v = 0;
  for (uint8_t b : t.bits()) v = (v << 1) | b;
  return v;
}

BinaryTensor uint_to_bits(uint64_t value, int width) {
  if (width < 1 || width > 64) throw std::invalid_argument("bad bit width");
  BinaryTensor t(1, width);
  for (int i = 0; i < width; ++i)
    t.set(0, width - 1 - i, static_cast<uint8_t>((value >> i) & 1));
  return t;
}

}  // namespace apml
