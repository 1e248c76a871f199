#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "crossmatch/core/error.hpp"
#include "crossmatch/core/sensor_field.hpp"
#include "crossmatch/detection/events.hpp"

namespace crossmatch {

// View of one packed row: `bits` meaningful bits spread over `words`,
// least-significant bit first. Bits past `bits` are always zero.
struct BitRow {
  std::span<const std::uint64_t> words;
  std::size_t bits = 0;
};

/// Time x sensor binary matrix, rows packed into 64-bit words.
class BinaryActivationMatrix {
public:
  BinaryActivationMatrix() = default;
  BinaryActivationMatrix(std::size_t rows, std::size_t cols, double dt)
      : rows_(rows), cols_(cols), stride_((cols + 63) / 64), dt_(dt), words_(rows * stride_, 0) {}

  static BinaryActivationMatrix from_rows(std::initializer_list<std::initializer_list<int>> rows, double dt = 1.0) {
    std::size_t cols = rows.size() ? rows.begin()->size() : 0;
    BinaryActivationMatrix m(rows.size(), cols, dt);
    std::size_t r = 0;
    for (const auto& row : rows) {
      require(row.size() == cols, "ragged matrix literal");
      std::size_t c = 0;
      for (int v : row) m.set(r, c++, v != 0);
      ++r;
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double dt() const { return dt_; }
  std::size_t stride() const { return stride_; }

  bool get(std::size_t r, std::size_t c) const { return (words_[r * stride_ + c / 64] >> (c % 64)) & 1u; }
  void set(std::size_t r, std::size_t c, bool v) {
    auto& w = words_[r * stride_ + c / 64];
    std::uint64_t bit = std::uint64_t{1} << (c % 64);
    w = v ? (w | bit) : (w & ~bit);
  }
  void flip(std::size_t r, std::size_t c) { words_[r * stride_ + c / 64] ^= std::uint64_t{1} << (c % 64); }

  BitRow row(std::size_t r) const { return {std::span(words_).subspan(r * stride_, stride_), cols_}; }

  std::size_t row_popcount(std::size_t r) const {
    std::size_t n = 0;
    for (auto w : row(r).words) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }
  std::size_t popcount() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  void append_row(std::span<const std::uint64_t> packed) {
    require(packed.size() == stride_, "row width mismatch");
    words_.insert(words_.end(), packed.begin(), packed.end());
    ++rows_;
  }

  // Copy of the rows in [first, first + count).
  BinaryActivationMatrix slice(std::size_t first, std::size_t count) const {
    BinaryActivationMatrix m(0, cols_, dt_);
    for (std::size_t r = first; r < first + count; ++r) m.append_row(row(r).words);
    return m;
  }

  // Matrix with `before` and `after` all-zero rows around this one.
  BinaryActivationMatrix padded(std::size_t before, std::size_t after) const {
    BinaryActivationMatrix m(rows_ + before + after, cols_, dt_);
    std::copy(words_.begin(), words_.end(), m.words_.begin() + static_cast<std::ptrdiff_t>(before * stride_));
    return m;
  }

  BinaryActivationMatrix permuted_columns(std::span<const std::size_t> map) const {
    require(map.size() == cols_, "column map size mismatch");
    BinaryActivationMatrix m(rows_, cols_, dt_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c)
        if (get(r, c)) m.set(r, map[c], true);
    return m;
  }

  bool operator==(const BinaryActivationMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && dt_ == o.dt_ && words_ == o.words_;
  }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t stride_ = 0;
  double dt_ = 0.0;
  std::vector<std::uint64_t> words_;
};

inline std::size_t time_cell(double t, double dt) {
  // Slack absorbs representation error for timestamps that are exact multiples of dt.
  double q = std::floor(t / dt + 1e-9);
  require(q >= 0, "negative timestamp cannot be binned");
  return static_cast<std::size_t>(q);
}

/// Resamples activation frames onto a uniform dt grid (cell = floor(t / dt)),
/// columns in canonical field order. Cells without any active sensor are
/// dropped so that every remaining row has at least one set bit.
inline BinaryActivationMatrix binarize(std::span<const ActivationFrame> frames, const SensorField& field, double dt) {
  require(std::isfinite(dt) && dt > 0, "dt must be positive");
  BinaryActivationMatrix m(0, field.size(), dt);
  std::vector<std::uint64_t> cur(m.stride(), 0);
  bool have = false;
  std::size_t cell = 0;
  auto flush = [&] {
    bool any = false;
    for (auto w : cur) any = any || w != 0;
    if (any) m.append_row(cur);
    std::fill(cur.begin(), cur.end(), 0);
  };
  for (const auto& f : frames) {
    if (f.active.empty()) continue;
    std::size_t c = time_cell(f.t, dt);
    if (have && c != cell) flush();
    require(!have || c >= cell, "activation frames must be time-ordered");
    cell = c;
    have = true;
    for (auto col : f.active) {
      require(col < field.size(), "activation column out of range");
      cur[col / 64] |= std::uint64_t{1} << (col % 64);
    }
  }
  if (have) flush();
  require(m.rows() > 0, "no activations to binarize");
  return m;
}

inline BinaryActivationMatrix binarize(const Event& event, const SensorField& field, double dt) {
  return binarize(std::span<const ActivationFrame>(event.frames), field, dt);
}

// Dataset flavour: runs the detector over raw readings first.
inline BinaryActivationMatrix binarize(std::span<const Reading> readings, const SensorField& field,
                                       const DetectorConfig& detector, double dt) {
  require(!readings.empty(), "empty dataset");
  auto frames = detect_activations(readings, field, detector);
  return binarize(std::span<const ActivationFrame>(frames), field, dt);
}

// ---- activation.bin -------------------------------------------------------
// 16-byte header: "CAVB", u32 rows, u32 cols, u32 reserved (0), all
// little-endian; then rows*cols bits packed row-major, LSB first within each
// byte, zero-padded to a whole byte.

namespace detail {
inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFFu));
}
inline std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
}
}  // namespace detail

inline std::vector<unsigned char> encode_activation_bin(const BinaryActivationMatrix& m) {
  std::vector<unsigned char> out{'C', 'A', 'V', 'B'};
  detail::put_u32(out, static_cast<std::uint32_t>(m.rows()));
  detail::put_u32(out, static_cast<std::uint32_t>(m.cols()));
  detail::put_u32(out, 0);
  std::size_t nbits = m.rows() * m.cols();
  std::vector<unsigned char> body((nbits + 7) / 8, 0);
  std::size_t k = 0;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c, ++k)
      if (m.get(r, c)) body[k / 8] |= static_cast<unsigned char>(1u << (k % 8));
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

inline BinaryActivationMatrix decode_activation_bin(std::span<const unsigned char> bytes, double dt) {
  require(bytes.size() >= 16 && std::memcmp(bytes.data(), "CAVB", 4) == 0, "not an activation matrix (bad magic)");
  std::size_t rows = detail::get_u32(bytes.data() + 4);
  std::size_t cols = detail::get_u32(bytes.data() + 8);
  std::size_t nbits = rows * cols;
  require(bytes.size() == 16 + (nbits + 7) / 8, "activation matrix size does not match its header");
  BinaryActivationMatrix m(rows, cols, dt);
  for (std::size_t k = 0; k < nbits; ++k)
    if ((bytes[16 + k / 8] >> (k % 8)) & 1u) m.set(k / cols, k % cols, true);
  return m;
}

inline void save_activation_bin(const std::string& path, const BinaryActivationMatrix& m) {
  auto bytes = encode_activation_bin(m);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline BinaryActivationMatrix load_activation_bin(const std::string& path, double dt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_activation_bin(bytes, dt);
}

}  // namespace crossmatch
