#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "crossmatch/core/error.hpp"
#include "crossmatch/matching/activation_matrix.hpp"

namespace crossmatch {

// Number of positions at which two bit rows differ (popcount of the XOR).
inline std::uint32_t hamming_rows(const BitRow& a, const BitRow& b) {
  if (a.bits != b.bits || a.words.size() != b.words.size())
    throw std::invalid_argument("hamming_rows: length mismatch (" + std::to_string(a.bits) + " vs " +
                                std::to_string(b.bits) + ")");
  std::uint32_t n = 0;
  for (std::size_t i = 0; i < a.words.size(); ++i) n += static_cast<std::uint32_t>(std::popcount(a.words[i] ^ b.words[i]));
  return n;
}

/// Pairwise row distances, always oriented so that rows() <= cols(): row i is
/// the i-th row of the shorter input, column j the j-th row of the longer one.
class DistanceMatrix {
public:
  DistanceMatrix() = default;
  DistanceMatrix(std::size_t n_k, std::size_t n_l, bool swapped)
      : n_k_(n_k), n_l_(n_l), swapped_(swapped), v_(n_k * n_l, 0) {}

  std::size_t rows() const { return n_k_; }
  std::size_t cols() const { return n_l_; }
  // True when the first pdist argument was the longer matrix.
  bool swapped() const { return swapped_; }

  std::uint32_t operator()(std::size_t i, std::size_t j) const { return v_[i * n_l_ + j]; }
  std::uint32_t& operator()(std::size_t i, std::size_t j) { return v_[i * n_l_ + j]; }

private:
  std::size_t n_k_ = 0;
  std::size_t n_l_ = 0;
  bool swapped_ = false;
  std::vector<std::uint32_t> v_;
};

// Default row metric. Any callable (BitRow, BitRow) -> uint32 can replace it.
struct HammingMetric {
  std::uint32_t operator()(const BitRow& a, const BitRow& b) const { return hamming_rows(a, b); }
};

template <typename RowMetric = HammingMetric>
DistanceMatrix pdist(const BinaryActivationMatrix& be, const BinaryActivationMatrix& bs, RowMetric metric = {}) {
  require(be.cols() == bs.cols(), "pdist: column count mismatch (" + std::to_string(be.cols()) + " vs " +
                                      std::to_string(bs.cols()) + ")");
  require(std::abs(be.dt() - bs.dt()) <= 1e-12 * std::max(1.0, std::abs(be.dt())),
          "pdist: dt mismatch between matrices");
  bool swap = be.rows() > bs.rows();
  const auto& a = swap ? bs : be;
  const auto& b = swap ? be : bs;
  DistanceMatrix m(a.rows(), b.rows(), swap);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ra = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) m(i, j) = metric(ra, b.row(j));
  }
  return m;
}

struct MatchScore {
  std::string simulation_id;
  std::uint64_t sdist = 0;
  // Diagonal index of the minimum: row i of the shorter matrix aligns with
  // row i + best_offset of the longer one. Negative only in partial-overlap
  // scoring, where the shorter matrix may hang over the start.
  std::int64_t best_offset = 0;
};

/// Minimum diagonal sum over the n_l - n_k + 1 full-length diagonals of M;
/// ties resolve to the smallest offset.
inline MatchScore sdist(const DistanceMatrix& m) {
  require(m.rows() <= m.cols(), "sdist: distance matrix must have rows <= cols");
  MatchScore best{{}, std::numeric_limits<std::uint64_t>::max(), 0};
  if (m.rows() == 0) return {{}, 0, 0};
  for (std::size_t o = 0; o + m.rows() <= m.cols(); ++o) {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < m.rows(); ++i) s += m(i, i + o);
    if (s < best.sdist) best = {{}, s, static_cast<std::int64_t>(o)};
  }
  return best;
}

/// Score of an event matrix against a simulation matrix. With
/// `min_overlap` < 1 the shorter matrix may slide partly off either end of the
/// longer one as long as ceil(min_overlap * n_k) rows overlap; overhanging
/// rows are compared against silence (cost = their popcount).
inline MatchScore score_pair(const BinaryActivationMatrix& be, const BinaryActivationMatrix& bs,
                             double min_overlap = 1.0) {
  require(min_overlap > 0.0 && min_overlap <= 1.0, "min_overlap must lie in (0, 1]");
  if (min_overlap >= 1.0) return sdist(pdist(be, bs));
  bool swap = be.rows() > bs.rows();
  const auto& shorter = swap ? bs : be;
  const auto& longer = swap ? be : bs;
  auto need = static_cast<std::size_t>(std::ceil(min_overlap * static_cast<double>(shorter.rows()) - 1e-12));
  std::size_t pad = shorter.rows() - std::max<std::size_t>(need, 1);
  auto padded = longer.padded(pad, pad);
  auto s = sdist(pdist(shorter, padded));
  s.best_offset -= static_cast<std::int64_t>(pad);
  return s;
}

}  // namespace crossmatch
