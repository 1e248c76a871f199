#pragma once

#include <cmath>
#include <optional>
#include <span>

namespace crossmatch {

struct LineFit {
  double intercept;
  double slope;
};

// Ordinary least squares y = intercept + slope * x, optionally weighted.
// Empty when fewer than two distinct abscissae are present.
inline std::optional<LineFit> least_squares(std::span<const double> x, std::span<const double> y,
                                            std::span<const double> w = {}) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n || (!w.empty() && w.size() != n)) return std::nullopt;
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double wi = w.empty() ? 1.0 : w[i];
    sw += wi;
    sx += wi * x[i];
    sy += wi * y[i];
  }
  if (sw <= 0) return std::nullopt;
  double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double wi = w.empty() ? 1.0 : w[i];
    sxx += wi * (x[i] - mx) * (x[i] - mx);
    sxy += wi * (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 1e-12 * sw) return std::nullopt;
  double slope = sxy / sxx;
  return LineFit{my - slope * mx, slope};
}

}  // namespace crossmatch
