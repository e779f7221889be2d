#pragma once

// Reference implementations used only by tests. Each one is written directly
// from the defining formula, independent of the library's code paths, so a
// shared bug cannot hide on both sides of a comparison.

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace oracle {

// Naive O(L^2) real DFT of one column: re[k] = sum x[n] cos(2 pi k n / L),
// im[k] = -sum x[n] sin(2 pi k n / L), k = 0..L/2.
inline std::pair<std::vector<double>, std::vector<double>> naive_dft(
    const std::vector<double>& x) {
  const std::size_t len = x.size();
  const std::size_t half = len / 2 + 1;
  std::vector<double> re(half, 0.0), im(half, 0.0);
  const double pi = std::acos(-1.0);
  for (std::size_t k = 0; k < half; ++k) {
    double sr = 0.0, si = 0.0;
    for (std::size_t n = 0; n < len; ++n) {
      const double arg = 2.0 * pi * static_cast<double>(k) *
                         static_cast<double>(n) / static_cast<double>(len);
      sr += x[n] * std::cos(arg);
      si -= x[n] * std::sin(arg);
    }
    re[k] = sr;
    im[k] = si;
  }
  return {re, im};
}

// Inverse of the transform above, summed straight from the synthesis formula.
inline std::vector<double> naive_idft(const std::vector<double>& re,
                                      const std::vector<double>& im,
                                      std::size_t len) {
  std::vector<double> x(len, 0.0);
  const double pi = std::acos(-1.0);
  const std::size_t half = len / 2 + 1;
  for (std::size_t n = 0; n < len; ++n) {
    double s = 0.0;
    for (std::size_t k = 0; k < half; ++k) {
      const double ak = (k == 0 || 2 * k == len) ? 1.0 : 2.0;
      const double arg = 2.0 * pi * static_cast<double>(k) *
                         static_cast<double>(n) / static_cast<double>(len);
      s += (ak / static_cast<double>(len)) *
           (re[k] * std::cos(arg) - im[k] * std::sin(arg));
    }
    x[n] = s;
  }
  return x;
}

// Straight-line forecast metrics, written from the definitions. Pairs where
// |truth| < eps are dropped from the percentage error only.
struct Metrics {
  double mse = 0.0, mae = 0.0, rmse = 0.0, mape = 0.0;
  std::size_t n = 0;
  std::size_t mape_kept = 0;
  bool mape_defined = false;
};

inline Metrics metrics_of(const std::vector<double>& truth,
                          const std::vector<double>& pred,
                          double mape_eps = 1e-8) {
  Metrics m;
  m.n = truth.size();
  double sse = 0.0, sae = 0.0, spe = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double e = truth[i] - pred[i];
    sse += e * e;
    sae += std::abs(e);
    if (std::abs(truth[i]) >= mape_eps) {
      spe += std::abs(e / truth[i]);
      ++m.mape_kept;
    }
  }
  m.mse = sse / static_cast<double>(m.n);
  m.mae = sae / static_cast<double>(m.n);
  m.rmse = std::sqrt(m.mse);
  if (m.mape_kept > 0) {
    m.mape = 100.0 * spe / static_cast<double>(m.mape_kept);
    m.mape_defined = true;
  }
  return m;
}

}  // namespace oracle
