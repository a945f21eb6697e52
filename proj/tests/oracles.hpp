#pragma once

// Straightforward reference implementations used to cross-check the library.
// They deliberately avoid the library's code paths (no separable filtering,
// no shared helpers).

#include <cmath>
#include <random>
#include <vector>

#include "monocheck/metrics.hpp"

namespace monocheck::test {

inline double reference_psnr(const metrics::ImageFrame& a, const metrics::ImageFrame& b) {
  long double se = 0.0L;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const long double d = static_cast<long double>(a.data[i]) - b.data[i];
    se += d * d;
  }
  const long double mse = se / static_cast<long double>(a.data.size());
  if (mse == 0.0L) return INFINITY;
  return static_cast<double>(-10.0L * std::log10(mse));
}

/// Gaussian-window SSIM with valid windows, averaged over windows and channels.
/// Window statistics are evaluated directly in 2-D with centered moments.
inline double reference_ssim(const metrics::ImageFrame& x, const metrics::ImageFrame& y,
                             int window = 11, double sigma = 1.5) {
  const int half = window / 2;
  std::vector<double> g(static_cast<std::size_t>(window) * window);
  double gsum = 0.0;
  for (int a = 0; a < window; ++a)
    for (int b = 0; b < window; ++b) {
      const double da = a - half, db = b - half;
      g[a * window + b] = std::exp(-(da * da + db * db) / (2.0 * sigma * sigma));
      gsum += g[a * window + b];
    }
  for (auto& v : g) v /= gsum;
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double total = 0.0;
  long count = 0;
  for (int c = 0; c < 3; ++c)
    for (int v0 = 0; v0 + window <= x.height; ++v0)
      for (int u0 = 0; u0 + window <= x.width; ++u0) {
        double mx = 0, my = 0;
        for (int a = 0; a < window; ++a)
          for (int b = 0; b < window; ++b) {
            mx += g[a * window + b] * x.at(u0 + b, v0 + a, c);
            my += g[a * window + b] * y.at(u0 + b, v0 + a, c);
          }
        double vx = 0, vy = 0, cxy = 0;
        for (int a = 0; a < window; ++a)
          for (int b = 0; b < window; ++b) {
            const double dx = x.at(u0 + b, v0 + a, c) - mx;
            const double dy = y.at(u0 + b, v0 + a, c) - my;
            vx += g[a * window + b] * dx * dx;
            vy += g[a * window + b] * dy * dy;
            cxy += g[a * window + b] * dx * dy;
          }
        total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        ++count;
      }
  return total / static_cast<double>(count);
}

/// Compositing weights from explicit transmittance products.
inline std::vector<double> reference_weights(const std::vector<double>& sigma,
                                             const std::vector<double>& delta) {
  std::vector<double> w(sigma.size());
  double transmittance = 1.0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    const double alpha = 1.0 - std::exp(-sigma[i] * delta[i]);
    w[i] = transmittance * alpha;
    transmittance *= std::exp(-sigma[i] * delta[i]);
  }
  return w;
}

inline metrics::ImageFrame random_image(int w, int h, std::mt19937_64& g) {
  metrics::ImageFrame img(w, h);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (auto& v : img.data) v = d(g);
  return img;
}

}  // namespace monocheck::test
