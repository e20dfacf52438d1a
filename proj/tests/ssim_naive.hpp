#pragma once

// Brute-force SSIM reference: per-pixel 11x11 Gaussian-weighted moments
// computed by direct double loops with symmetric boundary indexing. Slow by
// design and kept free of the library's separable-filter shortcut so the two
// implementations can check each other.

#include <algorithm>
#include <cmath>

#include "aitv/image.hpp"

namespace testutil {

inline int mirror_naive(int i, int n) {
  if (i < 0) return -i - 1;
  if (i >= n) return 2 * n - i - 1;
  return i;
}

inline double ssim_naive(const aitv::Image& u, const aitv::Image& g,
                         double dynamic_range) {
  constexpr int r = 5;
  constexpr double sigma = 1.5;
  double w[2 * r + 1][2 * r + 1];
  double wsum = 0.0;
  for (int di = -r; di <= r; ++di)
    for (int dj = -r; dj <= r; ++dj) {
      w[di + r][dj + r] = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
      wsum += w[di + r][dj + r];
    }
  for (auto& row : w)
    for (double& v : row) v /= wsum;

  const double c1 = (0.01 * dynamic_range) * (0.01 * dynamic_range);
  const double c2 = (0.03 * dynamic_range) * (0.03 * dynamic_range);
  const int M = u.rows(), N = u.cols();
  double acc = 0.0;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < N; ++j) {
      double mu = 0.0, mg = 0.0, muu = 0.0, mgg = 0.0, mug = 0.0;
      for (int di = -r; di <= r; ++di)
        for (int dj = -r; dj <= r; ++dj) {
          const double wk = w[di + r][dj + r];
          const double a = u(mirror_naive(i + di, M), mirror_naive(j + dj, N));
          const double b = g(mirror_naive(i + di, M), mirror_naive(j + dj, N));
          mu += wk * a;
          mg += wk * b;
          muu += wk * a * a;
          mgg += wk * b * b;
          mug += wk * a * b;
        }
      const double var_u = muu - mu * mu;
      const double var_g = mgg - mg * mg;
      const double cov = mug - mu * mg;
      acc += ((2.0 * mu * mg + c1) * (2.0 * cov + c2)) /
             ((mu * mu + mg * mg + c1) * (var_u + var_g + c2));
    }
  return std::clamp(acc / (static_cast<double>(M) * N), -1.0, 1.0);
}

}  // namespace testutil
