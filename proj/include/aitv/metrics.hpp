#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "aitv/errors.hpp"
#include "aitv/image.hpp"

namespace aitv {

/// PSNR/SSIM pair plus the dynamic range L both metrics were computed
/// against. Scores are only comparable at equal L, so it travels with them.
struct QualityReport {
  double psnr_db = 0.0;  // +infinity when the images are identical
  double ssim = 0.0;
  double dynamic_range = 0.0;
};

/// 10 log10(L^2 / MSE); +infinity sentinel when MSE = 0.
inline double psnr(const Image& u, const Image& g, double dynamic_range) {
  if (!u.same_shape(g)) throw ShapeMismatch("psnr: image shapes differ");
  if (!(dynamic_range > 0.0))
    throw InvalidConfig("psnr requires dynamic_range > 0");
  double sq = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double d = u[k] - g[k];
    sq += d * d;
  }
  const double mse = sq / static_cast<double>(u.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(dynamic_range * dynamic_range / mse);
}

namespace detail {

inline constexpr int kSsimRadius = 5;  // 11x11 window
inline constexpr double kSsimSigma = 1.5;

inline std::array<double, 2 * kSsimRadius + 1> ssim_window_1d() {
  std::array<double, 2 * kSsimRadius + 1> w{};
  double sum = 0.0;
  for (int d = -kSsimRadius; d <= kSsimRadius; ++d) {
    w[d + kSsimRadius] =
        std::exp(-0.5 * (d * d) / (kSsimSigma * kSsimSigma));
    sum += w[d + kSsimRadius];
  }
  for (double& v : w) v /= sum;
  return w;
}

/// Symmetric (mirror-with-edge) index: -1 -> 0, -2 -> 1, n -> n-1, ...
inline int mirror_index(int i, int n) {
  if (i < 0) return -i - 1;
  if (i >= n) return 2 * n - i - 1;
  return i;
}

/// Separable Gaussian filter with symmetric boundary handling.
inline Image gaussian_filter(const Image& u) {
  const auto w = ssim_window_1d();
  const int M = u.rows(), N = u.cols();
  Image tmp(M, N), out(M, N);
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < N; ++j) {
      double acc = 0.0;
      for (int d = -kSsimRadius; d <= kSsimRadius; ++d)
        acc += w[d + kSsimRadius] * u(i, mirror_index(j + d, N));
      tmp(i, j) = acc;
    }
  }
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < N; ++j) {
      double acc = 0.0;
      for (int d = -kSsimRadius; d <= kSsimRadius; ++d)
        acc += w[d + kSsimRadius] * tmp(mirror_index(i + d, M), j);
      out(i, j) = acc;
    }
  }
  return out;
}

}  // namespace detail

/// Mean local SSIM over every pixel: 11x11 Gaussian window (std 1.5),
/// C1 = (0.01 L)^2, C2 = (0.03 L)^2, symmetric boundary handling.
inline double ssim(const Image& u, const Image& g, double dynamic_range) {
  if (!u.same_shape(g)) throw ShapeMismatch("ssim: image shapes differ");
  if (!(dynamic_range > 0.0))
    throw InvalidConfig("ssim requires dynamic_range > 0");
  if (u.rows() < 2 * detail::kSsimRadius + 1 ||
      u.cols() < 2 * detail::kSsimRadius + 1)
    throw TooSmall("ssim requires both image dimensions >= 11");

  const double c1 =
      (0.01 * dynamic_range) * (0.01 * dynamic_range);
  const double c2 =
      (0.03 * dynamic_range) * (0.03 * dynamic_range);

  const int M = u.rows(), N = u.cols();
  Image uu(M, N), gg(M, N), ug(M, N);
  for (std::size_t k = 0; k < u.size(); ++k) {
    uu[k] = u[k] * u[k];
    gg[k] = g[k] * g[k];
    ug[k] = u[k] * g[k];
  }
  const Image mu_u = detail::gaussian_filter(u);
  const Image mu_g = detail::gaussian_filter(g);
  const Image m_uu = detail::gaussian_filter(uu);
  const Image m_gg = detail::gaussian_filter(gg);
  const Image m_ug = detail::gaussian_filter(ug);

  double acc = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double mu2_u = mu_u[k] * mu_u[k];
    const double mu2_g = mu_g[k] * mu_g[k];
    const double var_u = m_uu[k] - mu2_u;
    const double var_g = m_gg[k] - mu2_g;
    const double cov = m_ug[k] - mu_u[k] * mu_g[k];
    acc += ((2.0 * mu_u[k] * mu_g[k] + c1) * (2.0 * cov + c2)) /
           ((mu2_u + mu2_g + c1) * (var_u + var_g + c2));
  }
  return std::clamp(acc / static_cast<double>(u.size()), -1.0, 1.0);
}

inline QualityReport quality_report(const Image& u, const Image& g,
                                    double dynamic_range) {
  return {psnr(u, g, dynamic_range), ssim(u, g, dynamic_range), dynamic_range};
}

/// Intensities of one image row (0-based index) in column order.
inline std::vector<double> line_profile(const Image& u, int row) {
  if (row < 0 || row >= u.rows())
    throw RowOutOfRange("line_profile: row index out of range");
  std::vector<double> out(static_cast<std::size_t>(u.cols()));
  for (int j = 0; j < u.cols(); ++j) out[j] = u(row, j);
  return out;
}

}  // namespace aitv
