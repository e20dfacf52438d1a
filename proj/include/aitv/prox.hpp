#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "aitv/errors.hpp"
#include "aitv/image.hpp"

namespace aitv {

enum class ProxFlavor { aitv, isotropic };

namespace detail {

inline void check_prox_params(double alpha, double beta) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw InvalidAlpha("prox requires alpha in [0,1]");
  if (!(beta > 0.0)) throw InvalidBeta("prox requires beta > 0");
}

inline double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace detail

/// Closed-form minimizer of ||y||_1 - alpha ||y||_2 + ||x-y||_2^2 / (2 beta).
/// Three cases keyed on ||x||_inf (exact comparisons; both adjacent cases
/// are optimal on a boundary):
///   ||x||_inf >  beta            : soft-threshold by beta, then stretch the
///                                  survivor by (||xi||_2 + alpha beta)/||xi||_2
///   (1-alpha) beta < ||x||_inf
///                  <= beta       : 1-sparse at the first max-magnitude entry
///   ||x||_inf <= (1-alpha) beta  : zero
inline std::vector<double> prox_l1_minus_l2(std::span<const double> x,
                                            double alpha, double beta) {
  detail::check_prox_params(alpha, beta);
  const std::size_t n = x.size();
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;

  double xmax = 0.0;
  std::size_t imax = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::abs(x[i]);
    if (a > xmax) {
      xmax = a;
      imax = i;
    }
  }

  if (xmax > beta) {
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = std::abs(x[i]) - beta;
      if (a > 0.0) {
        out[i] = detail::sign(x[i]) * a;
        norm_sq += a * a;
      }
    }
    const double norm = std::sqrt(norm_sq);  // > 0 since xmax > beta
    const double scale = (norm + alpha * beta) / norm;
    for (std::size_t i = 0; i < n; ++i) out[i] *= scale;
  } else if (xmax > (1.0 - alpha) * beta) {
    out[imax] = (xmax + (alpha - 1.0) * beta) * detail::sign(x[imax]);
  }
  return out;
}

/// Allocation-free two-component path of prox_l1_minus_l2; same case logic,
/// agrees with the general version to roundoff.
inline void prox_l1_minus_l2_2(double x0, double x1, double alpha, double beta,
                               double& out0, double& out1) {
  const double a0 = std::abs(x0), a1 = std::abs(x1);
  const double xmax = a0 >= a1 ? a0 : a1;
  out0 = 0.0;
  out1 = 0.0;
  if (xmax > beta) {
    const double t0 = a0 - beta > 0.0 ? a0 - beta : 0.0;
    const double t1 = a1 - beta > 0.0 ? a1 - beta : 0.0;
    const double norm = std::sqrt(t0 * t0 + t1 * t1);
    const double scale = (norm + alpha * beta) / norm;
    out0 = detail::sign(x0) * t0 * scale;
    out1 = detail::sign(x1) * t1 * scale;
  } else if (xmax > (1.0 - alpha) * beta) {
    // Ties pick the first (smallest-index) max-magnitude entry.
    if (a0 >= a1) {
      out0 = (a0 + (alpha - 1.0) * beta) * detail::sign(x0);
    } else {
      out1 = (a1 + (alpha - 1.0) * beta) * detail::sign(x1);
    }
  }
}

/// Minimizer of t ||y||_2 + 0.5 ||y - s||_2^2 (group soft-thresholding).
inline void shrink_isotropic_2(double s0, double s1, double t, double& out0,
                               double& out1) {
  const double norm = std::hypot(s0, s1);
  if (norm <= t) {
    out0 = 0.0;
    out1 = 0.0;
  } else {
    const double scale = (norm - t) / norm;
    out0 = s0 * scale;
    out1 = s1 * scale;
  }
}

inline std::vector<double> shrink_isotropic(std::span<const double> s,
                                            double t) {
  if (!(t >= 0.0)) throw InvalidBeta("shrink requires threshold >= 0");
  std::vector<double> out(s.size(), 0.0);
  double norm_sq = 0.0;
  for (double v : s) norm_sq += v * v;
  const double norm = std::sqrt(norm_sq);
  if (norm > t) {
    const double scale = (norm - t) / norm;
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] * scale;
  }
  return out;
}

/// Applies the chosen prox to the 2-vector (s.x(i,j), s.y(i,j)) at every
/// pixel independently: the AITV prox with step 1/beta, or isotropic
/// shrinkage with threshold 1/beta.
inline GradField prox_field(const GradField& s, double alpha, double beta,
                            ProxFlavor flavor) {
  if (!(beta > 0.0)) throw InvalidBeta("prox_field requires beta > 0");
  if (flavor == ProxFlavor::aitv) detail::check_prox_params(alpha, beta);
  if (!s.x.same_shape(s.y))
    throw ShapeMismatch("prox_field: component shapes differ");

  const double step = 1.0 / beta;
  GradField out(s.rows(), s.cols());
  if (flavor == ProxFlavor::aitv) {
    for (std::size_t k = 0; k < s.x.size(); ++k)
      prox_l1_minus_l2_2(s.x[k], s.y[k], alpha, step, out.x[k], out.y[k]);
  } else {
    for (std::size_t k = 0; k < s.x.size(); ++k)
      shrink_isotropic_2(s.x[k], s.y[k], step, out.x[k], out.y[k]);
  }
  return out;
}

}  // namespace aitv
