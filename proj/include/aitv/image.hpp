#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "aitv/errors.hpp"

namespace aitv {

/// Dense M x N grayscale image, row-major (i = row, j = column).
/// Intensities are stored as doubles even when they represent integer
/// photon counts.
class Image {
 public:
  Image() = default;

  Image(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(checked_size(rows, cols), fill) {}

  Image(int rows, int cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != checked_size(rows, cols))
      throw ShapeMismatch("image data length must equal rows*cols");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int i, int j) { return data_[flat(i, j)]; }
  double operator()(int i, int j) const { return data_[flat(i, j)]; }

  double& operator[](std::size_t k) { return data_[k]; }
  double operator[](std::size_t k) const { return data_[k]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const Image& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

 private:
  static std::size_t checked_size(int rows, int cols) {
    if (rows < 1 || cols < 1)
      throw ShapeMismatch("image dimensions must be positive");
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }

  std::size_t flat(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(j);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

/// Element of the gradient space Y = X x X: a grid of horizontal
/// differences and a grid of vertical differences, both shaped like the
/// source image. Also holds the split variable w and its multiplier z.
struct GradField {
  Image x;  // horizontal (column-direction) differences
  Image y;  // vertical (row-direction) differences

  GradField() = default;
  GradField(int rows, int cols, double fill = 0.0)
      : x(rows, cols, fill), y(rows, cols, fill) {}

  int rows() const { return x.rows(); }
  int cols() const { return x.cols(); }
  bool same_shape(const GradField& other) const {
    return x.same_shape(other.x) && y.same_shape(other.y);
  }
};

inline void require_same_shape(const Image& a, const Image& b,
                               const char* what) {
  if (!a.same_shape(b))
    throw ShapeMismatch(std::string(what) + ": image shapes differ");
}

inline bool all_finite(const Image& u) {
  for (std::size_t k = 0; k < u.size(); ++k)
    if (!std::isfinite(u[k])) return false;
  return true;
}

inline double min_value(const Image& u) {
  double m = u[0];
  for (std::size_t k = 1; k < u.size(); ++k)
    if (u[k] < m) m = u[k];
  return m;
}

inline double max_value(const Image& u) {
  double m = u[0];
  for (std::size_t k = 1; k < u.size(); ++k)
    if (u[k] > m) m = u[k];
  return m;
}

inline double max_abs(const Image& u) {
  double m = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k)
    m = std::max(m, std::abs(u[k]));
  return m;
}

inline double dot(const Image& a, const Image& b) {
  require_same_shape(a, b, "dot");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

inline double norm_l2(const Image& u) {
  double acc = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) acc += u[k] * u[k];
  return std::sqrt(acc);
}

/// Forward differences with periodic wrap:
///   (grad u).x(i,j) = u(i, j+1 mod N) - u(i,j)
///   (grad u).y(i,j) = u(i+1 mod M, j) - u(i,j)
/// Periodic boundaries everywhere so that grad, grad_adjoint and the
/// spectral solve all realize the same operator.
inline GradField grad(const Image& u) {
  const int M = u.rows(), N = u.cols();
  GradField g(M, N);
  for (int i = 0; i < M; ++i) {
    const int in = (i + 1 == M) ? 0 : i + 1;
    for (int j = 0; j < N; ++j) {
      const int jn = (j + 1 == N) ? 0 : j + 1;
      g.x(i, j) = u(i, jn) - u(i, j);
      g.y(i, j) = u(in, j) - u(i, j);
    }
  }
  return g;
}

/// Exact adjoint of grad under the standard inner products: the negative
/// periodic divergence, i.e. backward differences of each component.
inline Image grad_adjoint(const GradField& p) {
  const int M = p.rows(), N = p.cols();
  Image out(M, N);
  for (int i = 0; i < M; ++i) {
    const int ip = (i == 0) ? M - 1 : i - 1;
    for (int j = 0; j < N; ++j) {
      const int jp = (j == 0) ? N - 1 : j - 1;
      out(i, j) = p.x(i, jp) - p.x(i, j) + p.y(ip, j) - p.y(i, j);
    }
  }
  return out;
}

inline double dot(const GradField& p, const GradField& q) {
  return dot(p.x, q.x) + dot(p.y, q.y);
}

/// ||p||_1 = sum |p.x| + |p.y|
inline double norm_l1(const GradField& p) {
  double acc = 0.0;
  for (std::size_t k = 0; k < p.x.size(); ++k)
    acc += std::abs(p.x[k]) + std::abs(p.y[k]);
  return acc;
}

/// ||p||_2 = sqrt(sum p.x^2 + p.y^2)
inline double norm_l2(const GradField& p) {
  double acc = 0.0;
  for (std::size_t k = 0; k < p.x.size(); ++k)
    acc += p.x[k] * p.x[k] + p.y[k] * p.y[k];
  return std::sqrt(acc);
}

/// ||p||_{2,1} = sum_ij sqrt(p.x(i,j)^2 + p.y(i,j)^2)
inline double norm_l21(const GradField& p) {
  double acc = 0.0;
  for (std::size_t k = 0; k < p.x.size(); ++k)
    acc += std::hypot(p.x[k], p.y[k]);
  return acc;
}

/// Poisson negative log-likelihood <u - f log u, 1>, with the convention
/// 0*log(.) = 0 at pixels where f = 0.
/// Throws NonPositiveIntensity if u <= 0 at a pixel with f > 0.
inline double poisson_fidelity(const Image& u, const Image& f) {
  require_same_shape(u, f, "poisson_fidelity");
  double acc = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (f[k] > 0.0) {
      if (!(u[k] > 0.0))
        throw NonPositiveIntensity(
            "fidelity undefined: u <= 0 at a pixel with f > 0");
      acc += u[k] - f[k] * std::log(u[k]);
    } else {
      acc += u[k];
    }
  }
  return acc;
}

/// lambda <u - f log u, 1> + ||grad u||_1 - alpha ||grad u||_{2,1}
inline double objective_aitv(const Image& u, const Image& f, double lambda,
                             double alpha) {
  const GradField g = grad(u);
  return lambda * poisson_fidelity(u, f) + norm_l1(g) - alpha * norm_l21(g);
}

/// lambda <u - f log u, 1> + ||grad u||_{2,1} (isotropic TV objective)
inline double objective_tv(const Image& u, const Image& f, double lambda) {
  return lambda * poisson_fidelity(u, f) + norm_l21(grad(u));
}

}  // namespace aitv
