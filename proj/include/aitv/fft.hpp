#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "aitv/errors.hpp"
#include "aitv/image.hpp"

namespace aitv {

/// M x N grid of complex DFT coefficients, row-major like Image.
struct ComplexGrid {
  int rows = 0;
  int cols = 0;
  std::vector<std::complex<double>> data;

  ComplexGrid() = default;
  ComplexGrid(int r, int c)
      : rows(r), cols(c),
        data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c)) {}

  std::complex<double>& operator()(int i, int j) {
    return data[static_cast<std::size_t>(i) * cols + j];
  }
  const std::complex<double>& operator()(int i, int j) const {
    return data[static_cast<std::size_t>(i) * cols + j];
  }
};

namespace detail {

// FFTW's planner is not reentrant; plan creation and destruction must be
// serialized. Executing a plan on its own buffers is thread-safe.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const {
    if (p) fftw_free(p);
  }
};

class FftwPlan {
 public:
  FftwPlan() = default;
  explicit FftwPlan(fftw_plan p) : plan_(p) {}
  ~FftwPlan() { reset(); }

  FftwPlan(const FftwPlan&) = delete;
  FftwPlan& operator=(const FftwPlan&) = delete;
  FftwPlan(FftwPlan&& o) noexcept : plan_(std::exchange(o.plan_, nullptr)) {}
  FftwPlan& operator=(FftwPlan&& o) noexcept {
    if (this != &o) {
      reset();
      plan_ = std::exchange(o.plan_, nullptr);
    }
    return *this;
  }

  fftw_plan get() const { return plan_; }

 private:
  void reset() {
    if (plan_) {
      std::lock_guard<std::mutex> lock(fftw_planner_mutex());
      fftw_destroy_plan(plan_);
      plan_ = nullptr;
    }
  }
  fftw_plan plan_ = nullptr;
};

}  // namespace detail

/// Full complex 2D DFT pair for one image size. Forward is unnormalized;
/// inverse divides by M*N, so inverse(forward(u)) == u up to roundoff.
/// Plans use FFTW_ESTIMATE: plan choice depends only on the size, which
/// keeps results bitwise reproducible run to run.
class Dft2 {
 public:
  Dft2(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1)
      throw ShapeMismatch("transform dimensions must be positive");
    const std::size_t n = count();
    in_.reset(fftw_alloc_complex(n));
    out_.reset(fftw_alloc_complex(n));
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fwd_ = detail::FftwPlan(fftw_plan_dft_2d(rows, cols, in_.get(), out_.get(),
                                             FFTW_FORWARD, FFTW_ESTIMATE));
    bwd_ = detail::FftwPlan(fftw_plan_dft_2d(rows, cols, in_.get(), out_.get(),
                                             FFTW_BACKWARD, FFTW_ESTIMATE));
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  ComplexGrid forward(const Image& u) {
    if (u.rows() != rows_ || u.cols() != cols_)
      throw ShapeMismatch("dft2: image shape does not match plan");
    const std::size_t n = count();
    for (std::size_t k = 0; k < n; ++k) {
      in_.get()[k][0] = u[k];
      in_.get()[k][1] = 0.0;
    }
    fftw_execute(fwd_.get());
    ComplexGrid U(rows_, cols_);
    for (std::size_t k = 0; k < n; ++k)
      U.data[k] = {out_.get()[k][0], out_.get()[k][1]};
    return U;
  }

  /// Inverse transform of the DFT of a real grid. The imaginary residue
  /// must vanish: max |imag| <= 1e-8 * (1 + max |real|), otherwise the
  /// symbols applied upstream did not match the spatial operator.
  Image inverse(const ComplexGrid& U) {
    if (U.rows != rows_ || U.cols != cols_)
      throw ShapeMismatch("idft2: grid shape does not match plan");
    const std::size_t n = count();
    for (std::size_t k = 0; k < n; ++k) {
      in_.get()[k][0] = U.data[k].real();
      in_.get()[k][1] = U.data[k].imag();
    }
    fftw_execute(bwd_.get());
    const double scale = 1.0 / static_cast<double>(n);
    double max_re = 0.0, max_im = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      max_re = std::max(max_re, std::abs(out_.get()[k][0]) * scale);
      max_im = std::max(max_im, std::abs(out_.get()[k][1]) * scale);
    }
    if (max_im > 1e-8 * (1.0 + max_re))
      throw NonNegligibleImaginary(
          "idft2: non-negligible imaginary residue; spectrum is not that of "
          "a real grid");
    Image u(rows_, cols_);
    for (std::size_t k = 0; k < n; ++k) u[k] = out_.get()[k][0] * scale;
    return u;
  }

 private:
  std::size_t count() const {
    return static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_);
  }

  int rows_, cols_;
  std::unique_ptr<fftw_complex[], detail::FftwFree> in_, out_;
  detail::FftwPlan fwd_, bwd_;
};

inline ComplexGrid dft2(const Image& u) {
  return Dft2(u.rows(), u.cols()).forward(u);
}

inline Image idft2(const ComplexGrid& U) {
  return Dft2(U.rows, U.cols).inverse(U);
}

/// DFT symbols of the periodic forward-difference operators and the
/// spectrum of I - Laplacian:
///   sym_x(i,j) = exp(2*pi*i*j/N) - 1   (column frequency only)
///   sym_y(i,j) = exp(2*pi*i*i/M) - 1   (row frequency only)
///   denom     = 1 + |sym_x|^2 + |sym_y|^2   (>= 1, == 1 at DC)
struct SpectralKernel {
  int rows = 0;
  int cols = 0;
  std::vector<std::complex<double>> sym_x, sym_y;
  std::vector<double> denom;
};

inline SpectralKernel build_kernel(int M, int N) {
  if (M < 1 || N < 1)
    throw ShapeMismatch("kernel dimensions must be positive");
  SpectralKernel k;
  k.rows = M;
  k.cols = N;
  const std::size_t n = static_cast<std::size_t>(M) * N;
  k.sym_x.resize(n);
  k.sym_y.resize(n);
  k.denom.resize(n);

  std::vector<std::complex<double>> col_sym(N), row_sym(M);
  constexpr double two_pi = 6.283185307179586476925286766559;
  for (int j = 0; j < N; ++j)
    col_sym[j] = std::polar(1.0, two_pi * j / N) - 1.0;
  for (int i = 0; i < M; ++i)
    row_sym[i] = std::polar(1.0, two_pi * i / M) - 1.0;

  std::size_t idx = 0;
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < N; ++j, ++idx) {
      k.sym_x[idx] = col_sym[j];
      k.sym_y[idx] = row_sym[i];
      k.denom[idx] =
          1.0 + std::norm(col_sym[j]) + std::norm(row_sym[i]);
    }
  }
  return k;
}

/// Solves beta (I - Laplacian) u = beta v - y - grad_adjoint(z - beta w)
/// by componentwise spectral division. Exploits that every input is real:
/// the transforms run on the half spectrum (r2c/c2r), which matches the
/// full complex route to roundoff. Owns plans and buffers for one size, so
/// an ADMM loop pays for planning once.
class UStepSolver {
 public:
  explicit UStepSolver(int rows, int cols)
      : UStepSolver(build_kernel(rows, cols)) {}

  explicit UStepSolver(SpectralKernel kernel) : kernel_(std::move(kernel)) {
    M_ = kernel_.rows;
    N_ = kernel_.cols;
    half_cols_ = N_ / 2 + 1;
    const std::size_t nh =
        static_cast<std::size_t>(M_) * static_cast<std::size_t>(half_cols_);

    // Adjoint symbols and denominator restricted to the half spectrum.
    adj_x_.resize(nh);
    adj_y_.resize(nh);
    denom_.resize(nh);
    for (int i = 0; i < M_; ++i) {
      for (int j = 0; j < half_cols_; ++j) {
        const std::size_t full = static_cast<std::size_t>(i) * N_ + j;
        const std::size_t half = static_cast<std::size_t>(i) * half_cols_ + j;
        adj_x_[half] = std::conj(kernel_.sym_x[full]);
        adj_y_[half] = std::conj(kernel_.sym_y[full]);
        denom_[half] = kernel_.denom[full];
      }
    }

    rbuf_.reset(fftw_alloc_real(static_cast<std::size_t>(M_) * N_));
    cbuf_.reset(fftw_alloc_complex(nh));
    acc_.resize(nh);
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    r2c_ = detail::FftwPlan(fftw_plan_dft_r2c_2d(M_, N_, rbuf_.get(),
                                                 cbuf_.get(), FFTW_ESTIMATE));
    c2r_ = detail::FftwPlan(fftw_plan_dft_c2r_2d(M_, N_, cbuf_.get(),
                                                 rbuf_.get(), FFTW_ESTIMATE));
  }

  const SpectralKernel& kernel() const { return kernel_; }

  Image solve(const Image& v, const Image& y, const GradField& z,
              const GradField& w, double beta) {
    if (!(beta > 0.0)) throw InvalidBeta("u-step requires beta > 0");
    if (v.rows() != M_ || v.cols() != N_ || !v.same_shape(y) ||
        z.rows() != M_ || z.cols() != N_ || !z.same_shape(w))
      throw ShapeMismatch("u-step: input shapes do not match kernel");

    const std::size_t n = static_cast<std::size_t>(M_) * N_;
    const std::size_t nh = acc_.size();

    for (std::size_t k = 0; k < n; ++k) rbuf_.get()[k] = beta * v[k] - y[k];
    fftw_execute(r2c_.get());
    for (std::size_t k = 0; k < nh; ++k)
      acc_[k] = {cbuf_.get()[k][0], cbuf_.get()[k][1]};

    for (std::size_t k = 0; k < n; ++k)
      rbuf_.get()[k] = z.x[k] - beta * w.x[k];
    fftw_execute(r2c_.get());
    for (std::size_t k = 0; k < nh; ++k)
      acc_[k] -= adj_x_[k] *
                 std::complex<double>(cbuf_.get()[k][0], cbuf_.get()[k][1]);

    for (std::size_t k = 0; k < n; ++k)
      rbuf_.get()[k] = z.y[k] - beta * w.y[k];
    fftw_execute(r2c_.get());
    for (std::size_t k = 0; k < nh; ++k)
      acc_[k] -= adj_y_[k] *
                 std::complex<double>(cbuf_.get()[k][0], cbuf_.get()[k][1]);

    for (std::size_t k = 0; k < nh; ++k) {
      const std::complex<double> val = acc_[k] / (beta * denom_[k]);
      cbuf_.get()[k][0] = val.real();
      cbuf_.get()[k][1] = val.imag();
    }
    fftw_execute(c2r_.get());

    Image u(M_, N_);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) u[k] = rbuf_.get()[k] * scale;
    return u;
  }

 private:
  SpectralKernel kernel_;
  int M_ = 0, N_ = 0, half_cols_ = 0;
  std::vector<std::complex<double>> adj_x_, adj_y_, acc_;
  std::vector<double> denom_;
  std::unique_ptr<double[], detail::FftwFree> rbuf_;
  std::unique_ptr<fftw_complex[], detail::FftwFree> cbuf_;
  detail::FftwPlan r2c_, c2r_;
};

inline Image solve_u_step(const Image& v, const Image& y, const GradField& z,
                          const GradField& w, double beta,
                          const SpectralKernel& kernel) {
  return UStepSolver(kernel).solve(v, y, z, w, beta);
}

}  // namespace aitv
