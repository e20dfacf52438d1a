#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "aitv/fft.hpp"
#include "aitv/image.hpp"
#include "test_util.hpp"

using namespace aitv;
using Catch::Approx;

namespace {

// Straight-line reference for the u-step: everything through full complex
// transforms, as written in the spectral-division formula.
Image u_step_full_complex(const Image& v, const Image& y, const GradField& z,
                          const GradField& w, double beta,
                          const SpectralKernel& kernel) {
  const int M = v.rows(), N = v.cols();
  Image rhs0(M, N), rx(M, N), ry(M, N);
  for (std::size_t k = 0; k < rhs0.size(); ++k) {
    rhs0[k] = beta * v[k] - y[k];
    rx[k] = z.x[k] - beta * w.x[k];
    ry[k] = z.y[k] - beta * w.y[k];
  }
  Dft2 dft(M, N);
  ComplexGrid acc = dft.forward(rhs0);
  const ComplexGrid fx = dft.forward(rx);
  const ComplexGrid fy = dft.forward(ry);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < N; ++j) {
      const std::size_t k = std::size_t(i) * N + j;
      acc.data[k] -= std::conj(kernel.sym_x[k]) * fx.data[k] +
                     std::conj(kernel.sym_y[k]) * fy.data[k];
      acc.data[k] /= beta * kernel.denom[k];
    }
  return dft.inverse(acc);
}

}  // namespace

TEST_CASE("forward transform of a constant is DC-only", "[transforms]") {
  const int M = 4, N = 6;
  const double c = 2.5;
  const ComplexGrid U = dft2(Image(M, N, c));
  REQUIRE(U.data[0].real() == Approx(c * M * N));
  REQUIRE(U.data[0].imag() == Approx(0.0).margin(1e-12));
  for (std::size_t k = 1; k < U.data.size(); ++k)
    REQUIRE(std::abs(U.data[k]) <= 1e-10 * M * N);
}

TEST_CASE("transform round-trip on random input", "[transforms]") {
  const Image u = testutil::random_image(16, 16, 7, -3.0, 3.0);
  const Image back = idft2(dft2(u));
  for (std::size_t k = 0; k < u.size(); ++k)
    REQUIRE(back[k] == Approx(u[k]).margin(1e-10));
}

TEST_CASE("gradient acts as the spectral symbol", "[transforms]") {
  const int M = 8, N = 12;
  const Image u = testutil::random_image(M, N, 9, -1.0, 1.0);
  const SpectralKernel kernel = build_kernel(M, N);
  const ComplexGrid U = dft2(u);
  const GradField g = grad(u);
  const ComplexGrid Gx = dft2(g.x);
  const ComplexGrid Gy = dft2(g.y);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < N; ++j) {
      const std::size_t k = std::size_t(i) * N + j;
      REQUIRE(std::abs(Gx.data[k] - kernel.sym_x[k] * U.data[k]) <= 1e-9 * M * N);
      REQUIRE(std::abs(Gy.data[k] - kernel.sym_y[k] * U.data[k]) <= 1e-9 * M * N);
    }
}

TEST_CASE("kernel degenerate and zero-frequency values", "[transforms]") {
  const SpectralKernel k1 = build_kernel(1, 1);
  REQUIRE(std::abs(k1.sym_x[0]) == 0.0);
  REQUIRE(std::abs(k1.sym_y[0]) == 0.0);
  REQUIRE(k1.denom[0] == 1.0);

  for (const auto [M, N] : {std::pair{3, 5}, {8, 8}, {17, 2}}) {
    const SpectralKernel k = build_kernel(M, N);
    REQUIRE(k.denom[0] == Approx(1.0));
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < N; ++j) REQUIRE(k.denom[std::size_t(i) * N + j] >= 1.0 - 1e-12);
  }
}

TEST_CASE("spectral and spatial (I - Laplacian) agree", "[transforms]") {
  const int M = 8, N = 10;
  const Image u = testutil::random_image(M, N, 13, -2.0, 2.0);
  const SpectralKernel kernel = build_kernel(M, N);
  ComplexGrid U = dft2(u);
  for (std::size_t k = 0; k < U.data.size(); ++k)
    U.data[k] *= kernel.denom[k];
  const Image spectral = idft2(U);

  const Image lap = grad_adjoint(grad(u));  // -Delta u
  for (std::size_t k = 0; k < u.size(); ++k)
    REQUIRE(spectral[k] == Approx(u[k] + lap[k]).margin(1e-9));
}

TEST_CASE("u-step fixed point when w matches the gradient", "[transforms]") {
  const int M = 9, N = 7;
  const Image v = testutil::random_image(M, N, 17, 0.5, 2.5);
  const Image y(M, N, 0.0);
  const GradField z(M, N);
  const GradField w = grad(v);
  const SpectralKernel kernel = build_kernel(M, N);
  const Image u = solve_u_step(v, y, z, w, 0.7, kernel);
  for (std::size_t k = 0; k < u.size(); ++k)
    REQUIRE(u[k] == Approx(v[k]).margin(1e-10));
}

TEST_CASE("u-step maps constants to constants", "[transforms]") {
  const int M = 5, N = 5;
  const Image v(M, N, 3.0);
  const Image y(M, N, 0.0);
  const GradField z(M, N), w(M, N);
  const Image u = solve_u_step(v, y, z, w, 2.0, build_kernel(M, N));
  for (std::size_t k = 0; k < u.size(); ++k)
    REQUIRE(u[k] == Approx(3.0).margin(1e-11));
}

TEST_CASE("u-step satisfies the linear system", "[transforms]") {
  // Residual oracle with the operator applied spatially, across the full
  // penalty schedule range.
  for (int trial = 0; trial < 100; ++trial) {
    const int M = 4 + trial % 5, N = 4 + (trial / 5) % 5;
    const Image v = testutil::random_image(M, N, 1000 + trial, -2.0, 4.0);
    const Image y = testutil::random_image(M, N, 2000 + trial, -1.0, 1.0);
    GradField z(M, N), w(M, N);
    z.x = testutil::random_image(M, N, 3000 + trial, -1.0, 1.0);
    z.y = testutil::random_image(M, N, 4000 + trial, -1.0, 1.0);
    w.x = testutil::random_image(M, N, 5000 + trial, -1.0, 1.0);
    w.y = testutil::random_image(M, N, 6000 + trial, -1.0, 1.0);
    const double beta = std::pow(10.0, -3.0 + 15.0 * (trial / 99.0));

    const Image u = solve_u_step(v, y, z, w, beta, build_kernel(M, N));

    Image rhs(M, N);
    GradField zw(M, N);
    for (std::size_t k = 0; k < rhs.size(); ++k) {
      zw.x[k] = z.x[k] - beta * w.x[k];
      zw.y[k] = z.y[k] - beta * w.y[k];
    }
    const Image div_term = grad_adjoint(zw);
    for (std::size_t k = 0; k < rhs.size(); ++k)
      rhs[k] = beta * v[k] - y[k] - div_term[k];

    const Image lap = grad_adjoint(grad(u));
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < rhs.size(); ++k) {
      const double lhs = beta * (u[k] + lap[k]);
      num += (lhs - rhs[k]) * (lhs - rhs[k]);
      den += rhs[k] * rhs[k];
    }
    REQUIRE(std::sqrt(num) <= 1e-8 * std::sqrt(den));
  }
}

TEST_CASE("half-spectrum solver matches the full complex path", "[transforms]") {
  for (int trial = 0; trial < 20; ++trial) {
    const int M = 3 + trial % 7, N = 3 + (trial / 3) % 8;
    const Image v = testutil::random_image(M, N, 7000 + trial, 0.0, 3.0);
    const Image y = testutil::random_image(M, N, 7100 + trial, -1.0, 1.0);
    GradField z(M, N), w(M, N);
    z.x = testutil::random_image(M, N, 7200 + trial, -1.0, 1.0);
    z.y = testutil::random_image(M, N, 7300 + trial, -1.0, 1.0);
    w.x = testutil::random_image(M, N, 7400 + trial, -1.0, 1.0);
    w.y = testutil::random_image(M, N, 7500 + trial, -1.0, 1.0);
    const double beta = 0.003 * (trial + 1);

    const SpectralKernel kernel = build_kernel(M, N);
    UStepSolver fast(kernel);
    const Image u_fast = fast.solve(v, y, z, w, beta);
    const Image u_ref = u_step_full_complex(v, y, z, w, beta, kernel);
    double scale = max_abs(u_ref);
    for (std::size_t k = 0; k < u_fast.size(); ++k)
      REQUIRE(std::abs(u_fast[k] - u_ref[k]) <= 1e-12 * (1.0 + scale));
  }
}

TEST_CASE("u-step is jointly linear in its inputs", "[transforms]") {
  const int M = 6, N = 6;
  const SpectralKernel kernel = build_kernel(M, N);
  const double beta = 0.4, a = 2.0, b = -3.0;

  auto randset = [&](int tag) {
    struct Set {
      Image v, y;
      GradField z, w;
    } s{testutil::random_image(M, N, 100 + tag),
        testutil::random_image(M, N, 200 + tag), GradField(M, N),
        GradField(M, N)};
    s.z.x = testutil::random_image(M, N, 300 + tag);
    s.z.y = testutil::random_image(M, N, 400 + tag);
    s.w.x = testutil::random_image(M, N, 500 + tag);
    s.w.y = testutil::random_image(M, N, 600 + tag);
    return s;
  };
  const auto s1 = randset(1), s2 = randset(2);

  Image v(M, N), y(M, N);
  GradField z(M, N), w(M, N);
  for (std::size_t k = 0; k < v.size(); ++k) {
    v[k] = a * s1.v[k] + b * s2.v[k];
    y[k] = a * s1.y[k] + b * s2.y[k];
    z.x[k] = a * s1.z.x[k] + b * s2.z.x[k];
    z.y[k] = a * s1.z.y[k] + b * s2.z.y[k];
    w.x[k] = a * s1.w.x[k] + b * s2.w.x[k];
    w.y[k] = a * s1.w.y[k] + b * s2.w.y[k];
  }
  const Image u1 = solve_u_step(s1.v, s1.y, s1.z, s1.w, beta, kernel);
  const Image u2 = solve_u_step(s2.v, s2.y, s2.z, s2.w, beta, kernel);
  const Image u12 = solve_u_step(v, y, z, w, beta, kernel);
  for (std::size_t k = 0; k < u12.size(); ++k)
    REQUIRE(u12[k] == Approx(a * u1[k] + b * u2[k]).margin(1e-9));
}

TEST_CASE("inverse transform rejects non-symmetric spectra", "[transforms]") {
  // A spectrum with no conjugate symmetry inverts to something with a large
  // imaginary part, which must be reported, not discarded.
  ComplexGrid bad(4, 4);
  bad.data[1] = {1.0, 0.0};  // lone nonzero bin, partner bin stays zero
  REQUIRE_THROWS_AS(idft2(bad), NonNegligibleImaginary);
}

TEST_CASE("u-step validates beta and shapes", "[transforms]") {
  const Image v(4, 4, 1.0), y(4, 4, 0.0);
  const GradField z(4, 4), w(4, 4);
  UStepSolver solver(4, 4);
  REQUIRE_THROWS_AS(solver.solve(v, y, z, w, 0.0), InvalidBeta);
  REQUIRE_THROWS_AS(solver.solve(v, y, z, w, -1.0), InvalidBeta);
  const Image v5(5, 4, 1.0);
  REQUIRE_THROWS_AS(solver.solve(v5, y, z, w, 1.0), ShapeMismatch);
}
