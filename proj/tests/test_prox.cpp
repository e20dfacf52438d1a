#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <vector>

#include "aitv/noise.hpp"
#include "aitv/prox.hpp"
#include "prox_oracle.hpp"
#include "test_util.hpp"

using namespace aitv;
using Catch::Approx;

namespace {

std::array<double, 2> prox2(double x0, double x1, double alpha, double beta) {
  std::array<double, 2> out{};
  prox_l1_minus_l2_2(x0, x1, alpha, beta, out[0], out[1]);
  return out;
}

}  // namespace

TEST_CASE("interior case collapses to zero", "[prox]") {
  const auto r = prox2(0.3, 0.2, 0.5, 1.0);
  REQUIRE(r[0] == 0.0);
  REQUIRE(r[1] == 0.0);
}

TEST_CASE("one-sparse middle case", "[prox]") {
  // 0.6 + (0.5 - 1) * 1 = 0.1 on the dominant coordinate.
  const auto r = prox2(0.6, 0.0, 0.5, 1.0);
  REQUIRE(r[0] == Approx(0.1).margin(1e-15));
  REQUIRE(r[1] == 0.0);
}

TEST_CASE("outer case rescales the soft threshold", "[prox]") {
  // xi = (2,3); scale = 1 + 0.5/sqrt(13).
  const auto r = prox2(3.0, 4.0, 0.5, 1.0);
  REQUIRE(r[0] == Approx(2.2773500981126146).epsilon(1e-15));
  REQUIRE(r[1] == Approx(3.416025147168922).epsilon(1e-15));
}

TEST_CASE("alpha zero reduces to soft thresholding", "[prox]") {
  rng::SplitMix64 gen(42);
  for (int trial = 0; trial < 200; ++trial) {
    const double x0 = 6.0 * gen.next_double() - 3.0;
    const double x1 = 6.0 * gen.next_double() - 3.0;
    const double beta = 0.01 + 2.0 * gen.next_double();
    const auto r = prox2(x0, x1, 0.0, beta);
    const auto soft = [&](double x) {
      return std::copysign(std::max(std::abs(x) - beta, 0.0), x);
    };
    REQUIRE(r[0] == Approx(soft(x0)).margin(1e-14));
    REQUIRE(r[1] == Approx(soft(x1)).margin(1e-14));
  }
}

TEST_CASE("closed form beats a dense grid search", "[prox]") {
  rng::SplitMix64 gen(7);
  for (int trial = 0; trial < 60; ++trial) {
    const double x0 = 8.0 * gen.next_double() - 4.0;
    const double x1 = 8.0 * gen.next_double() - 4.0;
    const double alpha = gen.next_double();
    const double beta = 0.01 + 5.0 * gen.next_double();
    const auto r = prox2(x0, x1, alpha, beta);
    const double mine =
        testutil::prox_objective_2(r[0], r[1], x0, x1, alpha, beta);
    const double range = std::max(std::abs(x0), std::abs(x1)) + beta;
    const double grid =
        testutil::prox_grid_min_2(x0, x1, alpha, beta, 201, range);
    REQUIRE(mine <= grid + 1e-6);
  }
}

TEST_CASE("case-2 tie on the argmax picks the first coordinate", "[prox]") {
  // (1-alpha)*beta = 1.25 < 2 <= beta = 2.5 selects the one-sparse case; both
  // coordinates tie at |x| = 2.
  const auto r = prox2(2.0, 2.0, 0.5, 2.5);
  REQUIRE(r[0] == Approx(2.0 - 0.5 * 2.5).margin(1e-15));
  REQUIRE(r[1] == 0.0);
  const auto rneg = prox2(-2.0, 2.0, 0.5, 2.5);
  REQUIRE(rneg[0] == Approx(-(2.0 - 0.5 * 2.5)).margin(1e-15));
  REQUIRE(rneg[1] == 0.0);
}

TEST_CASE("alpha one never zeroes a nonzero input", "[prox]") {
  // Case 3 needs ||x||_inf <= (1-alpha)*beta = 0: empty for x != 0.
  const auto r = prox2(0.5, 0.0, 1.0, 1.0);
  REQUIRE(r[0] == Approx(0.5).margin(1e-15));
  REQUIRE(r[1] == 0.0);
  const auto tiny = prox2(1e-9, 0.0, 1.0, 1.0);
  REQUIRE(tiny[0] > 0.0);
}

TEST_CASE("sign and permutation equivariance", "[prox]") {
  rng::SplitMix64 gen(19);
  for (int trial = 0; trial < 100; ++trial) {
    const double x0 = 6.0 * gen.next_double() - 3.0;
    const double x1 = 6.0 * gen.next_double() - 3.0;
    const double alpha = gen.next_double();
    const double beta = 0.05 + 3.0 * gen.next_double();
    const auto base = prox2(x0, x1, alpha, beta);

    const auto flipped = prox2(-x0, x1, alpha, beta);
    REQUIRE(flipped[0] == Approx(-base[0]).margin(1e-14));
    REQUIRE(flipped[1] == Approx(base[1]).margin(1e-14));

    // Swap coordinates; compare objectives rather than raw outputs so the
    // argmax tie-break cannot trip the check.
    const auto swapped = prox2(x1, x0, alpha, beta);
    const double obj_base =
        testutil::prox_objective_2(base[0], base[1], x0, x1, alpha, beta);
    const double obj_swap =
        testutil::prox_objective_2(swapped[1], swapped[0], x0, x1, alpha, beta);
    REQUIRE(obj_swap == Approx(obj_base).margin(1e-12));
  }
}

TEST_CASE("objective is continuous across case boundaries", "[prox]") {
  // Outputs jump at the case-2/case-3 boundary; the attained objective must
  // not.
  const double alpha = 0.4, beta = 1.0;
  const double boundary = (1.0 - alpha) * beta;
  for (const double eps : {1e-9, 1e-7, 1e-5}) {
    const auto lo = prox2(boundary - eps, 0.0, alpha, beta);
    const auto hi = prox2(boundary + eps, 0.0, alpha, beta);
    const double obj_lo = testutil::prox_objective_2(lo[0], lo[1],
                                                     boundary - eps, 0.0,
                                                     alpha, beta);
    const double obj_hi = testutil::prox_objective_2(hi[0], hi[1],
                                                     boundary + eps, 0.0,
                                                     alpha, beta);
    REQUIRE(obj_hi == Approx(obj_lo).margin(1e-4));
  }
}

TEST_CASE("general-n path agrees with the two-vector path", "[prox]") {
  rng::SplitMix64 gen(23);
  for (int trial = 0; trial < 200; ++trial) {
    const double x0 = 6.0 * gen.next_double() - 3.0;
    const double x1 = 6.0 * gen.next_double() - 3.0;
    const double alpha = gen.next_double();
    const double beta = 0.05 + 3.0 * gen.next_double();
    const std::vector<double> x{x0, x1};
    const std::vector<double> ref = prox_l1_minus_l2(x, alpha, beta);
    const auto fast = prox2(x0, x1, alpha, beta);
    REQUIRE(std::abs(ref[0] - fast[0]) <= 1e-12);
    REQUIRE(std::abs(ref[1] - fast[1]) <= 1e-12);
  }
}

TEST_CASE("parameter validation", "[prox]") {
  const std::vector<double> x{1.0, 2.0};
  REQUIRE_THROWS_AS(prox_l1_minus_l2(x, -0.1, 1.0), InvalidAlpha);
  REQUIRE_THROWS_AS(prox_l1_minus_l2(x, 1.1, 1.0), InvalidAlpha);
  REQUIRE_THROWS_AS(prox_l1_minus_l2(x, 0.5, 0.0), InvalidBeta);
  REQUIRE_THROWS_AS(prox_l1_minus_l2(x, 0.5, -2.0), InvalidBeta);
}

TEST_CASE("isotropic shrink closed form", "[prox]") {
  double o0 = -1.0, o1 = -1.0;
  shrink_isotropic_2(3.0, 4.0, 5.0, o0, o1);
  REQUIRE(o0 == 0.0);
  REQUIRE(o1 == 0.0);
  shrink_isotropic_2(3.0, 4.0, 1.0, o0, o1);
  REQUIRE(o0 == Approx(2.4).epsilon(1e-15));
  REQUIRE(o1 == Approx(3.2).epsilon(1e-15));
}

TEST_CASE("isotropic shrink beats a dense grid search", "[prox]") {
  rng::SplitMix64 gen(29);
  for (int trial = 0; trial < 40; ++trial) {
    const double s0 = 8.0 * gen.next_double() - 4.0;
    const double s1 = 8.0 * gen.next_double() - 4.0;
    const double t = 3.0 * gen.next_double();
    double o0 = 0.0, o1 = 0.0;
    shrink_isotropic_2(s0, s1, t, o0, o1);
    const double mine = testutil::shrink_objective_2(o0, o1, s0, s1, t);
    const double range = std::max(std::abs(s0), std::abs(s1)) + t + 0.5;
    const double grid = testutil::shrink_grid_min_2(s0, s1, t, 201, range);
    REQUIRE(mine <= grid + 1e-6);
  }
}

TEST_CASE("pixelwise prox field application", "[prox]") {
  GradField zero(4, 4);
  const GradField rz_a = prox_field(zero, 0.5, 1.0, ProxFlavor::aitv);
  const GradField rz_i = prox_field(zero, 0.5, 1.0, ProxFlavor::isotropic);
  REQUIRE(max_abs(rz_a.x) == 0.0);
  REQUIRE(max_abs(rz_a.y) == 0.0);
  REQUIRE(max_abs(rz_i.x) == 0.0);
  REQUIRE(max_abs(rz_i.y) == 0.0);

  // prox_field applies step 1/beta; beta=1 reproduces the unit-step case.
  GradField s(4, 4);
  s.x(2, 1) = 3.0;
  s.y(2, 1) = 4.0;
  const GradField r = prox_field(s, 0.5, 1.0, ProxFlavor::aitv);
  REQUIRE(r.x(2, 1) == Approx(2.2773500981126146).epsilon(1e-14));
  REQUIRE(r.y(2, 1) == Approx(3.416025147168922).epsilon(1e-14));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (i == 2 && j == 1) continue;
      REQUIRE(r.x(i, j) == 0.0);
      REQUIRE(r.y(i, j) == 0.0);
    }
}

TEST_CASE("prox field treats pixels independently", "[prox]") {
  const int M = 5, N = 3;
  GradField s(M, N);
  s.x = testutil::random_image(M, N, 61, -3.0, 3.0);
  s.y = testutil::random_image(M, N, 62, -3.0, 3.0);
  const GradField r = prox_field(s, 0.3, 0.8, ProxFlavor::aitv);

  // Reverse the pixel order and re-apply: outputs must permute identically.
  GradField rev(M, N);
  const std::size_t n = s.x.size();
  for (std::size_t k = 0; k < n; ++k) {
    rev.x[k] = s.x[n - 1 - k];
    rev.y[k] = s.y[n - 1 - k];
  }
  const GradField rrev = prox_field(rev, 0.3, 0.8, ProxFlavor::aitv);
  for (std::size_t k = 0; k < n; ++k) {
    REQUIRE(rrev.x[k] == r.x[n - 1 - k]);
    REQUIRE(rrev.y[k] == r.y[n - 1 - k]);
  }
}
