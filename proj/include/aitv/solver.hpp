#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "aitv/errors.hpp"
#include "aitv/fft.hpp"
#include "aitv/image.hpp"
#include "aitv/prox.hpp"

namespace aitv {

enum class Regularizer { aitv, tv_isotropic };

inline const char* to_string(Regularizer r) {
  return r == Regularizer::aitv ? "aitv" : "tv_isotropic";
}

/// Tunables of the ADMM loop. Defaults follow the reference protocol:
/// geometric penalty growth sigma = 1.75 from beta0 = 1e-3, relative-change
/// tolerance 1e-5, at most 300 iterations.
struct SolverConfig {
  double lambda = 10.0;   // fidelity weight
  double alpha = 0.5;     // sparsity weight of the l1 - alpha l2 regularizer
  double beta0 = 1e-3;    // initial penalty
  double sigma = 1.75;    // penalty multiplier, > 1
  double epsilon = 1e-5;  // relative-change stopping tolerance
  int max_iters = 300;
  Regularizer regularizer = Regularizer::aitv;
  // Ceiling for the geometric beta growth; 1e-3 * 1.75^k overflows doubles
  // near iteration 170, and consensus is forced long before this cap.
  double beta_cap = 1e12;

  void validate() const {
    if (!(lambda > 0.0)) throw InvalidConfig("lambda must be > 0");
    if (!(alpha >= 0.0 && alpha <= 1.0))
      throw InvalidConfig("alpha must be in [0,1]");
    if (!(beta0 > 0.0)) throw InvalidConfig("beta0 must be > 0");
    if (!(sigma > 1.0)) throw InvalidConfig("sigma must be > 1");
    if (!(epsilon > 0.0)) throw InvalidConfig("epsilon must be > 0");
    if (max_iters < 1) throw InvalidConfig("max_iters must be >= 1");
    if (!(beta_cap >= beta0)) throw InvalidConfig("beta_cap must be >= beta0");
  }
};

struct SolverResult {
  Image u_star;
  int iterations = 0;
  std::vector<double> rel_change_history;
  std::vector<double> objective_history;  // objective evaluated at v_k
  double wall_time_s = 0.0;

  // Diagnostics.
  double clamp_magnitude = 0.0;    // largest negative excursion clamped away
  double final_beta = 0.0;         // penalty after the last full iteration
  double primal_residual_v = 0.0;  // ||u - v||_2 at exit
  double primal_residual_w = 0.0;  // ||grad u - w||_2 at exit
};

/// Closed-form v-update: the positive root of
///   beta v^2 - r v - lambda f = 0,  r = beta u + y - lambda,
/// which is the stationary point of the v-subproblem. Guarantees v >= 0
/// everywhere and v > 0 wherever f > 0.
inline Image update_v(const Image& u, const Image& y, const Image& f,
                      double lambda, double beta) {
  require_same_shape(u, y, "update_v");
  require_same_shape(u, f, "update_v");
  if (!(lambda > 0.0)) throw InvalidConfig("update_v requires lambda > 0");
  if (!(beta > 0.0)) throw InvalidBeta("update_v requires beta > 0");

  Image v(u.rows(), u.cols());
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double r = beta * u[k] + y[k] - lambda;
    v[k] = (r + std::sqrt(r * r + 4.0 * lambda * beta * f[k])) / (2.0 * beta);
  }
  return v;
}

namespace detail {

inline double image_rel_change(const Image& current, const Image& previous) {
  double diff_sq = 0.0, cur_sq = 0.0;
  for (std::size_t k = 0; k < current.size(); ++k) {
    const double d = current[k] - previous[k];
    diff_sq += d * d;
    cur_sq += current[k] * current[k];
  }
  if (cur_sq == 0.0)
    return diff_sq == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(diff_sq) / std::sqrt(cur_sq);
}

}  // namespace detail

/// ADMM with variable splitting u = v, grad u = w. Per iteration:
/// spectral u-solve, closed-form v-update, per-pixel prox w-update, dual
/// ascent on y and z, then beta <- min(sigma beta, beta_cap). Stops once
/// ||u_k - u_{k-1}||_2 / ||u_k||_2 < epsilon or after max_iters iterations.
///
/// The stopping test needs two computed iterates, so it starts at the second
/// iteration: with the warm start (u0 = v0 = f, w0 = grad f, zero duals) the
/// first u-solve inverts beta(I + div grad) against beta(I + div grad)f and
/// returns f up to round-off, making the iteration-1 relative change
/// meaninglessly small for every input.
inline SolverResult admm_solve(const Image& f, const SolverConfig& config) {
  config.validate();
  if (!all_finite(f))
    throw NonFiniteIterate("input image contains non-finite values");
  if (min_value(f) < 0.0)
    throw NonFiniteIterate("input image contains negative intensities");

  const auto t_start = std::chrono::steady_clock::now();
  const int M = f.rows(), N = f.cols();

  // Warm start at the data with zero multipliers.
  Image u = f;
  Image v = f;
  Image y(M, N, 0.0);
  GradField w = grad(f);
  GradField z(M, N, 0.0);
  double beta = config.beta0;

  UStepSolver u_solver(M, N);
  SolverResult result;
  result.rel_change_history.reserve(config.max_iters);
  result.objective_history.reserve(config.max_iters);

  GradField gu(M, N);
  int iter = 0;
  while (iter < config.max_iters) {
    Image u_next = u_solver.solve(v, y, z, w, beta);
    v = update_v(u_next, y, f, config.lambda, beta);
    gu = grad(u_next);

    GradField s(M, N);
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      s.x[k] = gu.x[k] + z.x[k] / beta;
      s.y[k] = gu.y[k] + z.y[k] / beta;
    }
    w = prox_field(s, config.alpha, beta,
                   config.regularizer == Regularizer::aitv
                       ? ProxFlavor::aitv
                       : ProxFlavor::isotropic);

    for (std::size_t k = 0; k < y.size(); ++k) {
      y[k] += beta * (u_next[k] - v[k]);
      z.x[k] += beta * (gu.x[k] - w.x[k]);
      z.y[k] += beta * (gu.y[k] - w.y[k]);
    }

    const double rel = detail::image_rel_change(u_next, u);
    u = std::move(u_next);
    ++iter;
    beta = std::min(beta * config.sigma, config.beta_cap);

    if (!all_finite(u) || !all_finite(v))
      throw NonFiniteIterate("iterate became non-finite at iteration " +
                             std::to_string(iter));

    result.rel_change_history.push_back(rel);
    result.objective_history.push_back(
        config.regularizer == Regularizer::aitv
            ? objective_aitv(v, f, config.lambda, config.alpha)
            : objective_tv(v, f, config.lambda));

    if (iter >= 2 && rel < config.epsilon) break;
  }

  result.iterations = iter;
  result.final_beta = beta;
  {
    double res_v_sq = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double d = u[k] - v[k];
      res_v_sq += d * d;
    }
    result.primal_residual_v = std::sqrt(res_v_sq);
    gu = grad(u);
    double res_w_sq = 0.0;
    for (std::size_t k = 0; k < gu.x.size(); ++k) {
      const double dx = gu.x[k] - w.x[k];
      const double dy = gu.y[k] - w.y[k];
      res_w_sq += dx * dx + dy * dy;
    }
    result.primal_residual_w = std::sqrt(res_w_sq);
  }

  // The u-subproblem is unconstrained and may leave tiny negatives; clamp
  // at output only and record how much was cut.
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (u[k] < 0.0) {
      result.clamp_magnitude = std::max(result.clamp_magnitude, -u[k]);
      u[k] = 0.0;
    }
  }
  result.u_star = std::move(u);
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return result;
}

/// Isotropic-TV baseline: same splitting and schedule with the w-step
/// solved by isotropic shrinkage. The alpha field is ignored.
inline SolverResult admm_solve_tv(const Image& f, SolverConfig config) {
  config.regularizer = Regularizer::tv_isotropic;
  return admm_solve(f, config);
}

}  // namespace aitv
