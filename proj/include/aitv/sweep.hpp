#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "aitv/errors.hpp"
#include "aitv/image.hpp"
#include "aitv/image_io.hpp"
#include "aitv/metrics.hpp"
#include "aitv/noise.hpp"
#include "aitv/solver.hpp"

namespace aitv {

// ---------------------------------------------------------------------------
// Deterministic per-cell seeding: 64-bit FNV-1a over "<name>\0<peak>" where
// <peak> is the shortest round-trip decimal of the peak value, XORed into the
// user seed. Reproducible, and uncorrelated between cells.
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t bench_cell_seed(std::uint64_t seed,
                                     std::string_view image_name,
                                     double peak) {
  std::string key(image_name);
  key.push_back('\0');
  key += format_double(peak);
  return seed ^ fnv1a64(key);
}

/// Worker count: AITV_THREADS overrides the requested value when set to a
/// positive integer; the result is always at least 1.
inline int effective_jobs(int requested) {
  if (const char* env = std::getenv("AITV_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return requested < 1 ? 1 : requested;
}

namespace detail {

/// Runs fn(0..n-1) on up to `jobs` threads. Results must go to disjoint
/// slots; the merge stays single-threaded in the caller.
template <class Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
  jobs = std::min(jobs, n);
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (int t = 0; t < jobs; ++t) {
    workers.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Parameter sweep.
// ---------------------------------------------------------------------------

struct SweepGrid {
  std::vector<double> lambdas{3, 5, 8, 10, 12, 15, 20};
  std::vector<double> alphas{0.1, 0.2, 0.3, 0.4, 0.5};
  enum class Selection { best_psnr, best_ssim };
  Selection selection = Selection::best_psnr;

  void validate() const {
    if (lambdas.empty()) throw InvalidConfig("sweep grid needs lambdas");
    if (alphas.empty()) throw InvalidConfig("sweep grid needs alphas");
  }
};

struct SweepCell {
  SolverConfig config;
  double alpha_display = 0.0;  // NaN for the isotropic baseline (no alpha)
  double psnr_db = std::numeric_limits<double>::quiet_NaN();
  double ssim = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  double wall_time_s = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;
  std::string error;
};

struct SweepResult {
  Regularizer method = Regularizer::aitv;
  SweepGrid::Selection selection = SweepGrid::Selection::best_psnr;
  std::vector<SweepCell> cells;  // grid order: lambda outer, alpha inner
  int best_index = -1;           // -1 when every cell failed
};

namespace detail {

/// Cell order defines the tie-break: lambdas in listed order, alphas inner.
/// The isotropic baseline has no alpha axis, so one cell per lambda.
inline std::vector<SweepCell> make_sweep_cells(const SweepGrid& grid,
                                               Regularizer method,
                                               const SolverConfig& base) {
  std::vector<SweepCell> cells;
  for (const double lambda : grid.lambdas) {
    if (method == Regularizer::tv_isotropic) {
      SweepCell cell;
      cell.config = base;
      cell.config.lambda = lambda;
      cell.config.regularizer = method;
      cell.alpha_display = std::numeric_limits<double>::quiet_NaN();
      cells.push_back(std::move(cell));
    } else {
      for (const double alpha : grid.alphas) {
        SweepCell cell;
        cell.config = base;
        cell.config.lambda = lambda;
        cell.config.alpha = alpha;
        cell.config.regularizer = method;
        cell.alpha_display = alpha;
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

inline int select_best(const std::vector<SweepCell>& cells,
                       SweepGrid::Selection selection) {
  int best = -1;
  for (int i = 0; i < static_cast<int>(cells.size()); ++i) {
    if (!cells[i].ok) continue;
    const double score = selection == SweepGrid::Selection::best_psnr
                             ? cells[i].psnr_db
                             : cells[i].ssim;
    if (std::isnan(score)) continue;
    const double incumbent = best < 0
                                 ? -std::numeric_limits<double>::infinity()
                                 : (selection == SweepGrid::Selection::best_psnr
                                        ? cells[best].psnr_db
                                        : cells[best].ssim);
    if (score > incumbent) best = i;  // ties keep the earlier grid cell
  }
  return best;
}

}  // namespace detail

/// Runs every grid cell on `noisy`, scoring against `clean` at the given
/// dynamic range. A throwing cell is recorded with NaN metrics and the sweep
/// continues. Cells run on up to `jobs` threads into private result slots.
inline SweepResult run_sweep(const Image& noisy, const Image& clean,
                             const SweepGrid& grid, Regularizer method,
                             const SolverConfig& base, double dynamic_range,
                             int jobs = 1) {
  grid.validate();
  require_same_shape(noisy, clean, "sweep noisy/clean pair");
  SweepResult result;
  result.method = method;
  result.selection = grid.selection;
  result.cells = detail::make_sweep_cells(grid, method, base);

  detail::parallel_for(
      static_cast<int>(result.cells.size()), effective_jobs(jobs), [&](int i) {
        SweepCell& cell = result.cells[i];
        try {
          const SolverResult solved = admm_solve(noisy, cell.config);
          cell.psnr_db = psnr(solved.u_star, clean, dynamic_range);
          cell.ssim = ssim(solved.u_star, clean, dynamic_range);
          cell.iterations = solved.iterations;
          cell.wall_time_s = solved.wall_time_s;
          cell.ok = true;
        } catch (const std::exception& e) {
          cell.ok = false;
          cell.error = e.what();
        }
      });

  result.best_index = detail::select_best(result.cells, grid.selection);
  return result;
}

inline std::string render_sweep_csv(const SweepResult& result) {
  std::string out = "lambda,alpha,psnr_db,ssim,iterations,wall_time_s,status\n";
  for (const SweepCell& cell : result.cells) {
    out += format_double(cell.config.lambda);
    out += ',';
    if (!std::isnan(cell.alpha_display)) out += format_double(cell.alpha_display);
    out += ',';
    out += format_double(cell.psnr_db);
    out += ',';
    out += format_double(cell.ssim);
    out += ',';
    out += std::to_string(cell.iterations);
    out += ',';
    out += format_double(cell.wall_time_s);
    out += ',';
    if (cell.ok) {
      out += "ok";
    } else {
      std::string msg = "failed: " + cell.error;
      for (char& c : msg)
        if (c == ',' || c == '\n') c = ';';
      out += msg;
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Benchmark over a corpus: per (image, peak) corrupt once with the derived
// seed, then sweep each method on the shared noisy image.
// ---------------------------------------------------------------------------

struct BenchConfig {
  std::vector<double> peaks{80, 55, 30};
  std::vector<Regularizer> methods{Regularizer::aitv,
                                   Regularizer::tv_isotropic};
  SweepGrid grid;
  SolverConfig base;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct BenchCell {
  double psnr_db = std::numeric_limits<double>::quiet_NaN();
  double ssim = std::numeric_limits<double>::quiet_NaN();
  double wall_time_s = std::numeric_limits<double>::quiet_NaN();
  double lambda = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;
};

struct BenchResult {
  std::vector<std::string> images;   // column order
  std::vector<double> peaks;         // section order
  std::vector<std::string> methods;  // row order, "noisy" first
  // cells[peak_index][method_index][image_index]
  std::vector<std::vector<std::vector<BenchCell>>> cells;
};

inline BenchResult run_bench(
    const std::vector<std::pair<std::string, Image>>& corpus,
    const BenchConfig& cfg) {
  if (corpus.empty()) throw InvalidConfig("benchmark corpus is empty");
  if (cfg.peaks.empty()) throw InvalidConfig("benchmark needs peaks");
  if (cfg.methods.empty()) throw InvalidConfig("benchmark needs methods");

  BenchResult result;
  for (const auto& [name, img] : corpus) result.images.push_back(name);
  result.peaks = cfg.peaks;
  result.methods.push_back("noisy");
  for (const Regularizer m : cfg.methods)
    result.methods.push_back(to_string(m));

  result.cells.assign(
      cfg.peaks.size(),
      std::vector<std::vector<BenchCell>>(
          result.methods.size(), std::vector<BenchCell>(corpus.size())));

  for (std::size_t pi = 0; pi < cfg.peaks.size(); ++pi) {
    const double peak = cfg.peaks[pi];
    for (std::size_t ii = 0; ii < corpus.size(); ++ii) {
      const auto& [name, img] = corpus[ii];
      const Image clean = rescale_to_peak(img, peak);
      NoiseSpec spec;
      spec.peak = peak;
      spec.seed = bench_cell_seed(cfg.seed, name, peak);
      const Image noisy = poisson_corrupt(clean, spec);

      BenchCell& noisy_cell = result.cells[pi][0][ii];
      noisy_cell.psnr_db = psnr(noisy, clean, peak);
      noisy_cell.ssim = ssim(noisy, clean, peak);
      noisy_cell.ok = true;

      for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        const SweepResult sweep = run_sweep(noisy, clean, cfg.grid,
                                            cfg.methods[mi], cfg.base, peak,
                                            cfg.jobs);
        BenchCell& cell = result.cells[pi][mi + 1][ii];
        if (sweep.best_index >= 0) {
          const SweepCell& best = sweep.cells[sweep.best_index];
          cell.psnr_db = best.psnr_db;
          cell.ssim = best.ssim;
          cell.wall_time_s = best.wall_time_s;
          cell.lambda = best.config.lambda;
          cell.alpha = best.alpha_display;
          cell.ok = true;
        }
      }
    }
  }
  return result;
}

/// Quality table: one row per (peak, method), one column per image plus the
/// arithmetic-mean column, cells "psnr/ssim" at full precision. Contains no
/// measured durations, so repeated runs are byte-identical.
inline std::string render_bench_quality_csv(const BenchResult& r) {
  std::string out = "peak,method";
  for (const std::string& name : r.images) out += "," + name;
  out += ",avg\n";
  for (std::size_t pi = 0; pi < r.peaks.size(); ++pi) {
    for (std::size_t mi = 0; mi < r.methods.size(); ++mi) {
      out += format_double(r.peaks[pi]);
      out += ',';
      out += r.methods[mi];
      double psnr_sum = 0.0, ssim_sum = 0.0;
      for (std::size_t ii = 0; ii < r.images.size(); ++ii) {
        const BenchCell& cell = r.cells[pi][mi][ii];
        out += ',';
        out += format_double(cell.psnr_db);
        out += '/';
        out += format_double(cell.ssim);
        psnr_sum += cell.psnr_db;
        ssim_sum += cell.ssim;
      }
      const double n = static_cast<double>(r.images.size());
      out += ',';
      out += format_double(psnr_sum / n);
      out += '/';
      out += format_double(ssim_sum / n);
      out += '\n';
    }
  }
  return out;
}

/// Timing table: mean best-cell solve time per method over every
/// (image, peak) scenario. Wall-clock values vary between runs by nature.
inline std::string render_bench_timing_csv(const BenchResult& r) {
  std::string out = "method,avg_time_s\n";
  for (std::size_t mi = 1; mi < r.methods.size(); ++mi) {  // skip "noisy"
    double sum = 0.0;
    int count = 0;
    for (std::size_t pi = 0; pi < r.peaks.size(); ++pi) {
      for (std::size_t ii = 0; ii < r.images.size(); ++ii) {
        const BenchCell& cell = r.cells[pi][mi][ii];
        if (cell.ok && !std::isnan(cell.wall_time_s)) {
          sum += cell.wall_time_s;
          ++count;
        }
      }
    }
    out += r.methods[mi];
    out += ',';
    out += format_double(count > 0
                             ? sum / count
                             : std::numeric_limits<double>::quiet_NaN());
    out += '\n';
  }
  return out;
}

}  // namespace aitv
