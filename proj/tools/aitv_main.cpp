// Command-line front end: corrupt, denoise, score, sweep, bench, profile.
//
// Exit codes: 0 success, 1 solver failure, 2 usage/validation error,
// 3 I/O error.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "aitv/aitv.hpp"

namespace fs = std::filesystem;
using namespace aitv;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

Regularizer parse_method(const std::string& name) {
  if (name == "aitv") return Regularizer::aitv;
  if (name == "tv") return Regularizer::tv_isotropic;
  throw InvalidConfig("unknown method '" + name + "' (expected aitv or tv)");
}

SweepGrid::Selection parse_selection(const std::string& name) {
  if (name == "psnr") return SweepGrid::Selection::best_psnr;
  if (name == "ssim") return SweepGrid::Selection::best_ssim;
  throw InvalidConfig("unknown selection '" + name +
                      "' (expected psnr or ssim)");
}

/// dynamic_range <= 0 means "use the reference image's maximum", which for a
/// peak-rescaled reference is exactly the experiment peak.
double resolve_dynamic_range(double flag, const Image& reference) {
  if (flag > 0.0) return flag;
  const double peak = max_value(reference);
  if (!(peak > 0.0))
    throw InvalidConfig("cannot infer dynamic range from a non-positive image");
  return peak;
}

/// Noisy counts and rescaled references are written exactly in the flat-float
/// format; PNG/PGM outputs are quantized 16-bit.
void write_image_auto(const fs::path& path, const Image& u) {
  const std::string ext = lower(path.extension().string());
  if (ext == ".png") {
    write_png_gray(path, u, 16);
  } else if (ext == ".pgm") {
    write_pgm(path, u, 65535);
  } else {
    write_aitv(path, u);
  }
}

fs::path sibling_with_extension(const fs::path& p, const std::string& ext) {
  fs::path out = p;
  out.replace_extension(ext);
  return out;
}

struct SolverFlags {
  double lambda = 10.0;
  double alpha = 0.5;
  double beta0 = 1e-3;
  double sigma = 1.75;
  double tol = 1e-5;
  int max_iters = 300;

  SolverConfig config(Regularizer method) const {
    SolverConfig c;
    c.lambda = lambda;
    c.alpha = alpha;
    c.beta0 = beta0;
    c.sigma = sigma;
    c.epsilon = tol;
    c.max_iters = max_iters;
    c.regularizer = method;
    return c;
  }
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
  cmd->add_option("--lambda", f.lambda, "Fidelity weight");
  cmd->add_option("--beta0", f.beta0, "Initial penalty");
  cmd->add_option("--sigma", f.sigma, "Penalty growth factor");
  cmd->add_option("--tol", f.tol, "Relative-change stopping tolerance");
  cmd->add_option("--max-iters", f.max_iters, "Iteration cap");
}

/// Solves and writes the full artifact set: flat-float result, 8-bit preview,
/// and a manifest sufficient to re-execute the run.
RunManifest run_denoise(const fs::path& input, const SolverConfig& config,
                        double dynamic_range, const fs::path& out_image,
                        const fs::path& out_preview,
                        const fs::path& out_manifest) {
  const Image f = read_image(input);
  const SolverResult result = admm_solve(f, config);
  write_aitv(out_image, result.u_star);
  write_preview_png(out_preview, result.u_star, dynamic_range);

  RunManifest m;
  m.input = input.string();
  m.solver = config;
  m.dynamic_range = dynamic_range;
  m.output_image = out_image.string();
  m.output_preview = out_preview.string();
  m.iterations = result.iterations;
  m.wall_time_s = result.wall_time_s;
  m.final_rel_change = result.rel_change_history.empty()
                           ? 0.0
                           : result.rel_change_history.back();
  save_json(out_manifest, nlohmann::json(m));
  return m;
}

// ---- noise ----------------------------------------------------------------

struct NoiseArgs {
  std::string input, output, clean_output;
  double peak = 30.0;
  std::uint64_t seed = 0;
};

void cmd_noise(const NoiseArgs& a) {
  const Image g = read_image(a.input);
  NoiseSpec spec;
  spec.peak = a.peak;
  spec.seed = a.seed;
  const Image clean = rescale_to_peak(g, a.peak);
  const Image noisy = poisson_corrupt(clean, spec);

  const fs::path out(a.output);
  fs::path clean_path;
  if (!a.clean_output.empty()) {
    clean_path = a.clean_output;
  } else {
    clean_path = out.parent_path() /
                 (out.stem().string() + "_clean" + out.extension().string());
  }
  write_image_auto(out, noisy);
  write_image_auto(clean_path, clean);
  std::cout << "noisy=" << out.string() << " clean=" << clean_path.string()
            << " peak=" << format_double(a.peak) << " seed=" << a.seed << "\n";
}

// ---- denoise ---------------------------------------------------------------

struct DenoiseArgs {
  std::string input, output, preview, manifest, from_manifest;
  std::string method = "aitv";
  SolverFlags solver;
  double alpha = 0.5;
  bool alpha_given = false;
  double dynamic_range = 0.0;
};

void cmd_denoise(const DenoiseArgs& a) {
  if (!a.from_manifest.empty()) {
    RunManifest m;
    try {
      m = load_json(a.from_manifest).get<RunManifest>();
    } catch (const nlohmann::json::exception& e) {
      throw IoError(a.from_manifest + ": " + e.what());
    }
    run_denoise(m.input, m.solver, m.dynamic_range, m.output_image,
                m.output_preview, a.from_manifest);
    std::cout << "re-executed " << a.from_manifest << " -> " << m.output_image
              << "\n";
    return;
  }

  if (a.input.empty() || a.output.empty())
    throw InvalidConfig("denoise needs INPUT and OUTPUT (or --from-manifest)");

  const Regularizer method = parse_method(a.method);
  if (method == Regularizer::tv_isotropic && a.alpha_given)
    std::cerr << "warning: --alpha is ignored with --method tv\n";

  SolverConfig config = a.solver.config(method);
  config.alpha = a.alpha;
  config.validate();

  const Image f = read_image(a.input);
  const double L = resolve_dynamic_range(a.dynamic_range, f);

  const fs::path out(a.output);
  const fs::path preview = a.preview.empty()
                               ? sibling_with_extension(out, ".png")
                               : fs::path(a.preview);
  const fs::path manifest = a.manifest.empty()
                                ? sibling_with_extension(out, ".json")
                                : fs::path(a.manifest);

  const RunManifest m = run_denoise(a.input, config, L, out, preview, manifest);
  std::cout << "iterations=" << m.iterations
            << " wall_time_s=" << format_double(m.wall_time_s) << " output="
            << m.output_image << "\n";
}

// ---- metrics ----------------------------------------------------------------

struct MetricsArgs {
  std::string denoised, clean, output;
  double dynamic_range = 0.0;
};

void cmd_metrics(const MetricsArgs& a) {
  const Image u = read_image(a.denoised);
  const Image g = read_image(a.clean);
  const double L = resolve_dynamic_range(a.dynamic_range, g);
  const QualityReport report = quality_report(u, g, L);
  const nlohmann::json j(report);
  if (!a.output.empty()) save_json(a.output, j);
  std::cout << j.dump(2) << "\n";
}

// ---- sweep -------------------------------------------------------------------

struct SweepArgs {
  std::string noisy, clean, output = "sweep.csv", best_prefix;
  std::string method = "aitv";
  std::string select = "psnr";
  std::vector<double> lambdas;
  std::vector<double> alphas;
  SolverFlags solver;
  double dynamic_range = 0.0;
  int jobs = 1;
};

SweepGrid make_grid(const std::vector<double>& lambdas,
                    const std::vector<double>& alphas,
                    const std::string& select) {
  SweepGrid grid;
  if (!lambdas.empty()) grid.lambdas = lambdas;
  if (!alphas.empty()) grid.alphas = alphas;
  grid.selection = parse_selection(select);
  return grid;
}

void cmd_sweep(const SweepArgs& a) {
  const Regularizer method = parse_method(a.method);
  const SweepGrid grid = make_grid(a.lambdas, a.alphas, a.select);
  const Image noisy = read_image(a.noisy);
  const Image clean = read_image(a.clean);
  const double L = resolve_dynamic_range(a.dynamic_range, clean);

  const SweepResult result = run_sweep(noisy, clean, grid, method,
                                       a.solver.config(method), L, a.jobs);
  detail::write_file_bytes(a.output, render_sweep_csv(result));

  if (result.best_index < 0)
    throw SolverFailure("every sweep cell failed; see " + a.output);

  const SweepCell& best = result.cells[result.best_index];
  std::cout << "cells=" << result.cells.size()
            << " best_lambda=" << format_double(best.config.lambda);
  if (!std::isnan(best.alpha_display))
    std::cout << " best_alpha=" << format_double(best.alpha_display);
  std::cout << " psnr_db=" << format_double(best.psnr_db)
            << " ssim=" << format_double(best.ssim) << "\n";

  if (!a.best_prefix.empty()) {
    const fs::path prefix(a.best_prefix);
    run_denoise(a.noisy, best.config, L, prefix.string() + ".aitv",
                prefix.string() + ".png", prefix.string() + ".json");
  }
}

// ---- bench --------------------------------------------------------------------

struct BenchArgs {
  std::string corpus_dir, output_dir = ".";
  std::vector<double> peaks{80, 55, 30};
  std::vector<std::string> methods{"aitv", "tv"};
  std::vector<double> lambdas;
  std::vector<double> alphas;
  std::string select = "psnr";
  SolverFlags solver;
  std::uint64_t seed = 0;
  int jobs = 1;
};

void cmd_bench(const BenchArgs& a) {
  std::vector<std::pair<std::string, Image>> corpus;
  {
    std::vector<fs::path> files;
    if (!fs::is_directory(a.corpus_dir))
      throw IoError(a.corpus_dir + ": not a directory");
    for (const auto& entry : fs::directory_iterator(a.corpus_dir)) {
      if (!entry.is_regular_file()) continue;
      const std::string ext = lower(entry.path().extension().string());
      if (ext == ".png" || ext == ".pgm" || ext == ".aitv")
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& p : files)
      corpus.emplace_back(p.stem().string(), read_image(p));
  }

  BenchConfig cfg;
  cfg.peaks = a.peaks;
  cfg.methods.clear();
  for (const std::string& m : a.methods) cfg.methods.push_back(parse_method(m));
  cfg.grid = make_grid(a.lambdas, a.alphas, a.select);
  cfg.base = a.solver.config(Regularizer::aitv);
  cfg.seed = a.seed;
  cfg.jobs = a.jobs;

  const BenchResult result = run_bench(corpus, cfg);
  const fs::path dir(a.output_dir);
  const fs::path quality = dir / "bench_quality.csv";
  const fs::path timing = dir / "bench_timing.csv";
  detail::write_file_bytes(quality, render_bench_quality_csv(result));
  detail::write_file_bytes(timing, render_bench_timing_csv(result));
  std::cout << "quality=" << quality.string() << " timing=" << timing.string()
            << "\n";
}

// ---- profile --------------------------------------------------------------------

struct ProfileArgs {
  std::string input, output;
  int row = 1;  // 1-based on the command line
};

void cmd_profile(const ProfileArgs& a) {
  const Image u = read_image(a.input);
  const std::vector<double> values = line_profile(u, a.row - 1);
  write_profile_csv(a.output, values);
  std::cout << "row=" << a.row << " values=" << values.size() << " output="
            << a.output << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Poisson denoising via anisotropic-isotropic total variation"};
  app.require_subcommand(1);

  NoiseArgs noise_args;
  auto* noise = app.add_subcommand(
      "noise", "Rescale an image's peak and apply Poisson noise");
  noise->add_option("input", noise_args.input, "Clean grayscale image")
      ->required();
  noise->add_option("output", noise_args.output, "Noisy output path")
      ->required();
  noise->add_option("--peak", noise_args.peak, "Target peak intensity");
  noise->add_option("--seed", noise_args.seed, "RNG seed");
  noise->add_option("--clean-output", noise_args.clean_output,
                    "Path for the rescaled clean reference "
                    "(default: <output>_clean.<ext>)");
  noise->callback([&] { cmd_noise(noise_args); });

  DenoiseArgs den_args;
  auto* den = app.add_subcommand("denoise", "Denoise a Poisson-noisy image");
  den->add_option("input", den_args.input, "Noisy image");
  den->add_option("output", den_args.output, "Flat-float result path");
  den->add_option("--method", den_args.method, "aitv or tv");
  add_solver_flags(den, den_args.solver);
  auto* alpha_opt =
      den->add_option("--alpha", den_args.alpha, "Isotropic weight in [0,1]");
  den->add_option("--dynamic-range", den_args.dynamic_range,
                  "Preview scale; <= 0 means use the input's maximum");
  den->add_option("--preview", den_args.preview, "8-bit preview PNG path");
  den->add_option("--manifest", den_args.manifest, "Manifest JSON path");
  den->add_option("--from-manifest", den_args.from_manifest,
                  "Re-execute a recorded run");
  den->callback([&] {
    den_args.alpha_given = alpha_opt->count() > 0;
    cmd_denoise(den_args);
  });

  MetricsArgs met_args;
  auto* met = app.add_subcommand("metrics", "PSNR/SSIM of a result vs clean");
  met->add_option("denoised", met_args.denoised)->required();
  met->add_option("clean", met_args.clean)->required();
  met->add_option("--dynamic-range", met_args.dynamic_range,
                  "<= 0 means use the clean image's maximum");
  met->add_option("--output", met_args.output, "Also write the JSON here");
  met->callback([&] { cmd_metrics(met_args); });

  SweepArgs sweep_args;
  auto* sweep =
      app.add_subcommand("sweep", "Grid-search lambda (and alpha) on one image");
  sweep->add_option("noisy", sweep_args.noisy)->required();
  sweep->add_option("clean", sweep_args.clean)->required();
  sweep->add_option("--method", sweep_args.method, "aitv or tv");
  sweep->add_option("--lambdas", sweep_args.lambdas, "Comma-separated grid")
      ->delimiter(',');
  sweep->add_option("--alphas", sweep_args.alphas, "Comma-separated grid")
      ->delimiter(',');
  sweep->add_option("--select", sweep_args.select, "psnr or ssim");
  add_solver_flags(sweep, sweep_args.solver);
  sweep->add_option("--dynamic-range", sweep_args.dynamic_range,
                    "<= 0 means use the clean image's maximum");
  sweep->add_option("--output", sweep_args.output, "Per-cell CSV path");
  sweep->add_option("--best", sweep_args.best_prefix,
                    "Write <prefix>.aitv/.png/.json for the winning cell");
  sweep->add_option("--jobs", sweep_args.jobs, "Parallel workers");
  sweep->callback([&] { cmd_sweep(sweep_args); });

  BenchArgs bench_args;
  auto* bench = app.add_subcommand(
      "bench", "Sweep every corpus image over peaks and methods");
  bench->add_option("corpus_dir", bench_args.corpus_dir)->required();
  bench->add_option("--peaks", bench_args.peaks, "Comma-separated peaks")
      ->delimiter(',');
  bench->add_option("--methods", bench_args.methods, "Subset of aitv,tv")
      ->delimiter(',');
  bench->add_option("--seed", bench_args.seed, "Base seed");
  bench->add_option("--lambdas", bench_args.lambdas, "Grid override")
      ->delimiter(',');
  bench->add_option("--alphas", bench_args.alphas, "Grid override")
      ->delimiter(',');
  bench->add_option("--select", bench_args.select, "psnr or ssim");
  add_solver_flags(bench, bench_args.solver);
  bench->add_option("--output-dir", bench_args.output_dir,
                    "Directory for bench_quality.csv / bench_timing.csv");
  bench->add_option("--jobs", bench_args.jobs, "Parallel workers");
  bench->callback([&] { cmd_bench(bench_args); });

  ProfileArgs prof_args;
  auto* prof =
      app.add_subcommand("profile", "Extract one image row as CSV values");
  prof->add_option("input", prof_args.input)->required();
  prof->add_option("output", prof_args.output)->required();
  prof->add_option("--row", prof_args.row, "1-based row index")->required();
  prof->callback([&] { cmd_profile(prof_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const SolverFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
