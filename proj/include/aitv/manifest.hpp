#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "aitv/errors.hpp"
#include "aitv/metrics.hpp"
#include "aitv/noise.hpp"
#include "aitv/solver.hpp"

namespace aitv {

inline constexpr const char* kToolVersion = "1.0.0";

inline void to_json(nlohmann::json& j, const SolverConfig& c) {
  j = nlohmann::json{{"lambda", c.lambda},       {"alpha", c.alpha},
                     {"beta0", c.beta0},         {"sigma", c.sigma},
                     {"epsilon", c.epsilon},     {"max_iters", c.max_iters},
                     {"beta_cap", c.beta_cap},
                     {"regularizer", to_string(c.regularizer)}};
}

inline void from_json(const nlohmann::json& j, SolverConfig& c) {
  j.at("lambda").get_to(c.lambda);
  j.at("alpha").get_to(c.alpha);
  j.at("beta0").get_to(c.beta0);
  j.at("sigma").get_to(c.sigma);
  j.at("epsilon").get_to(c.epsilon);
  j.at("max_iters").get_to(c.max_iters);
  j.at("beta_cap").get_to(c.beta_cap);
  const std::string reg = j.at("regularizer").get<std::string>();
  if (reg == "aitv") {
    c.regularizer = Regularizer::aitv;
  } else if (reg == "tv_isotropic") {
    c.regularizer = Regularizer::tv_isotropic;
  } else {
    throw InvalidConfig("unknown regularizer '" + reg + "' in manifest");
  }
}

inline void to_json(nlohmann::json& j, const NoiseSpec& s) {
  j = nlohmann::json{{"peak", s.peak}, {"seed", s.seed}};
}

inline void from_json(const nlohmann::json& j, NoiseSpec& s) {
  j.at("peak").get_to(s.peak);
  j.at("seed").get_to(s.seed);
}

// PSNR of identical images is +infinity, which JSON numbers cannot carry;
// it is encoded as the string "inf".
inline void to_json(nlohmann::json& j, const QualityReport& r) {
  j = nlohmann::json{{"ssim", r.ssim}, {"dynamic_range", r.dynamic_range}};
  if (std::isinf(r.psnr_db)) {
    j["psnr_db"] = "inf";
  } else {
    j["psnr_db"] = r.psnr_db;
  }
}

inline void from_json(const nlohmann::json& j, QualityReport& r) {
  j.at("ssim").get_to(r.ssim);
  j.at("dynamic_range").get_to(r.dynamic_range);
  const auto& p = j.at("psnr_db");
  if (p.is_string()) {
    if (p.get<std::string>() != "inf")
      throw InvalidConfig("psnr_db string value must be \"inf\"");
    r.psnr_db = std::numeric_limits<double>::infinity();
  } else {
    r.psnr_db = p.get<double>();
  }
}

/// Everything needed to re-execute a denoise run and reproduce its flat-float
/// output byte for byte: the input file, the solver configuration, and the
/// preview dynamic range. Iterations and wall time are informational.
struct RunManifest {
  std::string command = "denoise";
  std::string input;
  SolverConfig solver;
  double dynamic_range = 30.0;
  std::string output_image;    // flat-float result
  std::string output_preview;  // 8-bit PNG
  std::optional<NoiseSpec> noise;  // set when the input was synthesized here
  int iterations = 0;
  double wall_time_s = 0.0;
  double final_rel_change = 0.0;
};

inline void to_json(nlohmann::json& j, const RunManifest& m) {
  j = nlohmann::json{{"tool", "aitv"},
                     {"version", kToolVersion},
                     {"command", m.command},
                     {"input", m.input},
                     {"solver", m.solver},
                     {"dynamic_range", m.dynamic_range},
                     {"output_image", m.output_image},
                     {"output_preview", m.output_preview},
                     {"iterations", m.iterations},
                     {"wall_time_s", m.wall_time_s},
                     {"final_rel_change", m.final_rel_change}};
  if (m.noise) j["noise"] = *m.noise;
}

inline void from_json(const nlohmann::json& j, RunManifest& m) {
  j.at("command").get_to(m.command);
  j.at("input").get_to(m.input);
  j.at("solver").get_to(m.solver);
  j.at("dynamic_range").get_to(m.dynamic_range);
  j.at("output_image").get_to(m.output_image);
  j.at("output_preview").get_to(m.output_preview);
  if (j.contains("noise")) m.noise = j.at("noise").get<NoiseSpec>();
  if (j.contains("iterations")) j.at("iterations").get_to(m.iterations);
  if (j.contains("wall_time_s")) j.at("wall_time_s").get_to(m.wall_time_s);
  if (j.contains("final_rel_change"))
    j.at("final_rel_change").get_to(m.final_rel_change);
}

inline void save_json(const std::filesystem::path& path,
                      const nlohmann::json& j) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

inline nlohmann::json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return j;
}

}  // namespace aitv
