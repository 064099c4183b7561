#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "umot/field.hpp"
#include "umot/forward.hpp"
#include "umot/nonlinear.hpp"

namespace umot::cli {

struct GridSpec {
  int nx = 48;
  int ny = 48;
  double lx = 1.0;
  double ly = 1.0;
  double x0 = 0.0;
  double y0 = 0.0;

  [[nodiscard]] Grid grid() const { return Grid::spanning(nx, ny, lx, ly, x0, y0); }
};

struct BackgroundSpec {
  enum class Kind { Constant, Files };
  Kind kind = Kind::Constant;
  double gamma = 1.0;
  double sigma = 1.0;
  std::string gamma_file;
  std::string sigma_file;
};

struct BoundarySpec {
  enum class Kind { Cgo, ConstantBg, Explicit };
  Kind kind = Kind::ConstantBg;
  double M = 4.0;
  double k = 1.0;
  std::vector<Vec2> dirs;
  std::vector<std::string> traces;
};

enum class BumpTarget { Gamma, Sigma };

struct Bump {
  Vec2 center{0.5, 0.5};
  double radius = 0.2;
  double amplitude = 0.0;
  BumpTarget target = BumpTarget::Gamma;
};

struct NoiseSpec {
  double level = 0.0;
  std::optional<std::uint64_t> seed;
};

struct SolverSpec {
  double forward_tolerance = 1e-10;
  double grad_floor_relative = 1e-8;
  int xi_samples = 128;
  double margin_threshold = 1e-6;
  double tolerance = 1e-8;
  double step_tolerance = 1e-10;
  int max_iterations = 100;
  double damping = 1.0;
  IterationMode mode = IterationMode::Frozen;
  double gamma_min = kDefaultGammaMin;
};

enum class Inversion { Nonlinear, Linearized, ConstantBg };

/// Fully determined experiment. Relative file paths resolve against base_dir.
struct ScenarioConfig {
  GridSpec grid;
  BackgroundSpec background;
  double eta = 1.0;
  BoundarySpec boundary;
  std::vector<Bump> phantom;
  NoiseSpec noise;
  SolverSpec solver;
  Inversion inversion = Inversion::Nonlinear;
  std::filesystem::path base_dir;
};

/// Throws Error(InvalidConfig) on malformed JSON, unknown keys, missing
/// required keys, or a positive noise level without a seed.
ScenarioConfig parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Canonical JSON text: every key written, fixed order, so that
/// serialize(parse(serialize(c))) == serialize(c).
std::string serialize_scenario(const ScenarioConfig& config);

/// Background coefficients on the scenario grid.
CoefficientPair background_coefficients(const ScenarioConfig& config);
/// Boundary conditions of the scenario (no certification check).
std::vector<BoundaryData> scenario_boundary_set(const ScenarioConfig& config, const CoefficientPair& background);

ForwardOptions forward_options(const ScenarioConfig& config, int threads);
CertifyOptions certify_options(const ScenarioConfig& config, int threads);
ReconstructOptions reconstruct_options(const ScenarioConfig& config, int threads);

}  // namespace umot::cli
