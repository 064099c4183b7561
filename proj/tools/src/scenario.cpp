#include "umot/cli/scenario.hpp"

#include <cmath>
#include <set>

#include "json.hpp"
#include "umot/error.hpp"
#include "umot/io.hpp"

namespace umot::cli {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& what) { fail(ErrorCode::InvalidConfig, "scenario: " + what); }

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) bad(where + " must be an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) bad("unknown key '" + key + "' in " + where);
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    bad("'" + std::string(key) + "' in " + where + " has the wrong type");
  }
}

template <typename T>
T get_required(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) bad("missing '" + std::string(key) + "' in " + where);
  return get_or<T>(obj, key, T{}, where);
}

Vec2 vec2_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    bad(where + " must be a pair of numbers");
  return {j[0].get<double>(), j[1].get<double>()};
}

const char* mode_name(IterationMode m) { return m == IterationMode::Frozen ? "frozen" : "refreshed"; }

const char* inversion_name(Inversion i) {
  switch (i) {
    case Inversion::Nonlinear: return "nonlinear";
    case Inversion::Linearized: return "linearized";
    case Inversion::ConstantBg: return "constbg";
  }
  return "nonlinear";
}

GridSpec parse_grid(const json& j) {
  check_keys(j, {"nx", "ny", "lx", "ly", "x0", "y0"}, "grid");
  GridSpec g;
  g.nx = get_required<int>(j, "nx", "grid");
  g.ny = get_required<int>(j, "ny", "grid");
  g.lx = get_or(j, "lx", g.lx, "grid");
  g.ly = get_or(j, "ly", g.ly, "grid");
  g.x0 = get_or(j, "x0", g.x0, "grid");
  g.y0 = get_or(j, "y0", g.y0, "grid");
  if (g.nx < 5 || g.ny < 5) bad("grid needs at least 5 nodes per axis");
  if (!(g.lx > 0.0) || !(g.ly > 0.0)) bad("grid extents must be positive");
  return g;
}

BackgroundSpec parse_background(const json& j) {
  BackgroundSpec b;
  const auto type = get_or<std::string>(j, "type", "constant", "background");
  if (type == "constant") {
    check_keys(j, {"type", "gamma", "sigma"}, "background");
    b.gamma = get_or(j, "gamma", b.gamma, "background");
    b.sigma = get_or(j, "sigma", b.sigma, "background");
    if (!(b.gamma > 0.0) || !(b.sigma >= 0.0)) bad("background needs gamma > 0 and sigma >= 0");
  } else if (type == "files") {
    check_keys(j, {"type", "gamma_file", "sigma_file"}, "background");
    b.kind = BackgroundSpec::Kind::Files;
    b.gamma_file = get_required<std::string>(j, "gamma_file", "background");
    b.sigma_file = get_required<std::string>(j, "sigma_file", "background");
  } else {
    bad("background type must be 'constant' or 'files'");
  }
  return b;
}

BoundarySpec parse_boundary(const json& j) {
  BoundarySpec b;
  const auto type = get_required<std::string>(j, "type", "boundary");
  if (type == "constant_bg") {
    check_keys(j, {"type", "dirs"}, "boundary");
    b.kind = BoundarySpec::Kind::ConstantBg;
    if (!j.contains("dirs") || !j.at("dirs").is_array() || j.at("dirs").empty())
      bad("boundary 'dirs' must be a nonempty list");
    for (const auto& d : j.at("dirs")) b.dirs.push_back(vec2_from(d, "boundary direction"));
  } else if (type == "cgo") {
    check_keys(j, {"type", "M", "k"}, "boundary");
    b.kind = BoundarySpec::Kind::Cgo;
    b.M = get_or(j, "M", b.M, "boundary");
    b.k = get_or(j, "k", b.k, "boundary");
  } else if (type == "explicit") {
    check_keys(j, {"type", "traces"}, "boundary");
    b.kind = BoundarySpec::Kind::Explicit;
    b.traces = get_required<std::vector<std::string>>(j, "traces", "boundary");
    if (b.traces.empty()) bad("boundary 'traces' must be nonempty");
  } else {
    bad("boundary type must be 'constant_bg', 'cgo' or 'explicit'");
  }
  return b;
}

std::vector<Bump> parse_phantom(const json& j) {
  if (!j.is_array()) bad("phantom must be a list of bumps");
  std::vector<Bump> out;
  for (const auto& e : j) {
    check_keys(e, {"center", "radius", "amplitude", "target"}, "phantom bump");
    Bump b;
    if (!e.contains("center")) bad("phantom bump is missing 'center'");
    b.center = vec2_from(e.at("center"), "phantom center");
    b.radius = get_required<double>(e, "radius", "phantom bump");
    b.amplitude = get_required<double>(e, "amplitude", "phantom bump");
    const auto target = get_required<std::string>(e, "target", "phantom bump");
    if (target == "gamma")
      b.target = BumpTarget::Gamma;
    else if (target == "sigma")
      b.target = BumpTarget::Sigma;
    else
      bad("phantom target must be 'gamma' or 'sigma'");
    if (!(b.radius > 0.0)) bad("phantom radius must be positive");
    out.push_back(b);
  }
  return out;
}

NoiseSpec parse_noise(const json& j) {
  check_keys(j, {"level", "seed"}, "noise");
  NoiseSpec n;
  n.level = get_or(j, "level", 0.0, "noise");
  if (!(n.level >= 0.0)) bad("noise level must be nonnegative");
  if (j.contains("seed") && !j.at("seed").is_null()) {
    if (!j.at("seed").is_number_unsigned()) bad("noise seed must be a nonnegative integer");
    n.seed = j.at("seed").get<std::uint64_t>();
  }
  if (n.level > 0.0 && !n.seed) bad("noise seed is required when the noise level is positive");
  return n;
}

SolverSpec parse_solver(const json& j) {
  check_keys(j,
             {"forward_tolerance", "grad_floor_relative", "xi_samples", "margin_threshold", "tolerance",
              "step_tolerance", "max_iterations", "damping", "mode", "gamma_min"},
             "solver");
  SolverSpec s;
  s.forward_tolerance = get_or(j, "forward_tolerance", s.forward_tolerance, "solver");
  s.grad_floor_relative = get_or(j, "grad_floor_relative", s.grad_floor_relative, "solver");
  s.xi_samples = get_or(j, "xi_samples", s.xi_samples, "solver");
  s.margin_threshold = get_or(j, "margin_threshold", s.margin_threshold, "solver");
  s.tolerance = get_or(j, "tolerance", s.tolerance, "solver");
  s.step_tolerance = get_or(j, "step_tolerance", s.step_tolerance, "solver");
  s.max_iterations = get_or(j, "max_iterations", s.max_iterations, "solver");
  s.damping = get_or(j, "damping", s.damping, "solver");
  s.gamma_min = get_or(j, "gamma_min", s.gamma_min, "solver");
  const auto mode = get_or<std::string>(j, "mode", "frozen", "solver");
  if (mode == "frozen")
    s.mode = IterationMode::Frozen;
  else if (mode == "refreshed")
    s.mode = IterationMode::Refreshed;
  else
    bad("solver mode must be 'frozen' or 'refreshed'");
  if (s.max_iterations < 1) bad("solver max_iterations must be positive");
  if (!(s.damping > 0.0 && s.damping <= 1.0)) bad("solver damping must lie in (0, 1]");
  if (!(s.gamma_min > 0.0)) bad("solver gamma_min must be positive");
  return s;
}

std::filesystem::path resolve(const ScenarioConfig& c, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : c.base_dir / path;
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    bad(std::string("malformed JSON: ") + e.what());
  }
  check_keys(root, {"grid", "background", "eta", "boundary", "phantom", "noise", "solver", "inversion"}, "scenario");
  ScenarioConfig c;
  c.base_dir = base_dir;
  if (!root.contains("grid")) bad("missing 'grid'");
  if (!root.contains("boundary")) bad("missing 'boundary'");
  c.grid = parse_grid(root.at("grid"));
  if (root.contains("background")) c.background = parse_background(root.at("background"));
  c.eta = get_or(root, "eta", c.eta, "scenario");
  if (c.eta == 0.0 || !std::isfinite(c.eta)) bad("eta must be finite and nonzero");
  c.boundary = parse_boundary(root.at("boundary"));
  if (root.contains("phantom")) c.phantom = parse_phantom(root.at("phantom"));
  if (root.contains("noise")) c.noise = parse_noise(root.at("noise"));
  if (root.contains("solver")) c.solver = parse_solver(root.at("solver"));
  const auto inv = get_or<std::string>(root, "inversion", "nonlinear", "scenario");
  if (inv == "nonlinear")
    c.inversion = Inversion::Nonlinear;
  else if (inv == "linearized")
    c.inversion = Inversion::Linearized;
  else if (inv == "constbg")
    c.inversion = Inversion::ConstantBg;
  else
    bad("inversion must be 'nonlinear', 'linearized' or 'constbg'");
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  return parse_scenario(io::read_text(path), path.parent_path());
}

std::string serialize_scenario(const ScenarioConfig& c) {
  ordered_json root;
  root["grid"] = ordered_json{{"nx", c.grid.nx}, {"ny", c.grid.ny}, {"lx", c.grid.lx},
                              {"ly", c.grid.ly}, {"x0", c.grid.x0}, {"y0", c.grid.y0}};
  if (c.background.kind == BackgroundSpec::Kind::Constant)
    root["background"] =
        ordered_json{{"type", "constant"}, {"gamma", c.background.gamma}, {"sigma", c.background.sigma}};
  else
    root["background"] = ordered_json{
        {"type", "files"}, {"gamma_file", c.background.gamma_file}, {"sigma_file", c.background.sigma_file}};
  root["eta"] = c.eta;
  ordered_json b;
  switch (c.boundary.kind) {
    case BoundarySpec::Kind::ConstantBg: {
      b["type"] = "constant_bg";
      b["dirs"] = ordered_json::array();
      for (const auto& d : c.boundary.dirs) b["dirs"].push_back({d[0], d[1]});
      break;
    }
    case BoundarySpec::Kind::Cgo:
      b["type"] = "cgo";
      b["M"] = c.boundary.M;
      b["k"] = c.boundary.k;
      break;
    case BoundarySpec::Kind::Explicit:
      b["type"] = "explicit";
      b["traces"] = c.boundary.traces;
      break;
  }
  root["boundary"] = b;
  root["phantom"] = ordered_json::array();
  for (const auto& bump : c.phantom)
    root["phantom"].push_back(ordered_json{{"center", {bump.center[0], bump.center[1]}},
                                           {"radius", bump.radius},
                                           {"amplitude", bump.amplitude},
                                           {"target", bump.target == BumpTarget::Gamma ? "gamma" : "sigma"}});
  ordered_json noise{{"level", c.noise.level}};
  noise["seed"] = c.noise.seed ? ordered_json(*c.noise.seed) : ordered_json(nullptr);
  root["noise"] = noise;
  const auto& s = c.solver;
  root["solver"] = ordered_json{{"forward_tolerance", s.forward_tolerance},
                                {"grad_floor_relative", s.grad_floor_relative},
                                {"xi_samples", s.xi_samples},
                                {"margin_threshold", s.margin_threshold},
                                {"tolerance", s.tolerance},
                                {"step_tolerance", s.step_tolerance},
                                {"max_iterations", s.max_iterations},
                                {"damping", s.damping},
                                {"mode", mode_name(s.mode)},
                                {"gamma_min", s.gamma_min}};
  root["inversion"] = inversion_name(c.inversion);
  return root.dump(2) + "\n";
}

CoefficientPair background_coefficients(const ScenarioConfig& c) {
  const Grid grid = c.grid.grid();
  if (c.background.kind == BackgroundSpec::Kind::Constant)
    return CoefficientPair(ScalarField(grid, c.background.gamma), ScalarField(grid, c.background.sigma),
                           c.solver.gamma_min);
  ScalarField gamma = io::field_from_json(io::read_text(resolve(c, c.background.gamma_file)));
  ScalarField sigma = io::field_from_json(io::read_text(resolve(c, c.background.sigma_file)));
  require_same_grid(gamma.grid(), grid, "background gamma file");
  require_same_grid(sigma.grid(), grid, "background sigma file");
  return CoefficientPair(std::move(gamma), std::move(sigma), c.solver.gamma_min);
}

std::vector<BoundaryData> scenario_boundary_set(const ScenarioConfig& c, const CoefficientPair& background) {
  const Grid& grid = background.grid();
  switch (c.boundary.kind) {
    case BoundarySpec::Kind::Cgo:
      return cgo_boundary_set(grid, c.boundary.M, c.boundary.k, background);
    case BoundarySpec::Kind::Explicit: {
      std::vector<BoundaryData> out;
      for (const auto& p : c.boundary.traces) {
        out.push_back(io::boundary_from_json(io::read_text(resolve(c, p))));
        require_same_grid(out.back().grid(), grid, "boundary trace file");
      }
      return out;
    }
    case BoundarySpec::Kind::ConstantBg: {
      require(c.background.kind == BackgroundSpec::Kind::Constant, ErrorCode::InvalidConfig,
              "scenario: constant_bg boundary requires a constant background");
      // Certification is a separate pipeline stage, so no direction check here.
      const double kappa = std::sqrt(c.background.sigma / c.background.gamma);
      std::vector<BoundaryData> out;
      for (const auto& v : c.boundary.dirs)
        out.push_back(BoundaryData::sample(grid, [&](double x, double y) {
          return std::exp(kappa * (v[0] * x + v[1] * y));
        }));
      return out;
    }
  }
  return {};
}

ForwardOptions forward_options(const ScenarioConfig& c, int threads) {
  return ForwardOptions{c.solver.forward_tolerance, c.solver.grad_floor_relative, threads};
}

CertifyOptions certify_options(const ScenarioConfig& c, int threads) {
  CertifyOptions o;
  o.xi_samples = c.solver.xi_samples;
  o.margin_threshold = c.solver.margin_threshold;
  o.threads = threads;
  return o;
}

ReconstructOptions reconstruct_options(const ScenarioConfig& c, int threads) {
  ReconstructOptions o;
  o.mode = c.solver.mode;
  o.tolerance = c.solver.tolerance;
  o.step_tolerance = c.solver.step_tolerance;
  o.max_iterations = c.solver.max_iterations;
  o.damping = c.solver.damping;
  o.certify = certify_options(c, threads);
  o.forward = forward_options(c, threads);
  return o;
}

}  // namespace umot::cli
