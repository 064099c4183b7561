#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "umot/cli/phantom.hpp"
#include "umot/cli/pipeline.hpp"
#include "umot/cli/reports.hpp"
#include "umot/cli/scenario.hpp"
#include "umot/constant_bg.hpp"
#include "umot/error.hpp"
#include "umot/io.hpp"
#include "umot/linearized.hpp"
#include "umot/nonlinear.hpp"

namespace {

using namespace umot;
using namespace umot::cli;

constexpr int kExitUsage = 1;
constexpr int kExitFailure = 2;

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("umot");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("UMOT_LOG");
  const std::string level = env ? env : "info";
  if (level == "error")
    spdlog::set_level(spdlog::level::err);
  else if (level == "debug")
    spdlog::set_level(spdlog::level::debug);
  else {
    spdlog::set_level(spdlog::level::info);
    if (level != "info") spdlog::warn("UMOT_LOG='{}' is not one of error, info, debug; using info", level);
  }
}

struct Globals {
  std::string scenario;
  std::string out;
  int threads = 1;
  bool allow_noncertified = false;
};

ScenarioConfig require_scenario(const Globals& g) {
  if (g.scenario.empty()) fail(ErrorCode::InvalidConfig, "--scenario is required");
  return load_scenario(g.scenario);
}

std::string require_out(const Globals& g) {
  if (g.out.empty()) fail(ErrorCode::InvalidConfig, "--out is required");
  return g.out;
}

int cmd_pipeline(const Globals& g, bool forward_only) {
  const auto config = require_scenario(g);
  PipelineOptions opts{g.threads, g.allow_noncertified, forward_only};
  const auto manifest = run_pipeline(config, require_out(g), opts);
  spdlog::info("wrote {} files to {}", manifest.outputs.size(), g.out);
  return 0;
}

int cmd_certify(const Globals& g, std::optional<int> xi_samples, const std::string& report_path) {
  const auto config = require_scenario(g);
  const auto background = background_coefficients(config);
  const auto traces = scenario_boundary_set(config, background);
  const auto bundle = build_bundle(background, config.eta, traces, forward_options(config, g.threads));
  auto opts = certify_options(config, g.threads);
  if (xi_samples) opts.xi_samples = *xi_samples;
  const auto report = certify_field(bundle, opts);
  bool ok = report.certified;
  if (config.boundary.kind == BoundarySpec::Kind::ConstantBg)
    ok = ok && certify_directions(DirectionSet::planar(config.boundary.dirs)).certified;
  const std::string text = report_to_json(report);
  if (report_path.empty())
    std::cout << text << '\n';
  else
    io::write_text(report_path, text);
  spdlog::info("global margin {:.6e}, {} masked nodes, certified: {}", report.global_margin, report.masked_nodes, ok);
  if (!ok && !g.allow_noncertified) {
    spdlog::error("certification failed");
    return kExitFailure;
  }
  return 0;
}

int cmd_linearize(const Globals& g, const std::string& dh_path, const std::string& g_path) {
  const auto config = require_scenario(g);
  const auto background = background_coefficients(config);
  const auto traces = scenario_boundary_set(config, background);
  const auto bundle = build_bundle(background, config.eta, traces, forward_options(config, g.threads));
  const auto dH = fields_from_json(io::read_text(dh_path));
  AssembleOptions ao;
  ao.allow_deficient = g.allow_noncertified;
  ao.threads = g.threads;
  const auto problem = assemble_system(bundle, dH, ao);
  NormalSolveOptions no;
  no.check_rank = !g.allow_noncertified;
  if (!g_path.empty()) no.g = boundaries_from_json(io::read_text(g_path));
  const auto res = solve_normal_equations(problem.system, problem.rhs, no);
  const Eigen::VectorXd r = problem.system.A().apply(problem.system.pack(res.v)) - problem.rhs;
  const double rel = problem.rhs.norm() > 0.0 ? r.norm() / problem.rhs.norm() : r.norm();
  io::write_text(require_out(g), perturbation_to_json(res, rel));
  spdlog::info("relative residual {:.3e}", rel);
  return 0;
}

int cmd_constbg(const Globals& g, double gamma0, double sigma0, double eta, const std::string& dirs_path,
                const std::string& dh_path) {
  const auto dirs = directions_from_json(io::read_text(dirs_path));
  const ConstantBackground bg(gamma0, sigma0, eta, dirs);
  const auto dH = fields_from_json(io::read_text(dh_path));
  const auto u = bg.solutions(dH.front().grid());
  require(dH.size() == u.size(), ErrorCode::InvalidArgument, "need one dH field per direction");
  std::vector<ScalarField> S;
  for (std::size_t j = 0; j < dH.size(); ++j) S.push_back(preprocess_data(dH[j], u[j], bg));
  const auto sol = solve_constant_bg(bg, S);
  io::write_text(require_out(g), constbg_to_json(sol));
  spdlog::info("normal-system residual {:.3e}", sol.residual);
  return 0;
}

int cmd_reconstruct(const Globals& g, const std::string& hmeas_path, const std::string& init_path,
                    const std::string& mode, const std::string& log_path) {
  const auto config = require_scenario(g);
  const auto background = background_coefficients(config);
  const auto traces = scenario_boundary_set(config, background);
  const auto H = fields_from_json(io::read_text(hmeas_path));
  const auto init = coefficients_from_json(io::read_text(init_path), config.solver.gamma_min);
  auto opts = reconstruct_options(config, g.threads);
  if (mode == "frozen")
    opts.mode = IterationMode::Frozen;
  else if (mode == "refreshed")
    opts.mode = IterationMode::Refreshed;
  opts.strict = !g.allow_noncertified;
  opts.progress = [](const IterationState& s) {
    spdlog::debug("iteration {} residual {:.3e} step {:.3e}", s.k, s.residual_norm, s.step_norm);
  };
  const auto result = reconstruct(H, traces, init, config.eta, opts);
  io::write_text(require_out(g), reconstruction_to_json(result));
  if (!log_path.empty()) io::write_text(log_path, trace_to_csv(result.history));
  spdlog::info("{} after {} iterations, residual {:.3e}", result.converged ? "converged" : "stopped",
               result.iterations, result.final_residual);
  return result.converged ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Coefficient reconstruction from internal functionals of diffusion solutions"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--scenario", g.scenario, "Scenario JSON file")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "Output file or directory");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--allow-noncertified", g.allow_noncertified, "Continue when certification fails");

  auto* forward = app.add_subcommand("forward", "Solve the forward problem and write u_j and H_j");
  auto* pipeline = app.add_subcommand("pipeline", "Forward, certify and invert, writing a manifest");

  auto* certify = app.add_subcommand("certify", "Certify ellipticity of the background solutions");
  std::optional<int> xi_samples;
  std::string report_path;
  certify->add_option("--xi-samples", xi_samples, "Covector samples per node")->check(CLI::PositiveNumber);
  certify->add_option("--report", report_path, "Report JSON path (stdout when omitted)");

  auto* linearize = app.add_subcommand("linearize", "Solve the linearized system for (dgamma, dsigma)");
  std::string dh_path, g_path;
  linearize->add_option("--dh", dh_path, "Field list of dH_j")->required()->check(CLI::ExistingFile);
  linearize->add_option("--g", g_path, "Boundary list of known normal derivatives")->check(CLI::ExistingFile);

  auto* constbg = app.add_subcommand("constbg", "Constant-background fourth-order inversion");
  double gamma0 = 1.0, sigma0 = 1.0, eta = 1.0;
  std::string dirs_path, cb_dh_path;
  constbg->add_option("--gamma0", gamma0, "Background diffusion")->required();
  constbg->add_option("--sigma0", sigma0, "Background absorption")->required();
  constbg->add_option("--eta", eta, "Absorption weight in H");
  constbg->add_option("--dirs", dirs_path, "Direction list JSON")->required()->check(CLI::ExistingFile);
  constbg->add_option("--dh", cb_dh_path, "Field list of dH_i")->required()->check(CLI::ExistingFile);

  auto* rec = app.add_subcommand("reconstruct", "Nonlinear fixed-point reconstruction");
  std::string hmeas_path, init_path, mode, log_path;
  rec->add_option("--hmeas", hmeas_path, "Field list of measured H_j")->required()->check(CLI::ExistingFile);
  rec->add_option("--init", init_path, "Initial coefficients JSON")->required()->check(CLI::ExistingFile);
  rec->add_option("--mode", mode, "frozen or refreshed")->check(CLI::IsMember({"frozen", "refreshed"}));
  rec->add_option("--log", log_path, "Iteration trace CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*forward) return cmd_pipeline(g, true);
    if (*pipeline) return cmd_pipeline(g, false);
    if (*certify) return cmd_certify(g, xi_samples, report_path);
    if (*linearize) return cmd_linearize(g, dh_path, g_path);
    if (*constbg) return cmd_constbg(g, gamma0, sigma0, eta, dirs_path, cb_dh_path);
    if (*rec) return cmd_reconstruct(g, hmeas_path, init_path, mode, log_path);
  } catch (const StageError& e) {
    spdlog::error("{}", e.what());
    return kExitFailure;
  } catch (const Error& e) {
    spdlog::error("{}: {}", to_string(e.code()), e.what());
    return e.code() == ErrorCode::InvalidConfig ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}
