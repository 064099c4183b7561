#include "umot/cli/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <optional>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "umot/cli/phantom.hpp"
#include "umot/cli/reports.hpp"
#include "umot/constant_bg.hpp"
#include "umot/error.hpp"
#include "umot/io.hpp"
#include "umot/linearized.hpp"
#include "umot/nonlinear.hpp"

namespace umot::cli {
namespace {

using nlohmann::ordered_json;

std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

void write_field(RunManifest& m, const std::filesystem::path& dir, const std::string& stem, const ScalarField& f) {
  write_output(m, dir, stem + ".json", io::field_to_json(f));
  write_output(m, dir, stem + ".csv", io::field_to_csv(f));
}

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return hex64(h);
}

StageError::StageError(std::string stage, const std::string& message)
    : std::runtime_error("stage '" + stage + "' failed: " + message), stage_(std::move(stage)) {}

std::string timestamp_now() {
  std::time_t t = 0;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    char* end = nullptr;
    const long long v = std::strtoll(epoch, &end, 10);
    t = (end && *end == '\0') ? static_cast<std::time_t>(v) : std::time(nullptr);
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_output(RunManifest& m, const std::filesystem::path& out_dir, const std::string& name,
                  const std::string& content) {
  io::write_text(out_dir / name, content);
  m.outputs.push_back({name, content.size(), fnv1a_hex(content)});
}

std::string manifest_to_json(const RunManifest& m) {
  ordered_json root{{"config_hash", m.config_hash}, {"artifact_version", m.artifact_version},
                    {"started", m.started},         {"finished", m.finished},
                    {"status", m.status}};
  root["failed_stage"] = m.failed_stage.empty() ? ordered_json(nullptr) : ordered_json(m.failed_stage);
  root["message"] = m.message.empty() ? ordered_json(nullptr) : ordered_json(m.message);
  root["outputs"] = ordered_json::array();
  for (const auto& o : m.outputs)
    root["outputs"].push_back(ordered_json{{"path", o.path}, {"bytes", o.bytes}, {"digest", o.digest}});
  return root.dump(2) + "\n";
}

RunManifest run_pipeline(const ScenarioConfig& config, const std::filesystem::path& out_dir,
                         const PipelineOptions& options) {
  std::filesystem::create_directories(out_dir);
  RunManifest manifest;
  manifest.started = timestamp_now();
  const std::string canonical = serialize_scenario(config);
  manifest.config_hash = fnv1a_hex(canonical);

  auto finish = [&](const std::string& status) {
    manifest.status = status;
    manifest.finished = timestamp_now();
    io::write_text(out_dir / "manifest.json", manifest_to_json(manifest));
  };
  // Runs one stage; on failure records it in the manifest (keeping earlier outputs) and rethrows.
  auto stage = [&](const std::string& name, const std::function<void()>& body) {
    spdlog::info("stage {} started", name);
    try {
      body();
    } catch (const std::exception& e) {
      manifest.failed_stage = name;
      manifest.message = e.what();
      finish("failed");
      spdlog::error("stage {} failed: {}", name, e.what());
      throw StageError(name, e.what());
    }
    spdlog::info("stage {} finished", name);
  };

  const int threads = options.threads;
  std::optional<CoefficientPair> background;
  std::optional<CoefficientPair> truth;
  std::optional<Perturbation> phantom;
  std::vector<BoundaryData> traces;
  std::vector<ScalarField> h_meas;
  ordered_json summary;

  stage("setup", [&] {
    write_output(manifest, out_dir, "scenario.json", canonical);
    background = background_coefficients(config);
    phantom = generate_phantom(background->grid(), config.phantom);
    truth = apply_phantom(*background, *phantom);
    traces = scenario_boundary_set(config, *background);
    write_output(manifest, out_dir, "background.json", coefficients_to_json(*background));
    write_output(manifest, out_dir, "traces.json", boundaries_to_json(traces));
    write_field(manifest, out_dir, "truth_gamma", truth->gamma());
    write_field(manifest, out_dir, "truth_sigma", truth->sigma());
  });

  stage("forward", [&] {
    const SolutionBundle bundle = build_bundle(*truth, config.eta, traces, forward_options(config, threads));
    h_meas = config.noise.level > 0.0 ? add_noise(bundle.H(), config.noise.level, *config.noise.seed) : bundle.H();
    for (std::size_t j = 0; j < bundle.size(); ++j) {
      const std::string idx = std::to_string(j + 1);
      write_field(manifest, out_dir, "u_" + idx, bundle.solutions()[j].u);
      write_field(manifest, out_dir, "H_" + idx, h_meas[j]);
    }
    write_output(manifest, out_dir, "H.json", fields_to_json(h_meas));
  });

  if (options.forward_only) {
    finish("ok");
    return manifest;
  }

  std::optional<SolutionBundle> bundle0;
  stage("certify", [&] {
    bundle0 = build_bundle(*background, config.eta, traces, forward_options(config, threads));
    const EllipticityReport field_report = certify_field(*bundle0, certify_options(config, threads));
    ordered_json cert{{"field", ordered_json::parse(report_to_json(field_report))}};
    bool ok = field_report.certified;
    std::string why = field_report.certified ? "" : "background solutions are not certified elliptic";
    if (config.boundary.kind == BoundarySpec::Kind::ConstantBg) {
      const auto dir_report = certify_directions(DirectionSet::planar(config.boundary.dirs));
      cert["directions"] = ordered_json::parse(report_to_json(dir_report));
      if (!dir_report.certified) {
        ok = false;
        why = "direction set is not certified elliptic";
      }
    }
    cert["certified"] = ok;
    write_output(manifest, out_dir, "certification.json", cert.dump());
    summary["certified"] = ok;
    if (!ok) {
      if (!options.allow_noncertified) fail(ErrorCode::NotElliptic, "certification failed: " + why);
      spdlog::warn("certification failed ({}); continuing because non-certified runs are allowed", why);
    }
  });

  stage("invert", [&] {
    const Grid& grid = background->grid();
    std::optional<CoefficientPair> estimate;
    if (config.inversion == Inversion::Nonlinear) {
      auto opts = reconstruct_options(config, threads);
      opts.strict = !options.allow_noncertified;
      opts.truth = *truth;
      opts.progress = [](const IterationState& s) {
        spdlog::debug("iteration {} residual {:.3e} step {:.3e}", s.k, s.residual_norm, s.step_norm);
      };
      const ReconstructionResult r = reconstruct(h_meas, traces, *background, config.eta, opts);
      write_output(manifest, out_dir, "reconstruction.json", reconstruction_to_json(r));
      write_output(manifest, out_dir, "trace.csv", trace_to_csv(r.history));
      summary["converged"] = r.converged;
      summary["iterations"] = r.iterations;
      estimate = r.coeffs;
    } else {
      std::vector<ScalarField> dH;
      for (std::size_t j = 0; j < h_meas.size(); ++j) dH.push_back(h_meas[j] - bundle0->H()[j]);
      ScalarField dgamma(grid), dsigma(grid);
      if (config.inversion == Inversion::Linearized) {
        AssembleOptions ao;
        ao.allow_deficient = options.allow_noncertified;
        ao.threads = threads;
        const auto problem = assemble_system(*bundle0, dH, ao);
        NormalSolveOptions no;
        no.check_rank = !options.allow_noncertified;
        const auto res = solve_normal_equations(problem.system, problem.rhs, no);
        const Eigen::VectorXd r = problem.system.A().apply(problem.system.pack(res.v)) - problem.rhs;
        const double rel = problem.rhs.norm() > 0.0 ? r.norm() / problem.rhs.norm() : r.norm();
        write_output(manifest, out_dir, "linearized.json", perturbation_to_json(res, rel));
        dgamma = res.v.dgamma;
        dsigma = res.v.dsigma;
      } else {
        require(config.background.kind == BackgroundSpec::Kind::Constant &&
                    config.boundary.kind == BoundarySpec::Kind::ConstantBg,
                ErrorCode::InvalidConfig, "constbg inversion needs a constant background and constant_bg boundary");
        const ConstantBackground bg(config.background.gamma, config.background.sigma, config.eta,
                                    DirectionSet::planar(config.boundary.dirs));
        const auto u = bg.solutions(grid);
        std::vector<ScalarField> S;
        for (std::size_t j = 0; j < dH.size(); ++j) S.push_back(preprocess_data(dH[j], u[j], bg));
        const ConstBgSolution sol = solve_constant_bg(bg, S);
        write_output(manifest, out_dir, "constbg.json", constbg_to_json(sol));
        dgamma = sol.dgamma;
        dsigma = sol.dsigma;
      }
      estimate = CoefficientPair(background->gamma() + dgamma,
                                 (background->sigma() + dsigma).map([](double s) { return s < 0.0 ? 0.0 : s; }),
                                 background->gamma_min());
    }
    write_field(manifest, out_dir, "gamma", estimate->gamma());
    write_field(manifest, out_dir, "sigma", estimate->sigma());
    const ScalarField eg = estimate->gamma() - background->gamma();
    const ScalarField es = estimate->sigma() - background->sigma();
    summary["error_dgamma"] = relative_l2_error(eg, phantom->dgamma);
    summary["error_dsigma"] = relative_l2_error(es, phantom->dsigma);
    write_output(manifest, out_dir, "summary.json", summary.dump(2) + "\n");
  });

  finish("ok");
  return manifest;
}

}  // namespace umot::cli
