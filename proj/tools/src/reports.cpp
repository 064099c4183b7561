#include "umot/cli/reports.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "umot/error.hpp"
#include "umot/io.hpp"

namespace umot::cli {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

json parse(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidConfig, std::string(what) + ": malformed JSON: " + e.what());
  }
}

ordered_json field_json(const ScalarField& f) { return ordered_json::parse(io::field_to_json(f)); }

ScalarField field_from(const json& j) { return io::field_from_json(j.dump()); }

// NaN and infinities have no JSON spelling.
ordered_json number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

}  // namespace

std::string fields_to_json(const std::vector<ScalarField>& fields) {
  ordered_json root{{"fields", ordered_json::array()}};
  for (const auto& f : fields) root["fields"].push_back(field_json(f));
  return root.dump();
}

std::vector<ScalarField> fields_from_json(std::string_view text) {
  const json root = parse(text, "field list");
  require(root.is_object() && root.contains("fields") && root.at("fields").is_array(), ErrorCode::InvalidConfig,
          "field list must be an object with a 'fields' array");
  std::vector<ScalarField> out;
  for (const auto& f : root.at("fields")) out.push_back(field_from(f));
  require(!out.empty(), ErrorCode::InvalidConfig, "field list is empty");
  for (const auto& f : out) require_same_grid(f.grid(), out.front().grid(), "field list");
  return out;
}

std::vector<BoundaryData> boundaries_from_json(std::string_view text) {
  const json root = parse(text, "boundary list");
  require(root.is_object() && root.contains("boundaries") && root.at("boundaries").is_array(),
          ErrorCode::InvalidConfig, "boundary list must be an object with a 'boundaries' array");
  std::vector<BoundaryData> out;
  for (const auto& b : root.at("boundaries")) out.push_back(io::boundary_from_json(b.dump()));
  return out;
}

std::string boundaries_to_json(const std::vector<BoundaryData>& b) {
  ordered_json root{{"boundaries", ordered_json::array()}};
  for (const auto& d : b) root["boundaries"].push_back(ordered_json::parse(io::boundary_to_json(d)));
  return root.dump();
}

std::string coefficients_to_json(const CoefficientPair& c) {
  return ordered_json{{"gamma", field_json(c.gamma())}, {"sigma", field_json(c.sigma())}}.dump();
}

CoefficientPair coefficients_from_json(std::string_view text, double gamma_min) {
  const json root = parse(text, "coefficient file");
  require(root.is_object() && root.contains("gamma") && root.contains("sigma"), ErrorCode::InvalidConfig,
          "coefficient file needs 'gamma' and 'sigma' fields");
  return CoefficientPair(field_from(root.at("gamma")), field_from(root.at("sigma")), gamma_min);
}

DirectionSet directions_from_json(std::string_view text) {
  const json root = parse(text, "direction file");
  const json& list = root.is_object() ? root.value("vectors", json::array()) : root;
  require(list.is_array() && !list.empty(), ErrorCode::InvalidConfig, "direction file needs a list of vectors");
  std::vector<std::vector<double>> vectors;
  try {
    for (const auto& v : list) vectors.push_back(v.get<std::vector<double>>());
  } catch (const json::exception&) {
    fail(ErrorCode::InvalidConfig, "direction vectors must be arrays of numbers");
  }
  const int dim = root.is_object() && root.contains("dim") ? root.at("dim").get<int>()
                                                           : static_cast<int>(vectors.front().size());
  return DirectionSet(dim, std::move(vectors));
}

std::string report_to_json(const EllipticityReport& r) {
  ordered_json root{{"global_margin", number(r.global_margin)},
                    {"margin_threshold", r.margin_threshold},
                    {"elliptic", r.elliptic},
                    {"certified", r.certified},
                    {"xi_samples", r.xi_samples},
                    {"masked_nodes", r.masked_nodes},
                    {"masked_fraction", r.masked_fraction}};
  if (r.witness) {
    ordered_json w;
    if (r.witness->node && r.margin_field) {
      const Grid& g = r.margin_field->grid();
      const auto node = *r.witness->node;
      const auto [x, y] = g.coord(node);
      w["node"] = node;
      w["i"] = g.i_of(node);
      w["j"] = g.j_of(node);
      w["x"] = x;
      w["y"] = y;
    } else {
      w["node"] = nullptr;
    }
    w["xi"] = r.witness->xi;
    root["witness"] = w;
  } else {
    root["witness"] = nullptr;
  }
  if (r.margin_field) root["margin_field"] = field_json(*r.margin_field);
  return root.dump();
}

std::string perturbation_to_json(const NormalSolveResult& result, double residual) {
  ordered_json root{{"dgamma", field_json(result.v.dgamma)}, {"dsigma", field_json(result.v.dsigma)}};
  root["du"] = ordered_json::array();
  for (const auto& du : result.v.du) root["du"].push_back(field_json(du));
  root["residual"] = number(residual);
  root["normal_residual"] = number(result.normal_residual);
  root["iterations"] = result.iterations;
  root["probe"] = result.probe ? number(*result.probe) : ordered_json(nullptr);
  return root.dump();
}

std::string constbg_to_json(const ConstBgSolution& s) {
  return ordered_json{{"dgamma", field_json(s.dgamma)},
                      {"dsigma", field_json(s.dsigma)},
                      {"residual", number(s.residual)}}
      .dump();
}

std::string reconstruction_to_json(const ReconstructionResult& r) {
  ordered_json root{{"gamma", field_json(r.coeffs.gamma())},
                    {"sigma", field_json(r.coeffs.sigma())},
                    {"converged", r.converged},
                    {"iterations", r.iterations},
                    {"final_residual", number(r.final_residual)},
                    {"certified", r.certified}};
  root["history"] = ordered_json::array();
  for (const auto& h : r.history)
    root["history"].push_back(ordered_json{{"k", h.k},
                                           {"residual", number(h.residual_norm)},
                                           {"step", number(h.step_norm)},
                                           {"damping", h.damping}});
  try {
    root["contraction_estimate"] = number(contraction_estimate(r.history));
  } catch (const Error&) {
    root["contraction_estimate"] = nullptr;
  }
  if (r.error_vs_truth)
    root["error_vs_truth"] =
        ordered_json{{"dgamma", number(r.error_vs_truth->dgamma)}, {"dsigma", number(r.error_vs_truth->dsigma)}};
  else
    root["error_vs_truth"] = nullptr;
  return root.dump();
}

std::string trace_to_csv(const std::vector<IterationRecord>& history) {
  std::ostringstream out;
  out.precision(17);
  out << "k,residual,step,damping\n";
  for (const auto& h : history)
    out << h.k << ',' << h.residual_norm << ',' << h.step_norm << ',' << h.damping << '\n';
  return out.str();
}

}  // namespace umot::cli
