#include "umot/io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "umot/error.hpp"

namespace umot::io {
namespace {

using nlohmann::json;

json grid_json(const Grid& g) {
  return json{{"nx", g.nx()}, {"ny", g.ny()}, {"hx", g.hx()}, {"hy", g.hy()}, {"x0", g.x0()}, {"y0", g.y0()}};
}

Grid grid_from(const json& j) {
  for (const char* key : {"nx", "ny", "hx", "hy", "x0", "y0"})
    require(j.contains(key), ErrorCode::InvalidConfig, std::string("field file is missing '") + key + "'");
  return Grid(j.at("nx").get<int>(), j.at("ny").get<int>(), j.at("hx").get<double>(), j.at("hy").get<double>(),
              j.at("x0").get<double>(), j.at("y0").get<double>());
}

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidConfig, std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::string field_to_json(const ScalarField& f) {
  json j = grid_json(f.grid());
  j["values"] = std::vector<double>(f.values().begin(), f.values().end());
  return j.dump();
}

ScalarField field_from_json(std::string_view text) {
  const json j = parse(text);
  require(j.is_object() && j.contains("values"), ErrorCode::InvalidConfig, "field file needs 'values'");
  return ScalarField(grid_from(j), j.at("values").get<std::vector<double>>());
}

std::string boundary_to_json(const BoundaryData& b) {
  json j = grid_json(b.grid());
  j["values"] = std::vector<double>(b.values().begin(), b.values().end());
  if (b.normal_values()) j["normal_values"] = *b.normal_values();
  return j.dump();
}

BoundaryData boundary_from_json(std::string_view text) {
  const json j = parse(text);
  require(j.is_object() && j.contains("values"), ErrorCode::InvalidConfig, "boundary file needs 'values'");
  std::optional<std::vector<double>> normal;
  if (j.contains("normal_values")) normal = j.at("normal_values").get<std::vector<double>>();
  return BoundaryData(grid_from(j), j.at("values").get<std::vector<double>>(), std::move(normal));
}

std::string field_to_csv(const ScalarField& f) {
  const Grid& g = f.grid();
  std::ostringstream out;
  out.precision(17);
  out << "x,y,value\n";
  for (std::size_t node = 0; node < g.size(); ++node) {
    const auto [x, y] = g.coord(node);
    out << x << ',' << y << ',' << f[node] << '\n';
  }
  return out.str();
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

}  // namespace umot::io
