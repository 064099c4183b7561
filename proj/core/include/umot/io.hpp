#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "umot/field.hpp"

namespace umot::io {

/// Field file format: {"nx","ny","hx","hy","x0","y0","values":[row-major]}.
std::string field_to_json(const ScalarField& f);
ScalarField field_from_json(std::string_view text);

/// Boundary file format: the grid keys plus "values" (counterclockwise from
/// (x0, y0)) and optionally "normal_values".
std::string boundary_to_json(const BoundaryData& b);
BoundaryData boundary_from_json(std::string_view text);

/// CSV with header `x,y,value`, one row per node in row-major order.
std::string field_to_csv(const ScalarField& f);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace umot::io
