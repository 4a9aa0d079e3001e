#pragma once

#include <json.hpp>

#include <string>

namespace sprt_exact::cli {

using Json = nlohmann::ordered_json;

enum class Format { Json, Csv };

/// Flat CSV rendering. An object becomes one row, an array of objects one row
/// per element; nested arrays and objects are flattened into key_i_j columns.
/// Numbers use 17 significant digits, null becomes an empty cell.
std::string to_csv(const Json& doc);

std::string render(const Json& doc, Format format);

/// Writes to `path` through a temporary sibling so that a failed run never
/// leaves a partial file behind. An empty path means stdout.
void emit(const std::string& text, const std::string& path);

}  // namespace sprt_exact::cli
