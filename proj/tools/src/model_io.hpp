#pragma once

#include <sprt_exact/phasetype.hpp>

#include <string>

namespace sprt_exact::cli {

/// Parses {"nu": [...], "T": [[...], ...]} or {"erlang": {"n": k, "lambda": l}}.
/// Malformed documents raise Error(InvalidArgument) naming the offending field.
PhaseTypeDist parse_model(const std::string& text);

PhaseTypeDist load_model_file(const std::string& path);

/// "n,lambda" as given to --erlang.
PhaseTypeDist parse_erlang_flag(const std::string& value);

}  // namespace sprt_exact::cli
