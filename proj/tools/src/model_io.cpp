#include "model_io.hpp"

#include <sprt_exact/error.hpp>

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace sprt_exact::cli {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::InvalidArgument, "model field '" + field + "': " + what);
}

double number_at(const json& j, const std::string& field) {
  if (!j.is_number()) bad(field, "expected a number");
  return j.get<double>();
}

}  // namespace

PhaseTypeDist parse_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("model document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) bad("<root>", "expected an object");

  if (doc.contains("erlang")) {
    const json& e = doc["erlang"];
    if (!e.is_object()) bad("erlang", "expected an object with n and lambda");
    if (!e.contains("n") || !e["n"].is_number_integer()) bad("erlang.n", "expected an integer");
    if (!e.contains("lambda")) bad("erlang.lambda", "missing");
    return erlang(e["n"].get<int>(), number_at(e["lambda"], "erlang.lambda"));
  }

  if (!doc.contains("nu")) bad("nu", "missing");
  if (!doc.contains("T")) bad("T", "missing");
  const json& nu = doc["nu"];
  const json& T = doc["T"];
  if (!nu.is_array() || nu.empty()) bad("nu", "expected a non-empty array");
  if (!T.is_array() || T.size() != nu.size()) bad("T", "expected " + std::to_string(nu.size()) + " rows");

  const auto n = static_cast<Eigen::Index>(nu.size());
  RowVector v(n);
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    v(i) = number_at(nu[ui], "nu[" + std::to_string(i) + "]");
    const json& row = T[ui];
    if (!row.is_array() || row.size() != nu.size()) {
      bad("T[" + std::to_string(i) + "]", "expected " + std::to_string(nu.size()) + " entries");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = number_at(row[static_cast<std::size_t>(j)], "T[" + std::to_string(i) + "][" + std::to_string(j) + "]");
    }
  }
  return PhaseTypeDist::validate(std::move(v), std::move(m));
}

PhaseTypeDist load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "model: cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

PhaseTypeDist parse_erlang_flag(const std::string& value) {
  const auto comma = value.find(',');
  if (comma == std::string::npos) throw Error(ErrorKind::InvalidArgument, "--erlang: expected n,lambda");
  int n = 0;
  double lambda = 0.0;
  try {
    std::size_t used = 0;
    const std::string head = value.substr(0, comma);
    n = std::stoi(head, &used);
    if (used != head.size()) throw std::invalid_argument(head);
    const std::string tail = value.substr(comma + 1);
    lambda = std::stod(tail, &used);
    if (used != tail.size()) throw std::invalid_argument(tail);
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::InvalidArgument, "--erlang: expected n,lambda, got '" + value + "'");
  }
  return erlang(n, lambda);
}

}  // namespace sprt_exact::cli
