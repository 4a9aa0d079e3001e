#include "output.hpp"

#include <sprt_exact/error.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <utility>
#include <vector>

namespace sprt_exact::cli {
namespace {

using Cells = std::vector<std::pair<std::string, std::string>>;

std::string format_number(const Json& v) {
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  const double x = v.get<double>();
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void flatten(const Json& v, const std::string& key, Cells& out) {
  if (v.is_object()) {
    for (auto it = v.begin(); it != v.end(); ++it) flatten(it.value(), key.empty() ? it.key() : key + "_" + it.key(), out);
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) flatten(v[i], key + "_" + std::to_string(i), out);
  } else if (v.is_null()) {
    out.emplace_back(key, "");
  } else if (v.is_number()) {
    out.emplace_back(key, format_number(v));
  } else if (v.is_boolean()) {
    out.emplace_back(key, v.get<bool>() ? "true" : "false");
  } else {
    out.emplace_back(key, quote(v.get<std::string>()));
  }
}

}  // namespace

std::string to_csv(const Json& doc) {
  std::vector<Cells> rows;
  if (doc.is_array()) {
    for (const auto& r : doc) {
      rows.emplace_back();
      flatten(r, "", rows.back());
    }
  } else {
    rows.emplace_back();
    flatten(doc, "", rows.back());
  }
  if (rows.empty()) return "";
  std::string out;
  for (std::size_t i = 0; i < rows.front().size(); ++i) out += (i ? "," : "") + quote(rows.front()[i].first);
  out += '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i].second;
    out += '\n';
  }
  return out;
}

std::string render(const Json& doc, Format format) {
  return format == Format::Csv ? to_csv(doc) : doc.dump(2) + "\n";
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text << std::flush;
    return;
  }
  const std::filesystem::path final_path(path);
  std::filesystem::path tmp = final_path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    out.close();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error(ErrorKind::InvalidArgument, "output: cannot write '" + path + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, final_path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::InvalidArgument, "output: cannot write '" + path + "'");
  }
}

}  // namespace sprt_exact::cli
