#pragma once

// JSON and CSV exchange formats. Reports are written by a small serializer
// of our own so that key order and float formatting never depend on the
// JSON library's defaults.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsfact/error.hpp"
#include "tsfact/grid.hpp"
#include "tsfact/hilbert.hpp"
#include "tsfact/ladder.hpp"

namespace tsfact {

using Json = nlohmann::ordered_json;

inline std::string format_double(double v) {
  if (std::isnan(v)) return "null";
  if (std::isinf(v)) return v > 0 ? "1e999" : "-1e999";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  // keep integral values recognizably floating-point
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

namespace detail {

inline void write_json(std::ostream& os, const Json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string pad_close(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
  case Json::value_t::object: {
    if (j.empty()) {
      os << "{}";
      return;
    }
    os << '{' << nl;
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) os << ',' << nl;
      first = false;
      os << pad << Json(it.key()).dump() << (indent > 0 ? ": " : ":");
      write_json(os, it.value(), indent, depth + 1);
    }
    os << nl << pad_close << '}';
    return;
  }
  case Json::value_t::array: {
    if (j.empty()) {
      os << "[]";
      return;
    }
    // arrays of scalars stay on one line
    bool flat = true;
    for (const auto& e : j) flat = flat && !e.is_structured();
    os << '[';
    bool first = true;
    for (const auto& e : j) {
      if (!first) os << (flat ? ", " : ",");
      if (!flat) os << nl << pad;
      first = false;
      write_json(os, e, indent, depth + 1);
    }
    if (!flat) os << nl << pad_close;
    os << ']';
    return;
  }
  case Json::value_t::number_float: os << format_double(j.get<double>()); return;
  default: os << j.dump(); return;
  }
}

} // namespace detail

/// Deterministic JSON text: insertion key order, floats as %.17g.
inline std::string dump_json(const Json& j, int indent = 2) {
  std::ostringstream os;
  detail::write_json(os, j, indent, 0);
  os << '\n';
  return os.str();
}

inline Json grid_to_json(const TimeScaleGrid& grid) {
  Json j;
  j["kind"] = to_string(grid.kind());
  j["size"] = grid.size();
  j["min_is_true_min"] = grid.min_is_true_min();
  j["max_is_true_max"] = grid.max_is_true_max();
  j["points"] = grid.points();
  return j;
}

inline Json real_values_to_json(const RealFunction& f) { return Json(f); }

/// Real part when the function is real, [re, im] pairs otherwise.
inline Json grid_function_to_json(const GridFunction& f) {
  bool real = true;
  for (const auto& z : f) real = real && z.imag() == 0.0;
  Json arr = Json::array();
  for (const auto& z : f) {
    if (real) arr.push_back(z.real());
    else arr.push_back(Json::array({z.real(), z.imag()}));
  }
  return arr;
}

inline Json solution_to_json(const LadderSolution& s) {
  Json j;
  j["level"] = s.level;
  j["eigenvalue"] = s.eigenvalue;
  j["provenance"] = s.provenance;
  j["values"] = grid_function_to_json(s.values);
  return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw Error("failed writing '" + path + "'");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

/// Spectrum CSV: eigenvalue, eigen residual, H_k norm of the eigenvector.
inline std::string spectrum_csv(const FactorChain& chain, std::size_t k,
                                const std::vector<EigenPair>& pairs) {
  std::ostringstream os;
  os << "eigenvalue,residual,norm\n";
  for (const auto& p : pairs) {
    LadderSolution s{static_cast<int>(k), p.vector, p.eigenvalue, "", false};
    os << format_double(p.eigenvalue) << ',' << format_double(eigen_residual(chain, s)) << ','
       << format_double(norm(p.vector, chain.space(k))) << '\n';
  }
  return os.str();
}

} // namespace tsfact
