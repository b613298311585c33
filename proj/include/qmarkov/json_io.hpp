#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qmarkov/density.hpp"
#include "qmarkov/scenarios.hpp"

namespace qmarkov {

namespace detail {

// %.17g guarantees the decimal form reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

inline void write_matrix_part(std::ostream& os, const ComplexMatrix& m, bool imag) {
  os << "[";
  for (Index i = 0; i < m.rows(); ++i) {
    if (i) os << ",";
    os << "[";
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) os << ",";
      os << format_double(imag ? m(i, j).imag() : m(i, j).real());
    }
    os << "]";
  }
  os << "]";
}

}  // namespace detail

// {"im": [[...]], "layout": [{"dim": d, "label": "A"}, ...], "re": [[...]]}
// with keys sorted and row-major matrices at full double precision.
inline std::string state_to_json(const DensityMatrix& rho) {
  std::ostringstream os;
  os << "{\"im\":";
  detail::write_matrix_part(os, rho.mat, true);
  os << ",\"layout\":[";
  for (std::size_t i = 0; i < rho.layout.size(); ++i) {
    if (i) os << ",";
    os << "{\"dim\":" << rho.layout[i].dim << ",\"label\":\""
       << detail::json_escape(rho.layout[i].label) << "\"}";
  }
  os << "],\"re\":";
  detail::write_matrix_part(os, rho.mat, false);
  os << "}";
  return os.str();
}

inline void write_state(const std::string& path, const DensityMatrix& rho) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot open '" + path + "' for writing");
  out << state_to_json(rho) << "\n";
  if (!out) throw Error(Errc::IoError, "write to '" + path + "' failed");
}

inline DensityMatrix state_from_json(const std::string& text, const std::string& origin,
                                     const DensityTolerances& tols = {}) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::ParseError, origin + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("layout") || !j.contains("re") || !j.contains("im"))
    throw Error(Errc::ParseError, origin + ": expected object with layout/re/im fields");

  std::vector<SpaceLayout::Factor> factors;
  for (const auto& f : j.at("layout")) {
    if (!f.is_object() || !f.contains("label") || !f.contains("dim"))
      throw Error(Errc::ParseError, origin + ": layout entries need label and dim");
    if (!f.at("label").is_string() || !f.at("dim").is_number_unsigned())
      throw Error(Errc::ParseError, origin + ": layout label must be a string, dim a count");
    factors.push_back({f.at("label").get<std::string>(), f.at("dim").get<std::size_t>()});
  }
  SpaceLayout layout(std::move(factors));
  const std::size_t d = layout.total_dim();

  auto read_part = [&](const char* key) {
    const auto& rows = j.at(key);
    if (!rows.is_array() || rows.size() != d)
      throw Error(Errc::ParseError,
                  origin + ": field '" + key + "' must be a " + std::to_string(d) + "-row array");
    ComplexMatrix part(d, d);
    for (std::size_t i = 0; i < d; ++i) {
      const auto& row = rows.at(i);
      if (!row.is_array() || row.size() != d)
        throw Error(Errc::ParseError, origin + ": row " + std::to_string(i) + " of '" + key +
                                          "' must have " + std::to_string(d) + " entries");
      for (std::size_t k = 0; k < d; ++k) {
        if (!row.at(k).is_number())
          throw Error(Errc::ParseError, origin + ": non-numeric entry at (" +
                                            std::to_string(i) + "," + std::to_string(k) + ")");
        part(static_cast<Index>(i), static_cast<Index>(k)) = row.at(k).get<double>();
      }
    }
    return part;
  };
  const ComplexMatrix re = read_part("re");
  const ComplexMatrix im = read_part("im");
  return validate_density(re + cplx(0, 1) * im, layout, tols);
}

inline DensityMatrix read_state(const std::string& path, const DensityTolerances& tols = {}) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return state_from_json(buf.str(), path, tols);
}

// {"inputs": {...}, "name": "...", "quantities": {...}, "seed": n,
//  "verdicts": {...}} — keys sorted, floats with 17 significant digits.
inline std::string report_to_json(const ScenarioReport& rep) {
  std::ostringstream os;
  os << "{\"inputs\":{";
  bool first = true;
  for (const auto& [k, v] : rep.inputs) {
    if (!first) os << ",";
    first = false;
    os << "\"" << detail::json_escape(k) << "\":\"" << detail::json_escape(v) << "\"";
  }
  os << "},\"name\":\"" << detail::json_escape(rep.name) << "\",\"quantities\":{";
  first = true;
  for (const auto& [k, v] : rep.quantities) {
    if (!first) os << ",";
    first = false;
    os << "\"" << detail::json_escape(k) << "\":" << detail::format_double(v);
  }
  os << "},\"seed\":" << rep.seed << ",\"verdicts\":{";
  first = true;
  for (const auto& [k, v] : rep.verdicts) {
    if (!first) os << ",";
    first = false;
    os << "\"" << detail::json_escape(k) << "\":" << (v ? "true" : "false");
  }
  os << "}}";
  return os.str();
}

inline void write_report(const std::string& path, const ScenarioReport& rep) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot open '" + path + "' for writing");
  out << report_to_json(rep) << "\n";
  if (!out) throw Error(Errc::IoError, "write to '" + path + "' failed");
}

}  // namespace qmarkov
