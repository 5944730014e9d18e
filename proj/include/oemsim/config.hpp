#pragma once

// JSON parameter files and JSON serialization of results.
//
// A parameter file is a flat object whose keys are SystemParameters field
// names (SI units). Rates may instead be given as `<name>_over_omega_m`.
// An optional "preset" key seeds every field from a named scenario; without
// it every field must be present. Unknown keys are rejected.

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "json.hpp"

#include "oemsim/errors.hpp"
#include "oemsim/gaussian.hpp"
#include "oemsim/model.hpp"
#include "oemsim/sweep.hpp"

namespace oemsim {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr std::string_view kRatioSuffix = "_over_omega_m";

using json = nlohmann::json;

inline SystemParameters parse_parameters(const json& doc) {
  if (!doc.is_object())
    throw ConfigError("parameter file must contain a JSON object");

  SystemParameters p;
  if (auto it = doc.find("preset"); it != doc.end()) {
    if (!it->is_string())
      throw ConfigError("preset: must be a string");
    try {
      p = preset(it->get<std::string>()).base;
    } catch (const SpecError& e) {
      throw ConfigError(std::string("preset: ") + e.what());
    }
  }

  std::set<std::string> seen;
  std::vector<std::pair<const ParameterField*, double>> ratios;
  for (const auto& [key, value] : doc.items()) {
    if (key == "preset")
      continue;
    std::string name = key;
    bool ratio = false;
    if (name.size() > kRatioSuffix.size() && name.ends_with(kRatioSuffix)) {
      name.resize(name.size() - kRatioSuffix.size());
      ratio = true;
    }
    const auto* field = find_field(name);
    if (!field || (ratio && !field->rate))
      throw ConfigError("unknown key '" + key + "'");
    if (!seen.insert(name).second)
      throw ConfigError(name + ": given both as '" + name + "' and '" + name +
                        std::string(kRatioSuffix) + "'");
    if (!value.is_number())
      throw ConfigError(key + ": must be a number");
    const double v = value.get<double>();
    if (ratio)
      ratios.emplace_back(field, v);
    else
      p.*(field->member) = v;
  }
  for (const auto& [field, v] : ratios)
    p.*(field->member) = v * p.omega_m;

  validate(p);
  return p;
}

/// Parses `text`; JSON syntax errors are reported with line and column.
inline SystemParameters parse_parameters_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("JSON parse error at line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + e.what());
  }
  return parse_parameters(doc);
}

inline SystemParameters parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open parameter file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_parameters_text(ss.str());
}

inline json parameters_to_json(const SystemParameters& p) {
  json j = json::object();
  for (const auto& f : parameter_fields)
    j[std::string(f.name)] = p.*(f.member);
  return j;
}

namespace detail {
inline json optional_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}
inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
} // namespace detail

inline json point_record_to_json(const PointRecord& r) {
  json j;
  j["x"] = r.x;
  j["value"] = r.value;
  j["stable"] = r.stable;
  j["max_real_part"] = detail::finite_or_null(r.max_real_part);
  json en = json::object();
  for (const auto& e : pair_table)
    en[std::string(e.key)] = detail::optional_json(r.e_n[static_cast<int>(e.pair)]);
  j["e_n"] = en;
  if (r.baseline_evaluated) {
    json b = json::object();
    b["stable"] = r.baseline_stable;
    for (std::size_t k = 0; k < kBosonicPairs.size(); ++k)
      b[std::string(info(kBosonicPairs[k]).key)] = detail::optional_json(r.baseline_e_n[k]);
    j["baseline"] = b;
  }
  j["heisenberg_ok"] = r.heisenberg_ok ? json(*r.heisenberg_ok) : json(nullptr);
  j["ill_conditioned"] = r.ill_conditioned;
  j["errors"] = r.errors;
  return j;
}

inline json sweep_metadata(const SweepResult& result) {
  const auto& s = result.spec;
  json j;
  j["tool"] = "oemsim";
  j["version"] = std::string(kVersion);
  j["preset"] = s.name;
  j["description"] = s.description;
  j["notes"] = s.notes;
  j["axis"] = {{"parameter", s.axis.parameter},
               {"normalize_by", s.axis.normalize_by},
               {"label", s.axis.label()}};
  j["grid"] = {{"start", s.grid.start}, {"stop", s.grid.stop}, {"count", s.grid.count}};
  json pairs = json::array();
  for (const auto p : s.pairs)
    pairs.push_back(std::string(info(p).tag));
  j["pairs"] = pairs;
  j["baseline"] = s.baseline;
  j["units"] = {{"parameters", "SI (rad/s, m, kg, W, K)"},
                {"max_real_part", "dimensionless (units of omega_m)"}};
  j["parameters"] = parameters_to_json(s.base);
  j["points"] = result.records.size();
  j["stable_points"] = result.stable_count();
  json errors = json::array();
  int ill = 0;
  for (const auto& r : result.records) {
    if (r.ill_conditioned)
      ++ill;
    if (!r.errors.empty())
      errors.push_back({{"x", r.x}, {"errors", r.errors}});
  }
  j["ill_conditioned_points"] = ill;
  j["point_errors"] = errors;
  return j;
}

} // namespace oemsim
