#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "listpolar/dgp.hpp"
#include "listpolar/errors.hpp"

namespace listpolar {

namespace csv {

inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

inline std::string line_prefix(std::size_t line_no) {
  return "line " + std::to_string(line_no) + ": ";
}

inline double parse_double(const std::string& field, std::size_t line_no) {
  if (field.empty()) throw InputError(line_prefix(line_no) + "empty numeric field");
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size()) {
    throw InputError(line_prefix(line_no) + "cannot parse '" + field + "' as a number");
  }
  return v;
}

template <typename Int>
Int parse_int(const std::string& field, std::size_t line_no) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw InputError(line_prefix(line_no) + "cannot parse '" + field + "' as an integer");
  }
  return v;
}

inline int parse_binary(const std::string& field, std::size_t line_no, std::string_view name) {
  const int v = parse_int<int>(field, line_no);
  if (v != 0 && v != 1) {
    throw InputError(line_prefix(line_no) + std::string(name) + " must be 0 or 1, got " + field);
  }
  return v;
}

/// Results-table float format: 9 significant digits.
inline std::string format_g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

/// Rounds to the value that survives a 9-significant-digit CSV round trip.
inline double round_g9(double v) {
  if (!std::isfinite(v)) return v;
  return std::strtod(format_g9(v).c_str(), nullptr);
}

}  // namespace csv

inline constexpr std::string_view kDatasetColumns[] = {"id", "treat", "y", "d",
                                                       "x1", "x2",    "x3", "z_true"};

inline void write_dataset_csv(std::ostream& os, const Dataset& ds) {
  os << "id,treat,y";
  if (ds.has_direct) os << ",d";
  os << ",x1,x2,x3";
  if (ds.has_truth) os << ",z_true";
  os << '\n';
  char buf[64];
  for (const Respondent& r : ds.respondents) {
    os << r.id << ',' << r.treat << ',' << r.y;
    if (ds.has_direct) os << ',' << r.d;
    os << ',' << r.x1;
    std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", r.x2, r.x3);
    os << buf;
    if (ds.has_truth) os << ',' << r.z;
    os << '\n';
  }
}

/// Design facts that an external dataset file cannot carry itself.
struct DesignInfo {
  std::optional<int> j_items;  // inferred from the largest control-arm count when absent
  bool append_zero_item = false;
};

/// Reads a dataset CSV. Columns may appear in any order; `d` and `z_true`
/// are optional, unknown columns are rejected. Errors carry the line number.
inline Dataset read_dataset_csv(std::istream& is, const DesignInfo& design = {}) {
  std::string line;
  if (!std::getline(is, line)) throw InputError("line 1: missing header");
  const auto header = csv::split(csv::strip_cr(line));
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto& name = header[i];
    if (std::find(std::begin(kDatasetColumns), std::end(kDatasetColumns), name) ==
        std::end(kDatasetColumns)) {
      throw InputError("line 1: unknown column '" + name + "'");
    }
    if (!col.emplace(name, i).second) throw InputError("line 1: duplicate column '" + name + "'");
  }
  for (const char* required : {"id", "treat", "y", "x1", "x2", "x3"}) {
    if (!col.contains(required)) {
      throw InputError("line 1: missing required column '" + std::string(required) + "'");
    }
  }

  Dataset ds;
  ds.has_direct = col.contains("d");
  ds.has_truth = col.contains("z_true");
  ds.config.scenario_id = "external";
  std::size_t line_no = 1;
  int n_treat = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = csv::strip_cr(line);
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != header.size()) {
      throw InputError(csv::line_prefix(line_no) + "expected " + std::to_string(header.size()) +
                       " fields, got " + std::to_string(f.size()));
    }
    Respondent r;
    r.id = csv::parse_int<std::size_t>(f[col["id"]], line_no);
    r.treat = csv::parse_binary(f[col["treat"]], line_no, "treat");
    r.y = csv::parse_int<int>(f[col["y"]], line_no);
    if (r.y < 0) throw InputError(csv::line_prefix(line_no) + "y must be non-negative");
    r.x1 = csv::parse_binary(f[col["x1"]], line_no, "x1");
    r.x2 = csv::parse_double(f[col["x2"]], line_no);
    r.x3 = csv::parse_double(f[col["x3"]], line_no);
    if (!std::isfinite(r.x2) || !std::isfinite(r.x3)) {
      throw InputError(csv::line_prefix(line_no) + "covariates must be finite");
    }
    if (ds.has_direct) r.d = csv::parse_binary(f[col["d"]], line_no, "d");
    if (ds.has_truth) r.z = csv::parse_binary(f[col["z_true"]], line_no, "z_true");
    if (design.j_items && r.y > *design.j_items + r.treat) {
      throw InputError(csv::line_prefix(line_no) + "count " + std::to_string(r.y) +
                       " exceeds j_items + treat = " + std::to_string(*design.j_items + r.treat));
    }
    n_treat += r.treat;
    ds.respondents.push_back(r);
  }
  if (ds.respondents.empty()) throw InputError("dataset has no rows");

  int j = 0;
  if (design.j_items) {
    j = *design.j_items;
  } else {
    for (const Respondent& r : ds.respondents) {
      if (r.treat == 0) j = std::max(j, r.y);
    }
    j = std::max(j, 1);
    for (const Respondent& r : ds.respondents) {
      if (r.y > j + r.treat) {
        throw InputError("inferred j_items = " + std::to_string(j) + " but respondent " +
                         std::to_string(r.id) + " reports " + std::to_string(r.y));
      }
    }
  }
  if (j < 1) throw InputError("j_items must be at least 1");
  ds.config.j_items = j;
  ds.config.append_zero_item = design.append_zero_item;
  ds.config.n_total = static_cast<int>(ds.respondents.size());
  ds.config.n_treatment = n_treat;
  return ds;
}

inline Dataset read_dataset_file(const std::string& path, const DesignInfo& design = {}) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset file '" + path + "'");
  return read_dataset_csv(in, design);
}

inline void write_dataset_file(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_dataset_csv(out, ds);
}

/// Share values of the default sweep: 0, 0.05, ..., 0.50.
inline std::vector<double> default_shares() {
  std::vector<double> shares;
  for (int k = 0; k <= 10; ++k) shares.push_back(k / 20.0);
  return shares;
}

/// Expands a JSON scenario document into calibrated scenarios. Keys mirror
/// ScenarioConfig; `group_b_share`, `polarity_mode` and `covariate_mode`
/// may be scalars or arrays, and default to the full sweep when absent.
inline std::vector<ScenarioConfig> parse_scenarios(const nlohmann::json& doc) {
  using nlohmann::json;
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  ScenarioConfig base;
  std::vector<double> shares = default_shares();
  std::vector<PolarityMode> polarities{PolarityMode::OppositePolarity, PolarityMode::NonSensitiveB};
  std::vector<CovariateMode> covariates{CovariateMode::SameEffect, CovariateMode::OppositeEffect};
  std::optional<double> beta0_a;
  std::optional<double> beta0_b;
  std::optional<std::string> scenario_id;

  auto number = [](const json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
    return v.get<double>();
  };
  auto integer = [](const json& v, const std::string& key) {
    if (!v.is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
    return v.get<int>();
  };
  auto strings = [](const json& v, const std::string& key) {
    std::vector<std::string> out;
    if (v.is_string()) {
      out.push_back(v.get<std::string>());
    } else if (v.is_array() && !v.empty()) {
      for (const auto& e : v) {
        if (!e.is_string()) throw ConfigError("'" + key + "' entries must be strings");
        out.push_back(e.get<std::string>());
      }
    } else {
      throw ConfigError("'" + key + "' must be a string or non-empty array of strings");
    }
    return out;
  };

  for (const auto& [key, value] : doc.items()) {
    if (key == "n_total") {
      base.n_total = integer(value, key);
    } else if (key == "n_treatment") {
      base.n_treatment = integer(value, key);
    } else if (key == "j_items") {
      base.j_items = integer(value, key);
    } else if (key == "control_item_prob") {
      base.control_item_prob = number(value, key);
    } else if (key == "target_prevalence") {
      base.target_prevalence = number(value, key);
    } else if (key == "beta2_a") {
      base.beta2_a = number(value, key);
    } else if (key == "beta0_a") {
      beta0_a = number(value, key);
    } else if (key == "beta0_b") {
      beta0_b = number(value, key);
    } else if (key == "alpha0") {
      base.alpha0 = number(value, key);
    } else if (key == "alpha3") {
      base.alpha3 = number(value, key);
    } else if (key == "append_zero_item") {
      if (!value.is_boolean()) throw ConfigError("'append_zero_item' must be a boolean");
      base.append_zero_item = value.get<bool>();
    } else if (key == "scenario_id") {
      if (!value.is_string()) throw ConfigError("'scenario_id' must be a string");
      scenario_id = value.get<std::string>();
    } else if (key == "group_b_share") {
      shares.clear();
      if (value.is_array()) {
        if (value.empty()) throw ConfigError("'group_b_share' array must be non-empty");
        for (const auto& e : value) shares.push_back(number(e, key));
      } else {
        shares.push_back(number(value, key));
      }
    } else if (key == "polarity_mode") {
      polarities.clear();
      for (const auto& s : strings(value, key)) polarities.push_back(parse_polarity_mode(s));
    } else if (key == "covariate_mode") {
      covariates.clear();
      for (const auto& s : strings(value, key)) covariates.push_back(parse_covariate_mode(s));
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }

  std::vector<ScenarioConfig> out;
  for (PolarityMode p : polarities) {
    for (CovariateMode c : covariates) {
      for (double share : shares) {
        ScenarioConfig cfg = base;
        cfg.polarity_mode = p;
        cfg.covariate_mode = c;
        cfg.group_b_share = share;
        cfg.scenario_id = make_scenario_id(p, c, share);
        if (!(share >= 0.0 && share <= 0.5)) throw ConfigError("group_b_share must lie in [0, 0.5]");
        try {
          calibrate(cfg);
        } catch (const CalibrationError& e) {
          throw ConfigError(e.what());
        }
        if (beta0_a) cfg.beta0_a = *beta0_a;
        if (beta0_b) cfg.beta0_b = *beta0_b;
        validate(cfg);
        out.push_back(std::move(cfg));
      }
    }
  }
  if (scenario_id) {
    if (out.size() != 1) throw ConfigError("'scenario_id' requires a single-scenario config");
    out.front().scenario_id = *scenario_id;
  }
  return out;
}

inline std::vector<ScenarioConfig> read_scenarios_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_scenarios(doc);
}

}  // namespace listpolar
