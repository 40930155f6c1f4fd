#pragma once

// Run configuration: sectioned key = value text (INI) or a JSON object of
// sections. Both are flattened into section -> key -> string and checked
// against a fixed schema so typos fail loudly.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qtransfer/error.hpp"

namespace qtransfer::app {

using ConfigMap = std::map<std::string, std::map<std::string, std::string>>;

inline const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema = {
      {"run", {"scenario", "seed", "threads"}},
      {"field", {"dimension", "mass"}},
      {"detector_A", {"coupling", "gap", "x", "y", "z", "switching_center", "switching_width", "smearing_width"}},
      {"detector_B", {"coupling", "gap", "x", "y", "z", "switching_center", "switching_width", "smearing_width"}},
      {"input", {"p", "amplitudes", "amplitudes_im"}},
      {"teleport", {"strategy", "phi", "exact_channel"}},
      {"coefficients", {"L_AA", "L_BB", "L_AB_re", "L_AB_im", "M_re", "M_im"}},
      {"sweep", {"parameter", "start", "stop", "steps"}},
      {"quadrature", {"rel_tol", "abs_tol", "k_max_multiplier", "time_window_multiplier", "max_intervals"}},
      {"output", {"dir", "csv", "jsonl"}},
      {"nogo",
       {"model", "count", "field_dim", "p", "lambdas", "lambda_A", "lambda_B", "couple_A", "couple_B", "qudit",
        "max_field_dim"}},
  };
  return schema;
}

inline std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline void check_schema(const ConfigMap& cfg) {
  const auto& schema = config_schema();
  for (const auto& [section, keys] : cfg) {
    const auto it = schema.find(section);
    if (it == schema.end()) throw ConfigError("unknown config section [" + section + "]");
    for (const auto& kv : keys)
      if (!it->second.count(kv.first))
        throw ConfigError("unknown key '" + kv.first + "' in section [" + section + "]");
  }
}

inline ConfigMap parse_ini(std::istream& in, const std::string& origin = "<config>") {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  ConfigMap cfg;
  for (const auto& [section, node] : tree) {
    if (node.empty()) throw ConfigError(origin + ": key '" + section + "' outside any section");
    for (const auto& [key, value] : node) cfg[section][key] = trim(value.get_value<std::string>());
  }
  check_schema(cfg);
  return cfg;
}

inline ConfigMap parse_json(std::istream& in, const std::string& origin = "<config>") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(origin + ": top level must be an object of sections");
  ConfigMap cfg;
  auto scalar = [&](const nlohmann::json& v, const std::string& where) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) {
      char buf[64];
      const auto r = std::to_chars(buf, buf + sizeof buf, v.get<double>());
      return std::string(buf, r.ptr);
    }
    throw ConfigError(origin + ": " + where + " must be a scalar or a list of scalars");
  };
  for (const auto& [section, body] : doc.items()) {
    if (!body.is_object()) throw ConfigError(origin + ": section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) {
      const std::string where = section + "." + key;
      if (value.is_array()) {
        std::string joined;
        for (const auto& v : value) joined += (joined.empty() ? "" : ",") + scalar(v, where);
        cfg[section][key] = joined;
      } else {
        cfg[section][key] = scalar(value, where);
      }
    }
  }
  check_schema(cfg);
  return cfg;
}

/// Chooses the parser from the extension: .json is JSON, anything else INI.
inline ConfigMap load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return json ? parse_json(in, path) : parse_ini(in, path);
}

/// Typed access with "section.key" diagnostics.
class ConfigView {
 public:
  explicit ConfigView(const ConfigMap& cfg) : cfg_(cfg) {}

  bool has(const std::string& section, const std::string& key) const {
    const auto s = cfg_.find(section);
    return s != cfg_.end() && s->second.count(key);
  }
  bool has_section(const std::string& section) const {
    const auto s = cfg_.find(section);
    return s != cfg_.end() && !s->second.empty();
  }

  std::string str(const std::string& section, const std::string& key, const std::string& fallback) const {
    return has(section, key) ? cfg_.at(section).at(key) : fallback;
  }

  std::string required(const std::string& section, const std::string& key) const {
    if (!has(section, key)) throw ConfigError("missing required key " + section + "." + key);
    return cfg_.at(section).at(key);
  }

  static double parse_double(const std::string& text, const std::string& where) {
    double v = 0;
    const auto s = trim(text);
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size() || !std::isfinite(v))
      throw ConfigError(where + ": expected a finite number, got '" + text + "'");
    return v;
  }

  double num(const std::string& section, const std::string& key, double fallback) const {
    return has(section, key) ? parse_double(cfg_.at(section).at(key), section + "." + key) : fallback;
  }

  long long integer(const std::string& section, const std::string& key, long long fallback) const {
    if (!has(section, key)) return fallback;
    const auto s = trim(cfg_.at(section).at(key));
    long long v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
      throw ConfigError(section + "." + key + ": expected an integer, got '" + s + "'");
    return v;
  }

  bool flag(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    auto s = trim(cfg_.at(section).at(key));
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(section + "." + key + ": expected a boolean, got '" + s + "'");
  }

  std::vector<double> list(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split_list(str(section, key, "")))
      out.push_back(parse_double(item, section + "." + key));
    return out;
  }

 private:
  const ConfigMap& cfg_;
};

/// One sweep axis over "section.key", linear from start to stop inclusive.
struct SweepAxis {
  std::string section, key;
  std::vector<double> values;
  std::string name() const { return section + "." + key; }
};

/// Axes from [sweep]; parameter/start/stop/steps are comma lists of equal length.
inline std::vector<SweepAxis> sweep_axes(const ConfigMap& cfg) {
  ConfigView v(cfg);
  std::vector<SweepAxis> axes;
  if (!v.has_section("sweep")) return axes;
  const auto params = split_list(v.required("sweep", "parameter"));
  const auto starts = v.list("sweep", "start"), stops = v.list("sweep", "stop");
  const auto steps_text = split_list(v.required("sweep", "steps"));
  if (starts.size() != params.size() || stops.size() != params.size() || steps_text.size() != params.size())
    throw ConfigError("sweep.parameter, start, stop and steps must have the same number of entries");
  const auto& schema = config_schema();
  for (std::size_t i = 0; i < params.size(); ++i) {
    SweepAxis axis;
    const auto dot = params[i].find('.');
    if (dot == std::string::npos) throw ConfigError("sweep parameter '" + params[i] + "' must be section.key");
    axis.section = params[i].substr(0, dot);
    axis.key = params[i].substr(dot + 1);
    const auto s = schema.find(axis.section);
    if (s == schema.end() || !s->second.count(axis.key) || axis.section == "sweep" || axis.section == "output" ||
        axis.section == "run")
      throw ConfigError("sweep parameter '" + params[i] + "' does not name a sweepable parameter");
    const double n = ConfigView::parse_double(steps_text[i], "sweep.steps");
    if (n < 1 || n != std::floor(n)) throw ConfigError("sweep.steps entries must be positive integers");
    const auto count = static_cast<std::size_t>(n);
    for (std::size_t k = 0; k < count; ++k)
      axis.values.push_back(count == 1 ? starts[i]
                                       : starts[i] + (stops[i] - starts[i]) * static_cast<double>(k) /
                                                         static_cast<double>(count - 1));
    axes.push_back(std::move(axis));
  }
  return axes;
}

struct SweepPoint {
  std::vector<double> values;  ///< one per axis
  ConfigMap config;
};

inline std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

/// Cartesian product of the axes, first axis slowest. No axes gives one point.
inline std::vector<SweepPoint> expand_sweep(const ConfigMap& cfg) {
  const auto axes = sweep_axes(cfg);
  std::vector<SweepPoint> points{{{}, cfg}};
  for (const auto& axis : axes) {
    std::vector<SweepPoint> next;
    for (const auto& p : points)
      for (double v : axis.values) {
        SweepPoint q = p;
        q.values.push_back(v);
        q.config[axis.section][axis.key] = format_double(v);
        next.push_back(std::move(q));
      }
    points = std::move(next);
  }
  return points;
}

}  // namespace qtransfer::app
