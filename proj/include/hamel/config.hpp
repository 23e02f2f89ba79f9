#pragma once

#include <map>
#include <variant>

#include "hamel/models.hpp"

namespace hamel {

/** Minimal TOML subset: comments, [tables], and `key = value` pairs where a
 *  value is a quoted string, number, boolean, or flat array of numbers or
 *  strings.  That covers scenario files; nesting deeper than one table or
 *  inline tables are rejected with a line-numbered message. */
class TomlTable {
public:
  using Value = std::variant<std::string, double, bool, std::vector<double>,
                             std::vector<std::string>>;

  static TomlTable parse_file(const std::string& path);
  static TomlTable parse(const std::string& text);

  bool has(const std::string& dotted_key) const;
  std::string get_string(const std::string& key) const;
  double get_number(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_number_array(const std::string& key) const;

  std::string get_string_or(const std::string& key, std::string fallback) const;
  double get_number_or(const std::string& key, double fallback) const;

  /** Keys under `prefix.` with the prefix stripped. */
  std::vector<std::string> keys_under(const std::string& prefix) const;

private:
  std::map<std::string, Value> values_;
};

/** One fully resolved solve/simulate request: model, layout, boundary data,
 *  solver settings, output destination.  Assembled from a scenario file
 *  and/or command-line flags (flags win). */
struct ScenarioConfig {
  std::string model;
  std::optional<std::string> scenario;  // named built-in scenario
  std::optional<Layout> layout;
  ModelParams params;

  std::optional<double> t0, t1;
  std::optional<Vec> q0, q1, u0, u1;
  std::optional<Vec> guess;

  std::optional<int> steps;
  std::optional<double> tol;
  std::optional<int> max_iters;
  std::optional<int> restarts;
  std::optional<uint64_t> seed;
  std::optional<bool> serial;

  std::string out_path;      // empty = stdout
  std::string format = "csv";  // csv | json

  static ScenarioConfig from_toml(const TomlTable& t);

  /** Final (scenario, bc, config) after layering overrides onto the model's
   *  named scenario (or onto blank defaults).  Throws InvalidProblem on
   *  contradictory or incomplete settings. */
  Scenario resolve(const BuiltinModel& model) const;
};

}  // namespace hamel
