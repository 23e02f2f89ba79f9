#include "hamel/config.hpp"

#include <fmt/format.h>

#include <cctype>
#include <fstream>
#include <sstream>

namespace hamel {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

/** Cut an unquoted trailing comment. */
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

double parse_number(const std::string& text, int lineno) {
  try {
    size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size())
      throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw InvalidProblem(fmt::format("line {}: '{}' is not a number", lineno, text));
  }
}

TomlTable::Value parse_scalar(const std::string& text, int lineno) {
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"')
    return text.substr(1, text.size() - 2);
  if (text == "true") return true;
  if (text == "false") return false;
  return parse_number(text, lineno);
}

std::vector<std::string> split_items(const std::string& body, int lineno) {
  std::vector<std::string> items;
  std::string cur;
  bool in_string = false;
  for (char ch : body) {
    if (ch == '"') in_string = !in_string;
    if (ch == ',' && !in_string) {
      items.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!trim(cur).empty()) items.push_back(trim(cur));
  for (const auto& it : items)
    if (it.empty())
      throw InvalidProblem(fmt::format("line {}: empty array element", lineno));
  if (in_string)
    throw InvalidProblem(fmt::format("line {}: unterminated string", lineno));
  return items;
}

TomlTable::Value parse_array(const std::string& body, int lineno) {
  const auto items = split_items(body, lineno);
  if (items.empty()) return std::vector<double>{};
  if (items.front().front() == '"') {
    std::vector<std::string> out;
    for (const auto& it : items) {
      if (it.size() < 2 || it.front() != '"' || it.back() != '"')
        throw InvalidProblem(
            fmt::format("line {}: mixed or malformed string array", lineno));
      out.push_back(it.substr(1, it.size() - 2));
    }
    return out;
  }
  std::vector<double> out;
  for (const auto& it : items) out.push_back(parse_number(it, lineno));
  return out;
}

}  // namespace

TomlTable TomlTable::parse(const std::string& text) {
  TomlTable table;
  std::istringstream is(text);
  std::string raw, prefix;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw InvalidProblem(fmt::format("line {}: malformed table header", lineno));
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty() || name.find('.') != std::string::npos ||
          name.front() == '[')
        throw InvalidProblem(fmt::format(
            "line {}: only one level of tables is supported", lineno));
      prefix = name;
      continue;
    }

    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidProblem(fmt::format("line {}: expected 'key = value'", lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw InvalidProblem(fmt::format("line {}: expected 'key = value'", lineno));
    if (value.front() == '{')
      throw InvalidProblem(
          fmt::format("line {}: inline tables are not supported", lineno));

    const std::string full = prefix.empty() ? key : prefix + "." + key;
    if (table.values_.count(full))
      throw InvalidProblem(fmt::format("line {}: duplicate key '{}'", lineno, full));

    if (value.front() == '[') {
      if (value.back() != ']')
        throw InvalidProblem(fmt::format("line {}: unterminated array", lineno));
      table.values_[full] = parse_array(value.substr(1, value.size() - 2), lineno);
    } else {
      table.values_[full] = parse_scalar(value, lineno);
    }
  }
  return table;
}

TomlTable TomlTable::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is)
    throw InvalidProblem(fmt::format("cannot open scenario file '{}'", path));
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse(buf.str());
}

bool TomlTable::has(const std::string& key) const { return values_.count(key) > 0; }

namespace {

[[noreturn]] void missing(const std::string& key) {
  throw InvalidProblem(fmt::format("scenario file: missing key '{}'", key));
}

[[noreturn]] void wrong_type(const std::string& key, const char* want) {
  throw InvalidProblem(
      fmt::format("scenario file: key '{}' is not a {}", key, want));
}

}  // namespace

std::string TomlTable::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) missing(key);
  if (const auto* v = std::get_if<std::string>(&it->second)) return *v;
  wrong_type(key, "string");
}

double TomlTable::get_number(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) missing(key);
  if (const auto* v = std::get_if<double>(&it->second)) return *v;
  wrong_type(key, "number");
}

bool TomlTable::get_bool(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) missing(key);
  if (const auto* v = std::get_if<bool>(&it->second)) return *v;
  wrong_type(key, "boolean");
}

std::vector<double> TomlTable::get_number_array(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) missing(key);
  if (const auto* v = std::get_if<std::vector<double>>(&it->second)) return *v;
  wrong_type(key, "number array");
}

std::string TomlTable::get_string_or(const std::string& key,
                                     std::string fallback) const {
  return has(key) ? get_string(key) : std::move(fallback);
}

double TomlTable::get_number_or(const std::string& key, double fallback) const {
  return has(key) ? get_number(key) : fallback;
}

std::vector<std::string> TomlTable::keys_under(const std::string& prefix) const {
  std::vector<std::string> out;
  const std::string p = prefix + ".";
  for (const auto& [key, value] : values_) {
    (void)value;
    if (key.rfind(p, 0) == 0) out.push_back(key.substr(p.size()));
  }
  return out;
}

namespace {

Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<int>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) out(static_cast<int>(i)) = v[i];
  return out;
}

int to_int(double v, const std::string& key) {
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw InvalidProblem(
        fmt::format("scenario file: key '{}' must be an integer", key));
  return i;
}

}  // namespace

ScenarioConfig ScenarioConfig::from_toml(const TomlTable& t) {
  ScenarioConfig cfg;
  cfg.model = t.get_string("problem.model");
  if (t.has("problem.scenario")) cfg.scenario = t.get_string("problem.scenario");
  if (t.has("problem.layout"))
    cfg.layout = layout_from_name(t.get_string("problem.layout"));

  if (t.has("problem.t0")) cfg.t0 = t.get_number("problem.t0");
  if (t.has("problem.t1")) cfg.t1 = t.get_number("problem.t1");
  if (t.has("problem.q0")) cfg.q0 = to_vec(t.get_number_array("problem.q0"));
  if (t.has("problem.q1")) cfg.q1 = to_vec(t.get_number_array("problem.q1"));
  if (t.has("problem.u0")) cfg.u0 = to_vec(t.get_number_array("problem.u0"));
  if (t.has("problem.u1")) cfg.u1 = to_vec(t.get_number_array("problem.u1"));
  if (t.has("problem.guess"))
    cfg.guess = to_vec(t.get_number_array("problem.guess"));

  for (const auto& key : t.keys_under("params"))
    cfg.params[key] = t.get_number("params." + key);

  if (t.has("solver.steps"))
    cfg.steps = to_int(t.get_number("solver.steps"), "solver.steps");
  if (t.has("solver.tol")) cfg.tol = t.get_number("solver.tol");
  if (t.has("solver.max_iters"))
    cfg.max_iters = to_int(t.get_number("solver.max_iters"), "solver.max_iters");
  if (t.has("solver.restarts"))
    cfg.restarts = to_int(t.get_number("solver.restarts"), "solver.restarts");
  if (t.has("solver.seed")) {
    const double s = t.get_number("solver.seed");
    if (s < 0) throw InvalidProblem("scenario file: solver.seed must be >= 0");
    cfg.seed = static_cast<uint64_t>(s);
  }
  if (t.has("solver.serial")) cfg.serial = t.get_bool("solver.serial");

  cfg.out_path = t.get_string_or("output.path", "");
  cfg.format = t.get_string_or("output.format", "csv");
  if (cfg.format != "csv" && cfg.format != "json")
    throw InvalidProblem(
        fmt::format("scenario file: output.format '{}' (csv | json)", cfg.format));
  return cfg;
}

Scenario ScenarioConfig::resolve(const BuiltinModel& m) const {
  Scenario s;
  if (scenario) {
    s = m.scenario(*scenario);
  } else {
    s.name = "custom";
    if (m.kinematic)
      s.layout = Layout::kinematic_oc;
    else if (m.dynamic)
      s.layout = Layout::dynamic_oc;
  }
  if (layout) s.layout = *layout;

  if (s.layout == Layout::mechanics)
    throw InvalidProblem(
        "boundary problems need the kinematic or dynamic layout; forward "
        "simulation handles mechanics");
  if (!m.supports(s.layout))
    throw UnsupportedLayout(fmt::format("model {} does not provide the {} layout",
                                        m.name, layout_name(s.layout)));

  // Changing boundary data invalidates a scenario's frozen guess; fall back
  // to the interpolation policy unless the caller supplied one.
  if ((t0 || t1 || q0 || q1 || u0 || u1) && !guess) s.guess = Vec();

  if (t0) s.bc.t0 = *t0;
  if (t1) s.bc.t1 = *t1;
  if (q0) s.bc.q0 = *q0;
  if (q1) s.bc.q1 = *q1;
  if (u0) s.bc.u0 = *u0;
  if (u1) s.bc.u1 = *u1;
  if (guess) s.guess = *guess;

  if (s.bc.q0.size() == 0) throw InvalidProblem("q0 is required (flag or scenario)");
  if (s.bc.q1.size() == 0) throw InvalidProblem("q1 is required (flag or scenario)");

  // Unstated endpoint velocities on a dynamic problem mean rest-to-rest.
  if (s.layout == Layout::dynamic_oc) {
    const int f = m.frame.free_count();
    if (!s.bc.u0) s.bc.u0 = Vec::Zero(f);
    if (!s.bc.u1) s.bc.u1 = Vec::Zero(f);
  }

  if (steps) s.config.steps = *steps;
  if (tol) s.config.newton_tol = *tol;
  if (max_iters) s.config.max_iters = *max_iters;
  if (restarts) s.config.restarts = *restarts;
  if (seed) s.config.seed = *seed;
  if (serial) s.config.parallel_jacobian = !*serial;
  return s;
}

}  // namespace hamel
