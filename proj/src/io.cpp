#include "hamel/io.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <istream>
#include <ostream>
#include <sstream>

namespace hamel {

namespace {

StateLayout layout_of(const BuiltinModel& model, Layout layout) {
  return StateLayout(layout, model.frame.dof(), model.frame.constraint_count());
}

bool has_control_columns(const BuiltinModel& model, Layout layout) {
  return layout == Layout::dynamic_oc && model.mechanical.has_value();
}

}  // namespace

std::vector<std::string> csv_columns(const BuiltinModel& model, Layout layout) {
  const StateLayout lay = layout_of(model, layout);
  std::vector<std::string> cols;
  cols.push_back("t");
  for (int i = 0; i < lay.n; ++i) cols.push_back(fmt::format("q{}", i + 1));
  for (int s : model.frame.free_slots()) cols.push_back(fmt::format("u{}", s + 1));
  if (layout == Layout::dynamic_oc) {
    for (int s : model.frame.free_slots()) cols.push_back(fmt::format("a{}", s + 1));
    for (int s : model.frame.free_slots()) cols.push_back(fmt::format("j{}", s + 1));
  }
  if (layout != Layout::mechanics)
    for (int s : model.frame.constrained_slots())
      cols.push_back(fmt::format("mu{}", s + 1));
  if (has_control_columns(model, layout))
    for (int s : model.frame.free_slots()) cols.push_back(fmt::format("Q{}", s + 1));
  return cols;
}

std::vector<Vec> recovered_controls(const BuiltinModel& model,
                                    const Trajectory& traj) {
  if (!has_control_columns(model, traj.layout)) return {};
  const StateLayout lay = layout_of(model, traj.layout);
  std::vector<Vec> out;
  out.reserve(traj.states.size());
  for (const Vec& x : traj.states)
    out.push_back(
        recover_controls(*model.mechanical, lay.q(x), lay.u(x), lay.a(x)));
  return out;
}

void write_csv(std::ostream& os, const BuiltinModel& model,
               const Trajectory& traj, const SolveInfo& info) {
  const StateLayout lay = layout_of(model, traj.layout);
  const auto cols = csv_columns(model, traj.layout);
  const auto controls = recovered_controls(model, traj);

  if (!info.converged)
    os << fmt::format("# converged=false residual={:.17g} iterations={}\n",
                      info.residual_norm, info.iterations);

  for (size_t c = 0; c < cols.size(); ++c)
    os << (c ? "," : "") << cols[c];
  os << "\n";

  for (size_t k = 0; k < traj.states.size(); ++k) {
    const Vec& x = traj.states[k];
    os << fmt::format("{:.17g}", traj.times[k]);
    for (int i = 0; i < lay.size(); ++i) os << fmt::format(",{:.17g}", x(i));
    if (!controls.empty())
      for (int i = 0; i < controls[k].size(); ++i)
        os << fmt::format(",{:.17g}", controls[k](i));
    os << "\n";
  }
}

void write_json(std::ostream& os, const BuiltinModel& model,
                const Trajectory& traj, const SolveInfo& info) {
  const StateLayout lay = layout_of(model, traj.layout);
  const auto controls = recovered_controls(model, traj);
  const QuasiFrame& frame = model.frame;

  nlohmann::ordered_json j;
  j["model"] = info.model;
  if (!info.scenario.empty()) j["scenario"] = info.scenario;
  j["layout"] = layout_name(traj.layout);
  j["converged"] = info.converged;
  j["residual_norm"] = info.residual_norm;
  j["iterations"] = info.iterations;
  j["cost"] = info.cost;
  j["unknowns"] = std::vector<double>(info.unknowns.data(),
                                      info.unknowns.data() + info.unknowns.size());
  j["columns"] = csv_columns(model, traj.layout);

  double worst_constraint = 0.0;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (size_t k = 0; k < traj.states.size(); ++k) {
    const Vec& x = traj.states[k];
    std::vector<double> row;
    row.push_back(traj.times[k]);
    for (int i = 0; i < lay.size(); ++i) row.push_back(x(i));
    if (!controls.empty())
      for (int i = 0; i < controls[k].size(); ++i) row.push_back(controls[k](i));
    rows.push_back(row);

    const Vec q = lay.q(x);
    const Vec u_full = frame.full_from_free(lay.u(x));
    const Vec res = frame.constraint_residual(q, frame.from_quasi(q, u_full));
    if (res.size())
      worst_constraint = std::max(worst_constraint, res.cwiseAbs().maxCoeff());
  }
  j["rows"] = std::move(rows);
  j["max_constraint_residual"] = worst_constraint;
  os << j.dump(2) << "\n";
}

Trajectory read_csv(std::istream& is, const BuiltinModel& model,
                    Layout layout) {
  const StateLayout lay = layout_of(model, layout);
  const auto expect = csv_columns(model, layout);

  auto split = [](const std::string& line) {
    std::vector<std::string> parts;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) parts.push_back(cur);
    return parts;
  };

  Trajectory traj;
  traj.layout = layout;
  std::string line;
  bool header_seen = false;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto parts = split(line);
    if (!header_seen) {
      if (parts != expect) {
        std::string want;
        for (size_t i = 0; i < expect.size(); ++i)
          want += (i ? "," : "") + expect[i];
        throw InvalidProblem(fmt::format(
            "line {}: header '{}' does not match {} layout of {} ({})", lineno,
            line, layout_name(layout), model.name, want));
      }
      header_seen = true;
      continue;
    }
    if (parts.size() != expect.size())
      throw InvalidProblem(fmt::format("line {}: {} field(s), expected {}",
                                       lineno, parts.size(), expect.size()));
    Vec x(lay.size());
    try {
      for (int i = 0; i < lay.size(); ++i)
        x(i) = std::stod(parts[static_cast<size_t>(i) + 1]);
      traj.times.push_back(std::stod(parts[0]));
    } catch (const std::exception&) {
      throw InvalidProblem(fmt::format("line {}: unparsable number", lineno));
    }
    traj.states.push_back(std::move(x));
  }
  if (!header_seen || traj.states.size() < 2)
    throw InvalidProblem("trajectory file has no header or fewer than two rows");
  return traj;
}

}  // namespace hamel
