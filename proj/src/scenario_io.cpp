#include "hopf/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace hopf {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("trailing characters");
  return v;
}

int parse_int(const std::string& s) {
  std::size_t pos = 0;
  const int v = std::stoi(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("trailing characters");
  return v;
}

BoundSchedule parse_schedule(const std::string& value) {
  const auto toks = split_ws(value);
  if (toks.empty()) throw std::invalid_argument("empty bound schedule");
  if (toks[0] == "parabola") {
    if (toks.size() != 3)
      throw std::invalid_argument("parabola needs: parabola <t0> <scale>");
    return BoundSchedule::parabolic(parse_double(toks[1]), parse_double(toks[2]));
  }
  if (toks[0] == "table") {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 1; i < toks.size(); ++i) {
      const auto colon = toks[i].find(':');
      if (colon == std::string::npos)
        throw std::invalid_argument("table entries are <t>:<bound>");
      pts.emplace_back(parse_double(toks[i].substr(0, colon)),
                       parse_double(toks[i].substr(colon + 1)));
    }
    return BoundSchedule::table(std::move(pts));
  }
  if (toks.size() != 1)
    throw std::invalid_argument("expected a constant, 'parabola ...' or 'table ...'");
  return BoundSchedule::constant(parse_double(toks[0]));
}

EngagementAspect parse_aspect(const std::string& value) {
  if (value == "tail") return EngagementAspect::TailChase;
  if (value == "head") return EngagementAspect::HeadOn;
  throw std::invalid_argument("aspect must be 'tail' or 'head'");
}

struct RawEntry {
  std::string value;
  int line = 0;
};

// Splits "name.3" style keys; index is 0 when absent.
std::pair<std::string, int> split_indexed(const std::string& key) {
  const auto dot = key.find('.');
  if (dot == std::string::npos) return {key, 0};
  try {
    return {key.substr(0, dot), parse_int(key.substr(dot + 1))};
  } catch (const std::exception&) {
    return {key, 0};
  }
}

std::string schedule_to_string(const BoundSchedule& b) {
  std::ostringstream out;
  out.precision(17);
  switch (b.kind()) {
    case BoundSchedule::Kind::Constant:
      out << b.constant_value();
      break;
    case BoundSchedule::Kind::Parabolic:
      out << "parabola " << b.parab_t0() << " " << b.parab_scale();
      break;
    case BoundSchedule::Kind::Table:
      out << "table";
      for (const auto& [t, v] : b.table_points()) out << " " << t << ":" << v;
      break;
  }
  return out.str();
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
  std::map<std::string, RawEntry> raw;
  std::vector<std::string> errors;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      errors.push_back("line " + std::to_string(lineno) + ": empty key or value");
      continue;
    }
    raw[key] = RawEntry{value, lineno};  // last assignment wins
  }

  ScenarioConfig cfg;
  const auto fail = [&](const RawEntry& e, const std::string& key,
                        const std::string& why) {
    errors.push_back("line " + std::to_string(e.line) + ": " + key + ": " + why);
  };

  // First pass for k so indexed keys can be range-checked.
  if (auto it = raw.find("k"); it != raw.end()) {
    try {
      cfg.k = parse_int(it->second.value);
    } catch (const std::exception&) {
      fail(it->second, "k", "not an integer");
    }
  } else {
    errors.push_back("missing required key 'k'");
  }
  const int k = std::max(cfg.k, 0);
  cfg.init.assign(k, NonlinearState{});
  cfg.aspects.assign(k, EngagementAspect::TailChase);
  cfg.bounds.q_p.assign(k, BoundSchedule::constant(0.0));
  std::vector<bool> have_init(k, false), have_aspect(k, false), have_qp(k, false);

  for (const auto& [key, entry] : raw) {
    const auto [name, index] = split_indexed(key);
    try {
      if (key == "k") {
        continue;
      } else if (key == "v_p") {
        cfg.v_p = parse_double(entry.value);
      } else if (key == "v_e") {
        cfg.v_e = parse_double(entry.value);
      } else if (key == "r") {
        cfg.r = parse_double(entry.value);
      } else if (key == "v_max") {
        cfg.v_max = parse_double(entry.value);
      } else if (key == "q_e") {
        cfg.bounds.q_e = parse_double(entry.value);
      } else if (key == "horizon") {
        cfg.horizon = parse_double(entry.value);
      } else if (key == "rate") {
        cfg.rate = parse_double(entry.value);
      } else if (key == "pn_gain") {
        cfg.pn.nav_constant = parse_double(entry.value);
      } else if (key == "autopilot_tau") {
        cfg.autopilot_tau = parse_double(entry.value);
      } else if (key == "newton_tol") {
        cfg.newton.tolerance = parse_double(entry.value);
      } else if (key == "newton_max_iter") {
        cfg.newton.max_iterations = parse_int(entry.value);
      } else if (key == "initial_guess_scale") {
        cfg.newton.initial_guess_scale = parse_double(entry.value);
      } else if (key == "quad_refine") {
        cfg.quad.refine = parse_int(entry.value);
      } else if (key == "scan_step") {
        cfg.search.scan_step = parse_double(entry.value);
      } else if (key == "bisect_tol") {
        cfg.search.bisect_tol = parse_double(entry.value);
      } else if (key == "tie_tol") {
        cfg.search.tie_tol = parse_double(entry.value);
      } else if (key == "evader_bound_inflation") {
        cfg.evader_bound_inflation = parse_double(entry.value);
      } else if (key == "decimation") {
        cfg.decimation = parse_int(entry.value);
      } else if (key == "rescan_every") {
        cfg.rescan_every = parse_int(entry.value);
      } else if (key == "aspect") {
        const auto a = parse_aspect(entry.value);
        cfg.aspects.assign(k, a);
        have_aspect.assign(k, true);
      } else if (key == "q_p") {
        const auto b = parse_schedule(entry.value);
        cfg.bounds.q_p.assign(k, b);
        have_qp.assign(k, true);
      } else if (name == "aspect" && index >= 1) {
        if (index > k) throw std::invalid_argument("vehicle index out of range");
        cfg.aspects[index - 1] = parse_aspect(entry.value);
        have_aspect[index - 1] = true;
      } else if (name == "q_p" && index >= 1) {
        if (index > k) throw std::invalid_argument("vehicle index out of range");
        cfg.bounds.q_p[index - 1] = parse_schedule(entry.value);
        have_qp[index - 1] = true;
      } else if (name == "init" && index >= 1) {
        if (index > k) throw std::invalid_argument("vehicle index out of range");
        const auto toks = split_ws(entry.value);
        if (toks.size() != 3)
          throw std::invalid_argument("expected: <dx> <dy> <dtheta>");
        cfg.init[index - 1] = NonlinearState{parse_double(toks[0]),
                                             parse_double(toks[1]),
                                             parse_double(toks[2])};
        have_init[index - 1] = true;
      } else {
        errors.push_back("line " + std::to_string(entry.line) + ": unknown key '" +
                         key + "'");
      }
    } catch (const std::exception& ex) {
      fail(entry, key, ex.what());
    }
  }

  for (int i = 0; i < k; ++i) {
    if (!have_init[i]) errors.push_back("missing required key 'init." +
                                        std::to_string(i + 1) + "'");
    if (!have_aspect[i])
      errors.push_back("missing 'aspect' (or 'aspect." + std::to_string(i + 1) +
                       "') for vehicle " + std::to_string(i + 1));
    if (!have_qp[i])
      errors.push_back("missing 'q_p' (or 'q_p." + std::to_string(i + 1) +
                       "') for vehicle " + std::to_string(i + 1));
  }

  for (const auto& e : cfg.validate()) errors.push_back(e);

  if (!errors.empty()) {
    std::string msg = "scenario errors:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ScenarioError(msg);
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const ScenarioConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "k = " << cfg.k << "\n";
  out << "v_p = " << cfg.v_p << "\n";
  out << "v_e = " << cfg.v_e << "\n";
  out << "r = " << cfg.r << "\n";
  out << "v_max = " << cfg.v_max << "\n";
  out << "q_e = " << cfg.bounds.q_e << "\n";
  out << "horizon = " << cfg.horizon << "\n";
  out << "rate = " << cfg.rate << "\n";
  out << "pn_gain = " << cfg.pn.nav_constant << "\n";
  out << "autopilot_tau = " << cfg.autopilot_tau << "\n";
  out << "newton_tol = " << cfg.newton.tolerance << "\n";
  out << "newton_max_iter = " << cfg.newton.max_iterations << "\n";
  out << "initial_guess_scale = " << cfg.newton.initial_guess_scale << "\n";
  out << "quad_refine = " << cfg.quad.refine << "\n";
  out << "scan_step = " << cfg.search.scan_step << "\n";
  out << "bisect_tol = " << cfg.search.bisect_tol << "\n";
  out << "tie_tol = " << cfg.search.tie_tol << "\n";
  out << "evader_bound_inflation = " << cfg.evader_bound_inflation << "\n";
  out << "decimation = " << cfg.decimation << "\n";
  out << "rescan_every = " << cfg.rescan_every << "\n";
  for (int i = 0; i < cfg.k; ++i) {
    out << "aspect." << (i + 1) << " = "
        << (cfg.aspects[i] == EngagementAspect::TailChase ? "tail" : "head")
        << "\n";
    out << "q_p." << (i + 1) << " = " << schedule_to_string(cfg.bounds.q_p[i])
        << "\n";
    out << "init." << (i + 1) << " = " << cfg.init[i].dx << " " << cfg.init[i].dy
        << " " << cfg.init[i].dtheta << "\n";
  }
  return out.str();
}

void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log, int k) {
  out << "t";
  for (int i = 1; i <= k; ++i) {
    out << ",dx." << i << ",dy." << i << ",dtheta." << i << ",dvx." << i
        << ",dvy." << i << ",ap_cmd." << i << ",ap_ach." << i << ",mode." << i
        << ",x." << i << ",y." << i;
  }
  out << ",a_e,argmin,phi,t_star,convexity_ok,evader_x,evader_y\n";

  char buf[32];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    out << buf;
  };
  for (const auto& s : log.steps) {
    num(s.t);
    for (int i = 0; i < k; ++i) {
      out << ",";
      num(s.truth[i].dx);
      out << ",";
      num(s.truth[i].dy);
      out << ",";
      num(s.truth[i].dtheta);
      out << ",";
      num(s.linear[i].dvx);
      out << ",";
      num(s.linear[i].dvy);
      out << ",";
      num(s.a_p_cmd[i]);
      out << ",";
      num(s.a_p_achieved[i]);
      out << "," << (s.mode[i] == GuidanceMode::Hopf ? "hopf" : "pn") << ",";
      num(s.vehicle_x.empty() ? 0.0 : s.vehicle_x[i]);
      out << ",";
      num(s.vehicle_y.empty() ? 0.0 : s.vehicle_y[i]);
    }
    out << ",";
    num(s.a_e);
    out << "," << s.active_vehicle << ",";
    num(s.phi);
    out << ",";
    num(s.t_star);
    out << "," << (s.convexity_ok ? 1 : 0) << ",";
    num(s.evader_x);
    out << ",";
    num(s.evader_y);
    out << "\n";
  }
}

std::string trajectory_csv(const TrajectoryLog& log, int k) {
  std::ostringstream out;
  write_trajectory_csv(out, log, k);
  return out.str();
}

std::string summarize_result(const SimResult& result, const TrajectoryLog& log) {
  std::ostringstream out;
  double total_solve = 0.0;
  for (const auto& s : log.steps) total_solve += s.solve_ms;
  out << "captured=" << (result.captured ? "true" : "false");
  if (result.capturing_vehicle) out << " vehicle=" << *result.capturing_vehicle;
  if (result.captured) out << " intercept_time_s=" << result.intercept_time;
  out << " miss_distance_m=" << result.miss_distance
      << " steps=" << log.steps.size() << " mean_solve_ms="
      << (log.steps.empty() ? 0.0 : total_solve / log.steps.size());
  return out.str();
}

}  // namespace hopf
