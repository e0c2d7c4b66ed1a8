#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hopf/reachability.hpp"
#include "hopf/scenario_io.hpp"
#include "hopf/sim.hpp"

namespace hopf {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

Eigen::VectorXd initial_joint_state(const ScenarioConfig& cfg) {
  Eigen::VectorXd chi(4 * cfg.k);
  for (int i = 0; i < cfg.k; ++i)
    chi.segment<4>(4 * i) = to_linear_state(cfg.init[i], cfg.v_p, cfg.v_e).vec();
  return chi;
}

Eigen::VectorXd parse_state_list(const std::vector<double>& values, int k) {
  if (static_cast<int>(values.size()) != 4 * k)
    throw ScenarioError("--state needs exactly 4*k values (dx dy dvx dvy per vehicle)");
  Eigen::VectorXd chi(4 * k);
  for (int i = 0; i < 4 * k; ++i) chi[i] = values[i];
  return chi;
}

int cmd_run(const std::string& scenario_path, const std::string& out_path,
            std::ostream& out) {
  const ScenarioConfig cfg = load_scenario(scenario_path);
  auto [log, result] = run_closed_loop(cfg);
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    if (!f) throw std::runtime_error("cannot write " + out_path);
    write_trajectory_csv(f, log, cfg.k);
    out << "trajectory written to " << out_path << "\n";
  }
  out << summarize_result(result, log) << "\n";
  return kExitOk;
}

int cmd_reach(const std::string& scenario_path, const std::vector<double>& state,
              bool have_time, double time, std::ostream& out) {
  const ScenarioConfig cfg = load_scenario(scenario_path);
  const SolveContext ctx = cfg.solve_context();
  const Eigen::VectorXd x0 =
      state.empty() ? initial_joint_state(cfg) : parse_state_list(state, cfg.k);

  std::ostringstream buf;
  buf.precision(10);
  if (have_time) {
    const UnionValue u = union_value(ctx, x0, time);
    buf << "t=" << time << " phi=" << u.phi << " argmin=" << u.argmin_index;
    for (std::size_t i = 0; i < u.phi_i.size(); ++i)
      buf << " phi_" << (i + 1) << "=" << u.phi_i[i];
    if (u.degraded) buf << " degraded=true";
    buf << "\n";
  } else {
    const ReachResult r = min_time_to_reach(ctx, x0, cfg.horizon);
    buf << "reachable=" << (r.reachable ? "true" : "false");
    if (r.t_star) buf << " t_star=" << *r.t_star;
    buf << " phi=" << r.phi_at_t_star << " argmin=" << r.active_vehicle << "\n";
  }
  out << buf.str();
  return kExitOk;
}

int cmd_sweep(const std::string& scenario_path, const std::string& param,
              const std::vector<std::string>& values, const std::string& out_path,
              std::ostream& out, std::ostream& err) {
  std::ifstream in(scenario_path);
  if (!in) throw ScenarioError("cannot open scenario file: " + scenario_path);
  std::ostringstream base;
  base << in.rdbuf();

  struct Row {
    std::string value;
    std::string summary;
    bool failed = false;
  };
  std::vector<std::future<Row>> futures;
  for (const auto& v : values) {
    futures.push_back(std::async(std::launch::async, [&, v]() {
      Row row;
      row.value = v;
      try {
        const ScenarioConfig cfg =
            parse_scenario(base.str() + "\n" + param + " = " + v + "\n");
        auto [log, result] = run_closed_loop(cfg);
        row.summary = summarize_result(result, log);
      } catch (const std::exception& ex) {
        row.failed = true;
        row.summary = std::string("error: ") + ex.what();
      }
      return row;
    }));
  }

  std::ostringstream table;
  bool any_failed = false;
  table << "# sweep " << param << "\n";
  for (auto& f : futures) {
    const Row row = f.get();
    any_failed = any_failed || row.failed;
    table << param << "=" << row.value << " | " << row.summary << "\n";
  }
  out << table.str();
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    if (!f) throw std::runtime_error("cannot write " + out_path);
    f << table.str();
  }
  if (any_failed) {
    err << "sweep finished with failed variants (partial results flushed)\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err) {
  CLI::App app{"Collaborative pursuit guidance via Hopf-formula reachability"};
  app.require_subcommand(1);
  bool seedless = false;
  app.add_flag("--seedless", seedless,
               "accepted for interface stability; the pipeline has no randomness");

  std::string run_scenario, run_out;
  auto* run = app.add_subcommand("run", "run a closed-loop engagement");
  run->add_option("scenario", run_scenario, "scenario file")->required();
  run->add_option("--out", run_out, "write the trajectory table here");

  std::string reach_scenario;
  std::vector<double> reach_state;
  double reach_time = 0.0;
  auto* reach = app.add_subcommand("reach", "evaluate reachability of the capture set");
  reach->add_option("scenario", reach_scenario, "scenario file")->required();
  reach->add_option("--state", reach_state,
                    "joint state override, 4*k values: dx dy dvx dvy per vehicle");
  auto* time_opt = reach->add_option("--time", reach_time,
                                     "evaluate the value function at this horizon");

  std::string sweep_scenario, sweep_param, sweep_out;
  std::vector<std::string> sweep_values;
  auto* sweep = app.add_subcommand("sweep", "batch-run scenario variants");
  sweep->add_option("scenario", sweep_scenario, "scenario file")->required();
  sweep->add_option("--param", sweep_param, "scenario key to vary")->required();
  sweep->add_option("--values", sweep_values, "values for the varied key")
      ->required();
  sweep->add_option("--out", sweep_out, "write the summary table here");

  try {
    std::vector<const char*> cargs;
    cargs.push_back("hopfsim");
    for (const auto& a : args) cargs.push_back(a.c_str());
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      out << app.help();
      return kExitOk;
    }
    err << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (*run) return cmd_run(run_scenario, run_out, out);
    if (*reach)
      return cmd_reach(reach_scenario, reach_state, time_opt->count() > 0,
                       reach_time, out);
    if (*sweep)
      return cmd_sweep(sweep_scenario, sweep_param, sweep_values, sweep_out, out,
                       err);
  } catch (const ScenarioError& ex) {
    err << ex.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& ex) {
    err << ex.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& ex) {
    err << ex.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace hopf
