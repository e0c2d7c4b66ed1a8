#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hopf/dynamics.hpp"
#include "hopf/guidance.hpp"

namespace hopf {

/// Everything needed to run one closed-loop engagement.
struct ScenarioConfig {
  int k = 0;
  std::vector<NonlinearState> init;          // per pursuer, evader frame
  std::vector<EngagementAspect> aspects;
  double v_p = 0.0;                          // m/s
  double v_e = 0.0;                          // m/s
  double r = 0.0;                            // m
  double v_max = 1000.0;                     // m/s
  ControlBounds bounds;
  double horizon = 0.0;                      // s
  double rate = 120.0;                       // Hz
  PNConfig pn;
  double autopilot_tau = 0.2;                // s
  NewtonOptions newton;
  QuadratureOptions quad;
  SearchOptions search;
  double evader_bound_inflation = 1.0;
  int decimation = 1;
  int rescan_every = 12;

  /// Empty when valid; otherwise one message per violated constraint.
  std::vector<std::string> validate() const;

  SolveContext solve_context() const;
  GuidanceConfig guidance_config() const;
};

struct StepRecord {
  double t = 0.0;
  std::vector<NonlinearState> truth;   // per vehicle
  std::vector<RelativeState> linear;   // snapshot fed to guidance
  Eigen::VectorXd a_p_cmd;
  Eigen::VectorXd a_p_achieved;
  double a_e = 0.0;
  std::vector<GuidanceMode> mode;
  int active_vehicle = 1;
  double phi = 0.0;
  double t_star = std::numeric_limits<double>::quiet_NaN();
  bool convexity_ok = true;
  double solve_ms = 0.0;
  // Filled by reconstruct_inertial.
  double evader_x = 0.0, evader_y = 0.0, evader_heading = 0.0;
  std::vector<double> vehicle_x, vehicle_y;
};

struct TrajectoryLog {
  std::vector<StepRecord> steps;
  bool inertial_filled = false;
};

struct SimResult {
  bool captured = false;
  std::optional<int> capturing_vehicle;  // 1-based
  double intercept_time = 0.0;
  double miss_distance = 0.0;
};

/// One Euler step of the relative Dubins pair, heading re-wrapped.
NonlinearState integrate_nonlinear(const NonlinearState& s, double v_p,
                                   double v_e, double a_p, double a_e,
                                   double dt);

/// Linear-model snapshot of a truth state: velocity components are the
/// inertial relative velocity expressed in the current evader axes.
RelativeState to_linear_state(const NonlinearState& s, double v_p, double v_e);

std::pair<TrajectoryLog, SimResult> run_closed_loop(const ScenarioConfig& cfg);

/// Integrates the evader's own kinematics from the origin with the
/// logged commands and places each pursuer at the evader position plus
/// the relative displacement rotated by the evader heading.
void reconstruct_inertial(TrajectoryLog& log, const ScenarioConfig& cfg);

/// Minimum planar separation over the run, min over vehicles, with
/// linear interpolation of the relative path between samples.
double miss_distance(const TrajectoryLog& log);

}  // namespace hopf
