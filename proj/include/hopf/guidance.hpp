#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hopf/dynamics.hpp"
#include "hopf/reachability.hpp"

namespace hopf {

enum class GuidanceMode { Hopf, PN };

struct PNConfig {
  double nav_constant = 4.0;
};

/// Per-step guidance output: one commanded lateral acceleration per
/// pursuer plus the evader's game-optimal command.
struct GuidanceCommand {
  Eigen::VectorXd a_p;
  double a_e = 0.0;
  std::vector<GuidanceMode> mode;
  int active_vehicle = 1;           // 1-based union argmin
  std::optional<double> t_star;
  double phi = 0.0;
  bool convexity_ok = true;
};

/// Pure proportional navigation: a = N * V_c * lambda_dot, with the
/// line-of-sight rate taken from cross(rel_pos, rel_vel) / range^2 and
/// the closing speed from the negative range rate.
double proportional_navigation(const Eigen::Vector2d& rel_pos,
                               const Eigen::Vector2d& rel_vel,
                               const PNConfig& cfg);

/// Three identical cascaded first-order lags advanced by explicit
/// Euler; achieved acceleration is the last stage. Unity DC gain.
struct AutopilotState {
  double x1 = 0.0, x2 = 0.0, x3 = 0.0;
};

double autopilot_step(double command, AutopilotState& state, double dt,
                      double tau);

/// Evader's maximizing control in the game Hamiltonian, recovered from
/// the pursuers' latest costate at the current instant.
double evader_step(const SolveContext& ctx, const Eigen::VectorXd& p_star,
                   double theta = 0.0);

struct GuidanceConfig {
  SolveContext solve;
  PNConfig pn;
  double horizon = 0.0;               // total engagement time available
  double evader_bound_inflation = 1.0;
  int decimation = 1;                 // full solve every n-th step
  // While the set is unreachable the loop flies PN, which needs no
  // solver; the reachability re-check runs only every n-th step.
  int rescan_every = 12;
};

/// Stateful guidance for one engagement: runs the reachability solve,
/// extracts bang-bang commands, and falls back to PN per step when the
/// capture set is unreachable or the solve fails to converge.
class Guidance {
 public:
  explicit Guidance(GuidanceConfig cfg);

  /// x is the joint linear-model state snapshot at engagement time t_now.
  GuidanceCommand step(const JointState& x, double t_now);

  /// Evader command from the latest converged costate; holds the
  /// previous command when none exists.
  double evader_command() const { return last_evader_; }

 private:
  GuidanceCommand pn_fallback(const JointState& x, double t_now) const;

  GuidanceConfig cfg_;
  SolveContext solver_view_;  // bounds inflated for the evader side
  std::optional<double> last_t_star_;
  std::optional<GuidanceCommand> last_command_;
  double last_evader_ = 0.0;
  long step_count_ = 0;
  long steps_since_reachable_ = 0;
};

}  // namespace hopf
