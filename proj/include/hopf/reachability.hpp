#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hopf/dynamics.hpp"
#include "hopf/solver.hpp"

namespace hopf {

/// Scan/bisection controls for the minimum-time search and the sgn tie
/// tolerance used when mapping a costate to physical controls.
struct SearchOptions {
  double scan_step = 0.1;       // s, coarse forward scan
  double bisect_tol = 1e-4;     // s, bracket width at termination
  double phi_tol = 5e-5;        // |phi| target at the returned root
  double tie_tol = 1e-9;        // relative to ||p*||
};

/// Full solve configuration for one scenario: joint system, bounds,
/// capture geometry, and solver knobs.
struct SolveContext {
  SystemMatrices sys;
  ControlBounds bounds;
  double r = 0.0;
  double v_max = 0.0;
  NewtonOptions newton;
  QuadratureOptions quad;
  SearchOptions search;
};

/// Pointwise minimum over the k per-vehicle Hopf solutions.
struct UnionValue {
  std::vector<double> phi_i;
  double phi = 0.0;
  int argmin_index = 1;  // 1-based; lowest index on ties
  bool degraded = false; // some per-vehicle solve did not converge
  std::vector<HopfSolution> solutions;

  const HopfSolution& active() const { return solutions[argmin_index - 1]; }
};

UnionValue union_value(const SolveContext& ctx, const Eigen::VectorXd& x0,
                       double t, double engagement_time = 0.0);

/// Minimum-time search result. When unreachable, phi_at_t_star and
/// p_star describe the probe with the smallest union value seen, so
/// callers can rank how far from reachable the state is.
struct ReachResult {
  bool reachable = false;
  std::optional<double> t_star;
  double t_at_min = 0.0;   // t_star when reachable, else the min-phi probe
  double phi_at_t_star = 0.0;
  Eigen::VectorXd p_star;
  int active_vehicle = 1;  // 1-based
  bool degraded = false;
};

/// Smallest t <= t_max with phi(x0, t) = 0: coarse forward scan for the
/// first positive-to-nonpositive sign change, then bisection. An
/// optional hint narrows the scan to a window around a previous root
/// (falling back to the full scan whenever the window misses).
ReachResult min_time_to_reach(const SolveContext& ctx, const Eigen::VectorXd& x0,
                              double t_max, double engagement_time = 0.0,
                              std::optional<double> hint = std::nullopt);

/// Bang-bang controls recovered from a minimizing costate at time
/// theta before the probe horizon (theta = 0 is the current instant).
/// Components whose sgn argument ties to zero return exactly 0.
struct ControlPair {
  Eigen::VectorXd a_p;
  double a_e = 0.0;
};

ControlPair extract_controls(const SolveContext& ctx, const Eigen::VectorXd& p_star,
                             double theta, double qp_time);

/// True when Q_e <= Q_p,i(t) for every pursuer; false means the
/// min-plus union is only an upper bound of the value function.
bool convexity_check(const ControlBounds& bounds, double t);

}  // namespace hopf
