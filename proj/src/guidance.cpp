#include "hopf/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hopf {

double proportional_navigation(const Eigen::Vector2d& rel_pos,
                               const Eigen::Vector2d& rel_vel,
                               const PNConfig& cfg) {
  const double range2 = rel_pos.squaredNorm();
  if (range2 == 0.0) throw std::domain_error("PN undefined at zero range");
  const double range = std::sqrt(range2);
  const double los_rate =
      (rel_pos.x() * rel_vel.y() - rel_pos.y() * rel_vel.x()) / range2;
  const double closing = -rel_pos.dot(rel_vel) / range;
  return cfg.nav_constant * closing * los_rate;
}

double autopilot_step(double command, AutopilotState& state, double dt,
                      double tau) {
  if (dt <= 0.0) throw std::invalid_argument("autopilot dt must be > 0");
  if (tau <= 0.0) throw std::invalid_argument("autopilot tau must be > 0");
  const double d1 = (command - state.x1) / tau;
  const double d2 = (state.x1 - state.x2) / tau;
  const double d3 = (state.x2 - state.x3) / tau;
  state.x1 += dt * d1;
  state.x2 += dt * d2;
  state.x3 += dt * d3;
  return state.x3;
}

double evader_step(const SolveContext& ctx, const Eigen::VectorXd& p_star,
                   double theta) {
  return extract_controls(ctx, p_star, theta, 0.0).a_e;
}

Guidance::Guidance(GuidanceConfig cfg) : cfg_(std::move(cfg)) {
  solver_view_ = cfg_.solve;
  if (cfg_.evader_bound_inflation != 1.0)
    solver_view_.bounds.q_e *= cfg_.evader_bound_inflation;
  // Control extraction needs the minimizing costate at the crossing,
  // not a polished zero of phi; the root slope is steep under a fast
  // closing and polishing it costs a dozen extra solves per step.
  solver_view_.search.phi_tol = std::max(solver_view_.search.phi_tol, 1e-2);
}

GuidanceCommand Guidance::pn_fallback(const JointState& x, double t_now) const {
  GuidanceCommand cmd;
  const int k = cfg_.solve.sys.k;
  cmd.a_p = Eigen::VectorXd::Zero(k);
  cmd.mode.assign(k, GuidanceMode::PN);
  for (int i = 0; i < k; ++i) {
    const RelativeState rs = x.vehicle(i);
    const Eigen::Vector2d rel_pos(rs.dx, rs.dy);
    if (rel_pos.squaredNorm() > 0.0)
      cmd.a_p[i] = proportional_navigation(rel_pos, {rs.dvx, rs.dvy}, cfg_.pn);
  }
  cmd.a_e = last_evader_;  // evader holds without a converged costate
  return cmd;
}

GuidanceCommand Guidance::step(const JointState& x, double t_now) {
  const int k = cfg_.solve.sys.k;
  const auto bound_at = [&](int i) { return cfg_.solve.bounds.q_p[i](t_now); };
  const auto clamp_all = [&](GuidanceCommand& cmd) {
    for (int i = 0; i < k; ++i)
      cmd.a_p[i] = std::clamp(cmd.a_p[i], -bound_at(i), bound_at(i));
  };

  const long step = step_count_++;
  const bool decimated =
      last_command_ && step % std::max(1, cfg_.decimation) != 0;
  // The PN phase needs no solver, so while the set stays unreachable
  // the reachability re-check itself is throttled.
  const bool pn_coast = last_command_ && !last_t_star_ &&
                        steps_since_reachable_ % std::max(1, cfg_.rescan_every) != 0;

  if (decimated) {
    GuidanceCommand cmd = *last_command_;
    clamp_all(cmd);
    cmd.convexity_ok = convexity_check(solver_view_.bounds, t_now);
    return cmd;
  }
  if (pn_coast) {
    ++steps_since_reachable_;
    GuidanceCommand cmd = pn_fallback(x, t_now);
    cmd.phi = last_command_->phi;
    cmd.active_vehicle = last_command_->active_vehicle;
    cmd.convexity_ok = convexity_check(solver_view_.bounds, t_now);
    clamp_all(cmd);
    last_command_ = cmd;
    return cmd;
  }

  GuidanceCommand cmd;
  cmd.a_p = Eigen::VectorXd::Zero(k);
  cmd.mode.assign(k, GuidanceMode::PN);
  cmd.convexity_ok = convexity_check(solver_view_.bounds, t_now);

  const double t_max = cfg_.horizon - t_now;
  bool hopf_ok = false;
  if (t_max > 0.0) {
    const ReachResult reach =
        min_time_to_reach(solver_view_, x.chi, t_max, t_now, last_t_star_);
    cmd.phi = reach.phi_at_t_star;
    cmd.active_vehicle = reach.active_vehicle;
    if (reach.reachable && !reach.degraded) {
      hopf_ok = true;
      last_t_star_ = reach.t_star;
      steps_since_reachable_ = 0;
      cmd.t_star = reach.t_star;
      const ControlPair controls =
          extract_controls(solver_view_, reach.p_star, 0.0, t_now);
      cmd.a_p = controls.a_p;
      cmd.a_e = controls.a_e;
      last_evader_ = controls.a_e;
      cmd.mode.assign(k, GuidanceMode::Hopf);
    } else {
      last_t_star_.reset();
      steps_since_reachable_ = 1;
      // Unreachable is still a converged solve at the most nearly
      // reachable horizon; the evader keeps playing its gradient.
      if (!reach.degraded && reach.p_star.size() > 0)
        last_evader_ =
            extract_controls(solver_view_, reach.p_star, 0.0, t_now).a_e;
    }
  }

  if (!hopf_ok) {
    GuidanceCommand pn = pn_fallback(x, t_now);
    pn.phi = cmd.phi;
    pn.active_vehicle = cmd.active_vehicle;
    pn.convexity_ok = cmd.convexity_ok;
    cmd = pn;
  }

  clamp_all(cmd);
  last_command_ = cmd;
  return cmd;
}

}  // namespace hopf
