#include "hopf/sim.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hopf {

std::vector<std::string> ScenarioConfig::validate() const {
  std::vector<std::string> errors;
  if (k < 1) errors.push_back("k must be >= 1");
  if (static_cast<int>(init.size()) != k)
    errors.push_back("need one initial state per pursuer");
  if (static_cast<int>(aspects.size()) != k)
    errors.push_back("need one engagement aspect per pursuer");
  if (static_cast<int>(bounds.q_p.size()) != k)
    errors.push_back("need one pursuer bound schedule per pursuer");
  if (v_p <= 0.0) errors.push_back("v_p must be > 0");
  if (v_e <= 0.0) errors.push_back("v_e must be > 0");
  if (r <= 0.0) errors.push_back("r must be > 0");
  if (v_max <= 0.0) errors.push_back("v_max must be > 0");
  if (bounds.q_e < 0.0) errors.push_back("q_e must be >= 0");
  if (horizon <= 0.0) errors.push_back("horizon must be > 0");
  if (rate <= 0.0) errors.push_back("rate must be > 0");
  if (pn.nav_constant <= 0.0) errors.push_back("pn_gain must be > 0");
  if (autopilot_tau <= 0.0) errors.push_back("autopilot_tau must be > 0");
  if (evader_bound_inflation <= 0.0)
    errors.push_back("evader_bound_inflation must be > 0");
  if (decimation < 1) errors.push_back("decimation must be >= 1");
  if (rescan_every < 1) errors.push_back("rescan_every must be >= 1");
  return errors;
}

SolveContext ScenarioConfig::solve_context() const {
  SolveContext ctx;
  ctx.sys = build_joint_system(aspects);
  ctx.bounds = bounds;
  ctx.r = r;
  ctx.v_max = v_max;
  ctx.newton = newton;
  ctx.quad = quad;
  ctx.search = search;
  return ctx;
}

GuidanceConfig ScenarioConfig::guidance_config() const {
  GuidanceConfig g;
  g.solve = solve_context();
  g.pn = pn;
  g.horizon = horizon;
  g.evader_bound_inflation = evader_bound_inflation;
  g.decimation = decimation;
  g.rescan_every = rescan_every;
  return g;
}

NonlinearState integrate_nonlinear(const NonlinearState& s, double v_p,
                                   double v_e, double a_p, double a_e,
                                   double dt) {
  if (dt <= 0.0) throw std::invalid_argument("dt must be > 0");
  const NonlinearState d = nonlinear_derivative(s, v_p, v_e, a_p, a_e);
  NonlinearState next;
  next.dx = s.dx + dt * d.dx;
  next.dy = s.dy + dt * d.dy;
  next.dtheta = wrap_angle(s.dtheta + dt * d.dtheta);
  return next;
}

RelativeState to_linear_state(const NonlinearState& s, double v_p, double v_e) {
  RelativeState r;
  r.dx = s.dx;
  r.dy = s.dy;
  r.dvx = v_p * std::cos(s.dtheta) - v_e;
  r.dvy = v_p * std::sin(s.dtheta);
  return r;
}

namespace {

// Closest approach of the segment P + s*(Q - P), s in [0, 1], to the origin.
double segment_min_norm(const Eigen::Vector2d& p, const Eigen::Vector2d& q) {
  const Eigen::Vector2d d = q - p;
  const double dd = d.squaredNorm();
  double s = 0.0;
  if (dd > 0.0) s = std::clamp(-p.dot(d) / dd, 0.0, 1.0);
  return (p + s * d).norm();
}

Eigen::Vector2d planar(const NonlinearState& s) { return {s.dx, s.dy}; }

}  // namespace

std::pair<TrajectoryLog, SimResult> run_closed_loop(const ScenarioConfig& cfg) {
  const auto errors = cfg.validate();
  if (!errors.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }

  const double dt = 1.0 / cfg.rate;
  Guidance guidance(cfg.guidance_config());
  std::vector<AutopilotState> autopilots(cfg.k);
  std::vector<NonlinearState> truth = cfg.init;
  for (auto& s : truth) s.dtheta = wrap_angle(s.dtheta);

  TrajectoryLog log;
  SimResult result;
  result.miss_distance = std::numeric_limits<double>::infinity();

  const long max_steps = static_cast<long>(std::ceil(cfg.horizon * cfg.rate)) + 1;
  for (long n = 0; n < max_steps; ++n) {
    const double t = n * dt;

    StepRecord rec;
    rec.t = t;
    rec.truth = truth;
    rec.linear.reserve(cfg.k);
    for (const auto& s : truth)
      rec.linear.push_back(to_linear_state(s, cfg.v_p, cfg.v_e));

    JointState joint;
    joint.k = cfg.k;
    joint.chi.resize(4 * cfg.k);
    for (int i = 0; i < cfg.k; ++i)
      joint.chi.segment<4>(4 * i) = rec.linear[i].vec();

    const auto t0 = std::chrono::steady_clock::now();
    const GuidanceCommand cmd = guidance.step(joint, t);
    rec.solve_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();

    rec.a_p_cmd = cmd.a_p;
    rec.a_p_achieved.resize(cfg.k);
    for (int i = 0; i < cfg.k; ++i)
      rec.a_p_achieved[i] =
          autopilot_step(cmd.a_p[i], autopilots[i], dt, cfg.autopilot_tau);
    rec.a_e = cmd.a_e;
    rec.mode = cmd.mode;
    rec.active_vehicle = cmd.active_vehicle;
    rec.phi = cmd.phi;
    rec.t_star = cmd.t_star.value_or(std::numeric_limits<double>::quiet_NaN());
    rec.convexity_ok = cmd.convexity_ok;
    log.steps.push_back(std::move(rec));

    // Capture: first vehicle within planar radius r ends the run.
    bool captured = false;
    for (int i = 0; i < cfg.k && !captured; ++i) {
      if (planar(truth[i]).norm() <= cfg.r) {
        captured = true;
        result.captured = true;
        result.capturing_vehicle = i + 1;
        result.intercept_time = t;
        if (n > 0) {
          // Refine the crossing instant along the previous segment.
          const Eigen::Vector2d p1 = planar(log.steps[n - 1].truth[i]);
          const Eigen::Vector2d p2 = planar(truth[i]);
          const Eigen::Vector2d d = p2 - p1;
          const double a = d.squaredNorm();
          const double b = 2.0 * p1.dot(d);
          const double c = p1.squaredNorm() - cfg.r * cfg.r;
          const double disc = b * b - 4.0 * a * c;
          if (a > 0.0 && disc >= 0.0) {
            const double s = (-b - std::sqrt(disc)) / (2.0 * a);
            if (s >= 0.0 && s <= 1.0)
              result.intercept_time = (n - 1 + s) * dt;
          }
        }
      }
    }
    if (captured || t >= cfg.horizon) break;

    for (int i = 0; i < cfg.k; ++i)
      truth[i] = integrate_nonlinear(truth[i], cfg.v_p, cfg.v_e,
                                     log.steps.back().a_p_achieved[i],
                                     cmd.a_e, dt);
  }

  result.miss_distance = miss_distance(log);
  reconstruct_inertial(log, cfg);
  return {log, result};
}

void reconstruct_inertial(TrajectoryLog& log, const ScenarioConfig& cfg) {
  if (log.steps.empty())
    throw std::runtime_error("cannot reconstruct from an empty log");
  const double dt = 1.0 / cfg.rate;

  double heading = 0.0;
  Eigen::Vector2d pos(0.0, 0.0);
  for (auto& rec : log.steps) {
    if (static_cast<int>(rec.truth.size()) != cfg.k)
      throw std::runtime_error("log record is missing vehicle states");
    rec.evader_x = pos.x();
    rec.evader_y = pos.y();
    rec.evader_heading = heading;
    rec.vehicle_x.resize(cfg.k);
    rec.vehicle_y.resize(cfg.k);
    const Eigen::Rotation2Dd rot(heading);
    for (int i = 0; i < cfg.k; ++i) {
      const Eigen::Vector2d p = pos + rot * planar(rec.truth[i]);
      rec.vehicle_x[i] = p.x();
      rec.vehicle_y[i] = p.y();
    }
    // Forward Euler on the evader's own kinematics with the logged input.
    pos += dt * cfg.v_e * Eigen::Vector2d(std::cos(heading), std::sin(heading));
    heading = wrap_angle(heading + dt * rec.a_e / cfg.v_e);
  }
  log.inertial_filled = true;
}

double miss_distance(const TrajectoryLog& log) {
  if (log.steps.empty())
    throw std::invalid_argument("miss distance of an empty log");
  const int k = static_cast<int>(log.steps.front().truth.size());
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    for (std::size_t n = 0; n < log.steps.size(); ++n) {
      const Eigen::Vector2d p = planar(log.steps[n].truth[i]);
      if (n + 1 < log.steps.size()) {
        best = std::min(best,
                        segment_min_norm(p, planar(log.steps[n + 1].truth[i])));
      } else {
        best = std::min(best, p.norm());
      }
    }
  }
  return best;
}

}  // namespace hopf
