#include "hopf/reachability.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hopf {
namespace {

double sgn_tie(double x, double tol) {
  if (std::abs(x) <= tol) return 0.0;
  return x > 0.0 ? 1.0 : -1.0;
}

}  // namespace

UnionValue union_value(const SolveContext& ctx, const Eigen::VectorXd& x0,
                       double t, double engagement_time) {
  if (ctx.sys.k < 1) throw std::invalid_argument("k must be >= 1");
  const QuadratureGrid grid = build_quadrature_grid(ctx.sys, ctx.bounds, t,
                                                    engagement_time, ctx.quad);
  UnionValue u;
  u.phi_i.reserve(ctx.sys.k);
  u.solutions.reserve(ctx.sys.k);
  for (int i = 0; i < ctx.sys.k; ++i) {
    const CaptureSet set = build_capture_set(ctx.r, ctx.v_max, ctx.sys.k, i);
    const TerminalCost tc = build_terminal_cost(ctx.sys, set, t);
    HopfSolution sol = minimize_hopf(tc, grid, x0, ctx.newton);
    if (!sol.converged) u.degraded = true;
    u.phi_i.push_back(sol.value);
    u.solutions.push_back(std::move(sol));
  }
  u.phi = u.phi_i[0];
  u.argmin_index = 1;
  for (int i = 1; i < ctx.sys.k; ++i) {
    if (u.phi_i[i] < u.phi) {
      u.phi = u.phi_i[i];
      u.argmin_index = i + 1;
    }
  }
  return u;
}

namespace {

struct Probe {
  double t;
  UnionValue value;
};

// Bisect a bracket [lo, hi] with phi(lo) > 0 >= phi(hi) until the
// bracket is tight and the upper end sits on the zero level.
ReachResult bisect_root(const SolveContext& ctx, const Eigen::VectorXd& x0,
                        double engagement_time, double lo, Probe hi) {
  constexpr int kMaxIters = 80;
  constexpr double kWidthFloor = 1e-7;  // zero-level polish gives up here
  for (int i = 0; i < kMaxIters; ++i) {
    if (hi.t - lo <= kWidthFloor) break;
    if (hi.t - lo <= ctx.search.bisect_tol &&
        std::abs(hi.value.phi) <= ctx.search.phi_tol)
      break;
    const double mid = 0.5 * (lo + hi.t);
    UnionValue v = union_value(ctx, x0, mid, engagement_time);
    if (v.phi <= 0.0)
      hi = Probe{mid, std::move(v)};
    else
      lo = mid;
  }
  ReachResult r;
  r.reachable = true;
  r.t_star = hi.t;
  r.t_at_min = hi.t;
  r.phi_at_t_star = hi.value.phi;
  r.p_star = hi.value.active().p_star;
  r.active_vehicle = hi.value.argmin_index;
  r.degraded = hi.value.degraded;
  return r;
}

// Scans [start, stop] forward with the given step for the first probe
// with phi <= 0; returns the bisected root or updates `best` with the
// smallest value seen.
std::optional<ReachResult> scan_window(const SolveContext& ctx,
                                       const Eigen::VectorXd& x0,
                                       double engagement_time, double start,
                                       double stop, double step, Probe& best) {
  double prev_t = start;
  UnionValue prev = union_value(ctx, x0, start, engagement_time);
  if (prev.phi <= 0.0) {
    // The window opens on the wrong side of the zero level; treat the
    // opening probe as the crossing bracket end.
    return bisect_root(ctx, x0, engagement_time, std::max(0.0, start - step),
                       Probe{start, std::move(prev)});
  }
  if (prev.phi < best.value.phi) best = Probe{prev_t, prev};
  while (prev_t < stop) {
    const double t = std::min(stop, prev_t + step);
    UnionValue v = union_value(ctx, x0, t, engagement_time);
    if (v.phi <= 0.0)
      return bisect_root(ctx, x0, engagement_time, prev_t, Probe{t, std::move(v)});
    if (v.phi < best.value.phi) best = Probe{t, v};
    prev_t = t;
  }
  return std::nullopt;
}

// Forward scan over [start, t_max] for the first probe with phi <= 0.
// prev holds the value at `start` (known positive). Before declaring
// the set unreachable, the neighborhood of the smallest value seen is
// rescanned at finer steps: a fast uncontrolled closing sweeps the
// capture window through a slice of time narrower than the coarse step.
ReachResult scan_from(const SolveContext& ctx, const Eigen::VectorXd& x0,
                      double t_max, double engagement_time, double start,
                      UnionValue prev_value) {
  Probe best{start, std::move(prev_value)};
  double prev_t = start;
  bool done = false;
  while (!done) {
    double t = prev_t + ctx.search.scan_step;
    if (t >= t_max) {
      t = t_max;
      done = true;
    }
    UnionValue v = union_value(ctx, x0, t, engagement_time);
    if (v.phi <= 0.0)
      return bisect_root(ctx, x0, engagement_time, prev_t, Probe{t, std::move(v)});
    if (v.phi < best.value.phi) best = Probe{t, v};
    prev_t = t;
  }

  double step = ctx.search.scan_step;
  for (int level = 0; level < 2; ++level) {
    const double lo = std::max(0.0, best.t - step);
    const double hi = std::min(t_max, best.t + step);
    step /= 10.0;
    if (auto found = scan_window(ctx, x0, engagement_time, lo, hi, step, best))
      return *found;
  }

  ReachResult r;
  r.reachable = false;
  r.t_at_min = best.t;
  r.phi_at_t_star = best.value.phi;
  r.p_star = best.value.active().p_star;
  r.active_vehicle = best.value.argmin_index;
  r.degraded = best.value.degraded;
  return r;
}

}  // namespace

ReachResult min_time_to_reach(const SolveContext& ctx, const Eigen::VectorXd& x0,
                              double t_max, double engagement_time,
                              std::optional<double> hint) {
  if (t_max <= 0.0) throw std::invalid_argument("t_max must be > 0");

  UnionValue at_zero = union_value(ctx, x0, 0.0, engagement_time);
  if (at_zero.phi <= 0.0) {
    ReachResult r;
    r.reachable = true;
    r.t_star = 0.0;
    r.t_at_min = 0.0;
    r.phi_at_t_star = at_zero.phi;
    r.p_star = at_zero.active().p_star;
    r.active_vehicle = at_zero.argmin_index;
    r.degraded = at_zero.degraded;
    return r;
  }

  if (hint && *hint > 0.0) {
    // Narrow window around the previous root, scanned a decade finer
    // than the coarse step: the crossing normally drifts by about one
    // guidance step, and a fast closing keeps it narrow.
    const double lo = std::max(0.0, *hint - 0.6 * ctx.search.scan_step);
    const double hi = std::min(t_max, *hint + 0.6 * ctx.search.scan_step);
    if (lo < hi && union_value(ctx, x0, lo, engagement_time).phi > 0.0) {
      Probe best{0.0, at_zero};
      double step = ctx.search.scan_step / 20.0;
      if (auto found =
              scan_window(ctx, x0, engagement_time, lo, hi, step, best))
        return *found;
      for (int level = 0; level < 2; ++level) {
        const double wlo = std::max(0.0, best.t - step);
        const double whi = std::min(t_max, best.t + step);
        step /= 10.0;
        if (auto found =
                scan_window(ctx, x0, engagement_time, wlo, whi, step, best))
          return *found;
      }
    }
    // Nothing inside the window (or it opened on the wrong side of the
    // zero level): fall through to the full search.
  }
  return scan_from(ctx, x0, t_max, engagement_time, 0.0, std::move(at_zero));
}

ControlPair extract_controls(const SolveContext& ctx, const Eigen::VectorXd& p_star,
                             double theta, double qp_time) {
  const int k = ctx.sys.k;
  const double tol = ctx.search.tie_tol * p_star.norm();
  ControlPair c;
  c.a_p.resize(k);
  double evader_arg = 0.0;
  for (int i = 0; i < k; ++i) {
    const double sigma = aspect_sign(ctx.sys.aspects[i]);
    const double u = sigma * (p_star[4 * i + 3] - theta * p_star[4 * i + 1]);
    // Minimizing-player control opposes the dual-norm maximizer.
    c.a_p[i] = -ctx.bounds.q_p[i](qp_time) * sgn_tie(u, tol);
    evader_arg += -(p_star[4 * i + 3] - theta * p_star[4 * i + 1]);
  }
  c.a_e = ctx.bounds.q_e * sgn_tie(evader_arg, tol);
  return c;
}

bool convexity_check(const ControlBounds& bounds, double t) {
  for (const auto& q : bounds.q_p)
    if (bounds.q_e > q(t)) return false;
  return true;
}

}  // namespace hopf
