#include <doctest.h>

#include <cmath>
#include <random>

#include "hopf/reachability.hpp"

using namespace hopf;

namespace {

SolveContext oracle_context() {
  // Single tail-chase pursuer, pure lateral game: Q_p = 10, Q_e = 0,
  // r = 3, velocity slack effectively unbounded.
  SolveContext ctx;
  ctx.sys = build_single_system(EngagementAspect::TailChase);
  ctx.bounds.q_p = {BoundSchedule::constant(10.0)};
  ctx.bounds.q_e = 0.0;
  ctx.r = 3.0;
  ctx.v_max = 1e6;
  return ctx;
}

// Minimum time for a full-acceleration double integrator starting at
// rest to close a lateral gap to the capture radius.
double lateral_oracle_time(double y0, double r, double q) {
  return std::sqrt(2.0 * (y0 - r) / q);
}

SolveContext two_vehicle_context(double q_p, double q_e) {
  SolveContext ctx;
  ctx.sys = build_joint_system(
      {EngagementAspect::TailChase, EngagementAspect::TailChase});
  ctx.bounds.q_p = {BoundSchedule::constant(q_p), BoundSchedule::constant(q_p)};
  ctx.bounds.q_e = q_e;
  ctx.r = 3.0;
  ctx.v_max = 1000.0;
  return ctx;
}

}  // namespace

TEST_CASE("union over per-vehicle solves") {
  SUBCASE("k=1 union is the single value") {
    const auto ctx = oracle_context();
    Eigen::VectorXd x0(4);
    x0 << 0, 100, 0, 0;
    const UnionValue u = union_value(ctx, x0, 2.0);
    REQUIRE(u.phi_i.size() == 1);
    CHECK(u.phi == u.phi_i[0]);
    CHECK(u.argmin_index == 1);
  }
  SUBCASE("mirrored states give equal values") {
    const auto ctx = two_vehicle_context(10.0, 5.0);
    Eigen::VectorXd x0(8);
    x0 << -50, 80, 5, -3, -50, -80, 5, 3;
    const UnionValue u = union_value(ctx, x0, 3.0);
    CHECK(std::abs(u.phi_i[0] - u.phi_i[1]) <= 1e-9);
    CHECK(u.argmin_index == 1);  // ties resolve to the lowest index
  }
  SUBCASE("nearer vehicle attains the minimum") {
    const auto ctx = two_vehicle_context(10.0, 0.0);
    Eigen::VectorXd x0(8);
    x0 << 0, 100, 0, 0, 0, 200, 0, 0;
    const UnionValue u = union_value(ctx, x0, 3.0);
    CHECK(u.argmin_index == 1);
    CHECK(u.phi_i[0] < u.phi_i[1]);

    // Per-vehicle values match independent single solves.
    const auto grid = build_quadrature_grid(ctx.sys, ctx.bounds, 3.0);
    for (int i = 0; i < 2; ++i) {
      const auto set = build_capture_set(ctx.r, ctx.v_max, 2, i);
      const auto tc = build_terminal_cost(ctx.sys, set, 3.0);
      CHECK(u.phi_i[i] == minimize_hopf(tc, grid, x0, ctx.newton).value);
    }
  }
  SUBCASE("union is a lower bound of every branch") {
    const auto ctx = two_vehicle_context(8.0, 2.0);
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> upos(-300.0, 300.0);
    std::uniform_real_distribution<double> uvel(-30.0, 30.0);
    std::uniform_real_distribution<double> ut(0.5, 8.0);
    for (int n = 0; n < 20; ++n) {
      Eigen::VectorXd x0(8);
      for (int j = 0; j < 8; ++j) x0[j] = (j % 4 < 2) ? upos(rng) : uvel(rng);
      const UnionValue u = union_value(ctx, x0, ut(rng));
      for (const double phi : u.phi_i) CHECK(u.phi <= phi);
      CHECK(u.phi == *std::min_element(u.phi_i.begin(), u.phi_i.end()));
    }
  }
  SUBCASE("repeated evaluation is bitwise deterministic") {
    const auto ctx = two_vehicle_context(10.0, 5.0);
    Eigen::VectorXd x0(8);
    x0 << -40, 60, 2, -1, -40, -60, 2, 1;
    const UnionValue a = union_value(ctx, x0, 4.0);
    const UnionValue b = union_value(ctx, x0, 4.0);
    CHECK(a.phi == b.phi);
    CHECK(a.argmin_index == b.argmin_index);
    CHECK(a.phi_i == b.phi_i);
  }
}

TEST_CASE("minimum time to reach") {
  const auto ctx = oracle_context();

  SUBCASE("states already inside the capture set") {
    Eigen::VectorXd x0(4);
    x0 << 1, 0, 0, 0;
    const ReachResult r = min_time_to_reach(ctx, x0, 10.0);
    CHECK(r.reachable);
    CHECK(*r.t_star == 0.0);
    CHECK(r.phi_at_t_star < 0.0);
  }
  SUBCASE("lateral-offset oracle within one percent") {
    Eigen::VectorXd x0(4);
    x0 << 0, 100, 0, 0;
    const double expected = lateral_oracle_time(100.0, 3.0, 10.0);
    const ReachResult r = min_time_to_reach(ctx, x0, 40.0);
    REQUIRE(r.reachable);
    CHECK(std::abs(*r.t_star - expected) <= 0.01 * expected);
    CHECK(std::abs(r.phi_at_t_star) <= 1e-4);
    CHECK(r.active_vehicle == 1);
  }
  SUBCASE("quadrature refinement halves the bias consistently") {
    Eigen::VectorXd x0(4);
    x0 << 0, 100, 0, 0;
    const double expected = lateral_oracle_time(100.0, 3.0, 10.0);
    const double e1 = *min_time_to_reach(ctx, x0, 40.0).t_star - expected;
    SolveContext fine = ctx;
    fine.quad.refine = 2;
    const double e2 = *min_time_to_reach(fine, x0, 40.0).t_star - expected;
    CHECK(e1 > 0.0);
    CHECK(e2 > 0.0);
    CHECK(e2 / e1 >= 0.3);
    CHECK(e2 / e1 <= 0.7);
  }
  SUBCASE("horizon shorter than the oracle time is unreachable") {
    Eigen::VectorXd x0(4);
    x0 << 0, 100, 0, 0;
    const ReachResult r = min_time_to_reach(ctx, x0, 2.0);
    CHECK_FALSE(r.reachable);
    CHECK_FALSE(r.t_star.has_value());
    CHECK(r.phi_at_t_star > 0.0);
    CHECK(r.p_star.size() == 4);
  }
  SUBCASE("halving the scan step moves the root less than twice the tolerance") {
    Eigen::VectorXd x0(4);
    x0 << 0, 100, 0, 0;
    SolveContext halved = ctx;
    halved.search.scan_step = 0.05;
    const double t1 = *min_time_to_reach(ctx, x0, 40.0).t_star;
    const double t2 = *min_time_to_reach(halved, x0, 40.0).t_star;
    CHECK(std::abs(t1 - t2) <= 2.0 * ctx.search.bisect_tol);
  }
  SUBCASE("a hint window reproduces the cold search") {
    Eigen::VectorXd x0(4);
    x0 << 0, 100, 0, 0;
    const double cold = *min_time_to_reach(ctx, x0, 40.0).t_star;
    for (const double hint : {cold, cold - 0.2, cold + 0.25, 1.0, 20.0}) {
      const ReachResult r = min_time_to_reach(ctx, x0, 40.0, 0.0, hint);
      REQUIRE(r.reachable);
      CHECK(std::abs(*r.t_star - cold) <= 2.0 * ctx.search.bisect_tol);
    }
  }
}

TEST_CASE("control extraction") {
  const auto ctx = oracle_context();

  SUBCASE("sign case at full pursuer bound") {
    // Positive dual-norm argument; the minimizing player opposes it.
    Eigen::VectorXd p(4);
    p << 0, 0, 0, 2;
    const ControlPair c = extract_controls(ctx, p, 0.0, 0.0);
    CHECK(c.a_p[0] == -10.0);
  }
  SUBCASE("zero costate ties every channel to zero") {
    const ControlPair c = extract_controls(ctx, Eigen::VectorXd::Zero(4), 0.0, 0.0);
    CHECK(c.a_p[0] == 0.0);
    CHECK(c.a_e == 0.0);
  }
  SUBCASE("extracted pair reproduces the Hamiltonian gradient flow") {
    // e^{-theta A} B a_p + e^{-theta A} D a_e equals the negative of
    // grad_p H, the state velocity of the minimizing/maximizing pair.
    SolveContext ctx2 = two_vehicle_context(7.0, 3.0);
    ctx2.sys.aspects[1] = EngagementAspect::HeadOn;
    ctx2.sys = build_joint_system(ctx2.sys.aspects);
    std::mt19937 rng(43);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int n = 0; n < 30; ++n) {
      Eigen::VectorXd p(8);
      for (int j = 0; j < 8; ++j) p[j] = u(rng);
      const double theta = std::abs(u(rng));

      const Eigen::MatrixXd em = expm_joint(ctx2.sys, -theta);
      const Eigen::MatrixXd ep = em * ctx2.sys.B_hat;
      const Eigen::VectorXd ee = em * ctx2.sys.D_hat;
      const Eigen::VectorXd up = ep.transpose() * p;
      const double ue = ee.dot(p);
      if (up.cwiseAbs().minCoeff() < 1e-6 || std::abs(ue) < 1e-6) continue;

      Eigen::VectorXd grad_h = Eigen::VectorXd::Zero(8);
      for (int i = 0; i < 2; ++i)
        grad_h += ctx2.bounds.q_p[i](theta) * (up[i] > 0 ? 1.0 : -1.0) *
                  ep.col(i);
      grad_h -= ctx2.bounds.q_e * (ue > 0 ? 1.0 : -1.0) * ee;

      const ControlPair c = extract_controls(ctx2, p, theta, theta);
      const Eigen::VectorXd flow = ep * c.a_p + ee * c.a_e;
      CHECK((flow + grad_h).norm() <= 1e-9);
    }
  }
  SUBCASE("controls are bang-bang or exactly zero") {
    Eigen::VectorXd x0(4);
    x0 << 0, 100, 0, 0;
    const ReachResult r = min_time_to_reach(ctx, x0, 40.0);
    REQUIRE(r.reachable);
    const ControlPair c = extract_controls(ctx, r.p_star, 0.0, 0.0);
    CHECK((std::abs(c.a_p[0]) == 10.0 || c.a_p[0] == 0.0));
    CHECK(c.a_e == 0.0);  // q_e = 0
    // The offset is at +100 m, so the pursuer pushes the gap down.
    CHECK(c.a_p[0] == -10.0);
  }
}

TEST_CASE("convexity condition on the bound schedules") {
  ControlBounds bounds;
  bounds.q_p = {BoundSchedule::parabolic(40.0, 40.0)};
  bounds.q_e = 10.0;
  CHECK(convexity_check(bounds, 0.0));    // 40 >= 10
  CHECK(convexity_check(bounds, 20.0));   // boundary, non-strict
  CHECK_FALSE(convexity_check(bounds, 25.0));  // 5.625 < 10

  ControlBounds mixed;
  mixed.q_p = {BoundSchedule::constant(15.0), BoundSchedule::constant(9.0)};
  mixed.q_e = 10.0;
  CHECK_FALSE(convexity_check(mixed, 1.0));  // one pursuer below the evader
}
