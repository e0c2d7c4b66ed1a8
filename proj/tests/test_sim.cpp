#include <doctest.h>

#include <cmath>

#include "hopf/sim.hpp"

using namespace hopf;

namespace {

ScenarioConfig mini_chase() {
  // Fast single-pursuer tail chase with a maneuvering evader; closes
  // ~1000 m at ~205 m/s, so capture lands near five seconds.
  ScenarioConfig cfg;
  cfg.k = 1;
  cfg.init = {{-1000.0, 50.0, 0.0}};
  cfg.aspects = {EngagementAspect::TailChase};
  cfg.v_p = 255.225;
  cfg.v_e = 50.0;
  cfg.r = 3.0;
  cfg.v_max = 1000.0;
  cfg.bounds.q_p = {BoundSchedule::constant(30.0)};
  cfg.bounds.q_e = 5.0;
  cfg.horizon = 10.0;
  return cfg;
}

}  // namespace

TEST_CASE("nonlinear integration step") {
  SUBCASE("zero derivative is a fixed point") {
    const NonlinearState s{12.0, -7.0, 0.0};
    const NonlinearState n = integrate_nonlinear(s, 50.0, 50.0, 0.0, 0.0, 0.01);
    CHECK(n.dx == s.dx);
    CHECK(n.dy == s.dy);
    CHECK(n.dtheta == s.dtheta);
  }
  SUBCASE("single step against frozen hand values") {
    const NonlinearState s{-4000.0, 60.0, -0.015};
    const NonlinearState n =
        integrate_nonlinear(s, 255.225, 50.0, 0.0, 0.0, 1.0 / 120.0);
    CHECK(n.dx == doctest::Approx(-3998.290030935618).epsilon(1e-14));
    CHECK(n.dy == doctest::Approx(59.96809807135373).epsilon(1e-14));
    CHECK(n.dtheta == -0.015);
  }
  SUBCASE("halving the step shows first-order local error") {
    const NonlinearState s{-300.0, 40.0, 0.2};
    const auto run = [&](double dt, int steps) {
      NonlinearState x = s;
      for (int i = 0; i < steps; ++i)
        x = integrate_nonlinear(x, 255.225, 50.0, 20.0, -8.0, dt);
      return x;
    };
    const auto gap = [&](double dt) {
      const NonlinearState one = run(dt, 1);
      const NonlinearState two = run(dt / 2.0, 2);
      return std::hypot(one.dx - two.dx, one.dy - two.dy);
    };
    const double g1 = gap(0.04);
    const double g2 = gap(0.02);
    CHECK(g1 / g2 == doctest::Approx(4.0).epsilon(0.2));
  }
}

TEST_CASE("closed-loop equilibrium with zero authority") {
  ScenarioConfig cfg = mini_chase();
  cfg.v_p = 50.0;  // matched speeds, co-linear
  cfg.init = {{0.0, 50.0, 0.0}};
  cfg.bounds.q_p = {BoundSchedule::constant(0.0)};
  cfg.bounds.q_e = 0.0;
  cfg.horizon = 1.0;
  const auto [log, result] = run_closed_loop(cfg);
  CHECK_FALSE(result.captured);
  for (const auto& rec : log.steps) {
    CHECK(rec.truth[0].dx == 0.0);
    CHECK(rec.truth[0].dy == 50.0);
    CHECK(rec.a_p_achieved[0] == 0.0);
  }
}

TEST_CASE("closed-loop capture on the mini chase") {
  const ScenarioConfig cfg = mini_chase();
  const auto [log, result] = run_closed_loop(cfg);
  REQUIRE(result.captured);
  CHECK(result.capturing_vehicle == 1);
  CHECK(result.intercept_time > 4.0);
  CHECK(result.intercept_time < 6.5);
  CHECK(result.miss_distance <= cfg.r);

  SUBCASE("timestamps are uniform at the integration rate") {
    const double dt = 1.0 / cfg.rate;
    for (std::size_t n = 0; n < log.steps.size(); ++n)
      CHECK(std::abs(log.steps[n].t - n * dt) <= 1e-12);
  }
  SUBCASE("capture flag is consistent with the logged separations") {
    double min_sep = std::numeric_limits<double>::infinity();
    for (const auto& rec : log.steps)
      min_sep = std::min(min_sep, std::hypot(rec.truth[0].dx, rec.truth[0].dy));
    CHECK((min_sep <= cfg.r) == result.captured);
  }
  SUBCASE("guidance stays in hopf mode on this geometry") {
    int hopf = 0;
    for (const auto& rec : log.steps)
      hopf += rec.mode[0] == GuidanceMode::Hopf;
    CHECK(hopf > static_cast<int>(log.steps.size()) * 9 / 10);
  }
  SUBCASE("achieved accelerations respect the bound with small transients") {
    for (const auto& rec : log.steps)
      CHECK(std::abs(rec.a_p_achieved[0]) <= 30.0 * 1.05);
  }
}

TEST_CASE("inertial reconstruction") {
  SUBCASE("unforced evader runs straight down its initial heading") {
    ScenarioConfig cfg = mini_chase();
    cfg.bounds.q_e = 0.0;
    cfg.horizon = 2.0;
    auto [log, result] = run_closed_loop(cfg);
    REQUIRE(log.inertial_filled);
    const auto& last = log.steps.back();
    CHECK(last.evader_y == 0.0);
    CHECK(last.evader_x == doctest::Approx(50.0 * last.t).epsilon(1e-12));
    CHECK(last.evader_heading == 0.0);
  }
  SUBCASE("constant evader turn traces a circle of radius v^2 / a") {
    // Zero pursuer authority plus an inflated evader bound keeps the
    // run in PN mode, so the evader holds no command; instead check the
    // kinematics directly through a synthetic log.
    ScenarioConfig cfg = mini_chase();
    cfg.horizon = 5.0;
    TrajectoryLog log;
    const double dt = 1.0 / cfg.rate;
    for (int n = 0; n <= 5 * 120; ++n) {
      StepRecord rec;
      rec.t = n * dt;
      rec.truth = {{0.0, 0.0, 0.0}};
      rec.linear = {{0.0, 0.0, 0.0, 0.0}};
      rec.a_p_cmd = Eigen::VectorXd::Zero(1);
      rec.a_p_achieved = Eigen::VectorXd::Zero(1);
      rec.a_e = 10.0;
      rec.mode = {GuidanceMode::PN};
      log.steps.push_back(rec);
    }
    reconstruct_inertial(log, cfg);
    const double radius = cfg.v_e * cfg.v_e / 10.0;  // 250 m
    for (const auto& rec : log.steps) {
      const double d =
          std::hypot(rec.evader_x - 0.0, rec.evader_y - radius) - radius;
      CHECK(std::abs(d) <= 0.01 * radius);
    }
  }
  SUBCASE("independent vehicle integration matches the relative log") {
    // Route-two oracle: integrate the pursuer's own Dubins kinematics
    // from the logged achieved accelerations and compare separations.
    const ScenarioConfig cfg = mini_chase();
    auto [log, result] = run_closed_loop(cfg);
    REQUIRE(result.captured);

    const double dt = 1.0 / cfg.rate;
    double theta_e = 0.0, theta_p = log.steps.front().truth[0].dtheta;
    Eigen::Vector2d pe(0.0, 0.0);
    Eigen::Vector2d pp(log.steps.front().truth[0].dx,
                       log.steps.front().truth[0].dy);
    double sum_sq = 0.0, ref_sq = 0.0;
    for (const auto& rec : log.steps) {
      const double sep_log = std::hypot(rec.truth[0].dx, rec.truth[0].dy);
      const double sep_ind = (pp - pe).norm();
      sum_sq += (sep_log - sep_ind) * (sep_log - sep_ind);
      ref_sq += sep_log * sep_log;
      pe += dt * cfg.v_e * Eigen::Vector2d(std::cos(theta_e), std::sin(theta_e));
      theta_e += dt * rec.a_e / cfg.v_e;
      pp += dt * cfg.v_p * Eigen::Vector2d(std::cos(theta_p), std::sin(theta_p));
      theta_p += dt * rec.a_p_achieved[0] / cfg.v_p;
    }
    CHECK(std::sqrt(sum_sq / ref_sq) <= 0.01);
  }
  SUBCASE("empty logs are rejected") {
    TrajectoryLog log;
    CHECK_THROWS_AS(reconstruct_inertial(log, mini_chase()), std::runtime_error);
  }
}

TEST_CASE("miss distance") {
  SUBCASE("single sample is the plain norm") {
    TrajectoryLog log;
    StepRecord rec;
    rec.truth = {{3.0, 4.0, 0.0}};
    log.steps.push_back(rec);
    CHECK(miss_distance(log) == doctest::Approx(5.0));
  }
  SUBCASE("sampled flyby recovers the true closest approach") {
    // Straight relative path offset 10 m, 300 m/s, sampled at 120 Hz;
    // the interpolated minimum must not inherit the sampling error.
    TrajectoryLog log;
    const double dt = 1.0 / 120.0;
    for (int n = 0; n < 1200; ++n) {
      StepRecord rec;
      rec.t = n * dt;
      rec.truth = {{-1500.0 + 300.0 * n * dt, 10.0, 0.0}};
      log.steps.push_back(rec);
    }
    CHECK(miss_distance(log) == doctest::Approx(10.0).epsilon(0.005));
    CHECK(std::abs(miss_distance(log) - 10.0) <= 0.05);
  }
  SUBCASE("captured runs report at most the capture radius") {
    const auto [log, result] = run_closed_loop(mini_chase());
    REQUIRE(result.captured);
    CHECK(miss_distance(log) <= 3.0);
  }
  SUBCASE("empty logs are rejected") {
    TrajectoryLog log;
    CHECK_THROWS_AS(miss_distance(log), std::invalid_argument);
  }
}

TEST_CASE("scenario validation collects every violation") {
  ScenarioConfig cfg = mini_chase();
  cfg.r = -1.0;
  cfg.rate = 0.0;
  const auto errors = cfg.validate();
  CHECK(errors.size() == 2);
  CHECK_THROWS_AS(run_closed_loop(cfg), std::invalid_argument);
}
