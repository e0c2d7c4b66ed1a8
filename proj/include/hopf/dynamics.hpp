#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace hopf {

/// Relative planar state of one pursuer in the evader-carried frame:
/// downrange/crossrange displacement and relative heading.
struct NonlinearState {
  double dx = 0.0;      // m
  double dy = 0.0;      // m
  double dtheta = 0.0;  // rad, wrapped to (-pi, pi]
};

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// Linear-model state of one pursuer: [dx, dy, dvx, dvy].
struct RelativeState {
  double dx = 0.0;   // m
  double dy = 0.0;   // m
  double dvx = 0.0;  // m/s
  double dvy = 0.0;  // m/s

  Eigen::Vector4d vec() const { return {dx, dy, dvx, dvy}; }
  static RelativeState from_vec(const Eigen::Vector4d& v) {
    return {v[0], v[1], v[2], v[3]};
  }
};

/// Stacked game state chi in R^{4k}, k >= 1.
struct JointState {
  int k = 0;
  Eigen::VectorXd chi;

  RelativeState vehicle(int i) const;  // i in [0, k)
  static JointState from_vehicles(const std::vector<RelativeState>& v);
};

enum class EngagementAspect { TailChase, HeadOn };

/// Input-column sign of the aspect: +1 tail-chase, -1 head-on.
inline double aspect_sign(EngagementAspect a) {
  return a == EngagementAspect::TailChase ? 1.0 : -1.0;
}

/// Per-vehicle and block-joint system matrices. A has the two-block
/// form [[0, I], [0, 0]] and is nilpotent of index 2, as is A_hat.
struct SystemMatrices {
  int k = 1;
  std::vector<EngagementAspect> aspects;
  Eigen::Matrix4d A;
  Eigen::Vector4d B;  // aspect sign of vehicle 0 when k == 1
  Eigen::Vector4d D;
  Eigen::MatrixXd A_hat;  // 4k x 4k
  Eigen::MatrixXd B_hat;  // 4k x k
  Eigen::VectorXd D_hat;  // 4k
};

SystemMatrices build_single_system(EngagementAspect aspect);
SystemMatrices build_joint_system(const std::vector<EngagementAspect>& aspects);

/// Time-varying symmetric control bound for one pursuer. Forms:
/// constant, piecewise-linear table, or parabolic (t - t0)^2 / scale
/// (zero after t0, matching a bound that decays to zero at t0).
class BoundSchedule {
 public:
  static BoundSchedule constant(double c);
  static BoundSchedule table(std::vector<std::pair<double, double>> pts);
  static BoundSchedule parabolic(double t0, double scale);

  double operator()(double t) const;

  enum class Kind { Constant, Table, Parabolic };
  Kind kind() const { return kind_; }
  double constant_value() const { return c_; }
  double parab_t0() const { return t0_; }
  double parab_scale() const { return scale_; }
  const std::vector<std::pair<double, double>>& table_points() const { return pts_; }

 private:
  Kind kind_ = Kind::Constant;
  double c_ = 0.0;
  double t0_ = 0.0, scale_ = 1.0;
  std::vector<std::pair<double, double>> pts_;
};

/// Symmetric box bounds: per-pursuer |a_p,i| <= q_p[i](t), |a_e| <= q_e.
struct ControlBounds {
  std::vector<BoundSchedule> q_p;
  double q_e = 0.0;
};

/// Ellipsoidal capture set for vehicle i of k: position within radius r,
/// velocity within v_max. W_i is block diagonal with W on block i and
/// Sigma = v_max^2 * I on the remaining blocks.
struct CaptureSet {
  int k = 1;
  int vehicle = 0;  // 0-based block index
  double r = 0.0;
  double v_max = 0.0;
  Eigen::Vector4d W_diag;        // diag of the single-vehicle W
  Eigen::VectorXd Wi_diag;       // diag of the 4k x 4k joint W_i
  Eigen::VectorXd Wi_inv_diag;

  /// Quadratic membership value <chi, W_i^-1 chi>; inside iff <= 1.
  double membership(const Eigen::VectorXd& chi) const;
};

CaptureSet build_capture_set(double r, double v_max, int k, int vehicle);

/// Eq-of-motion right-hand side of the relative Dubins pair.
NonlinearState nonlinear_derivative(const NonlinearState& s, double v_p,
                                    double v_e, double a_p, double a_e);

/// e^{t A_hat} = I + t A_hat exactly (A_hat is nilpotent); t may be negative.
Eigen::MatrixXd expm_joint(const SystemMatrices& m, double t);

/// z = e^{-t A_hat} x and its inverse.
Eigen::VectorXd transform_to_z(const Eigen::VectorXd& x, double t,
                               const SystemMatrices& m);
Eigen::VectorXd transform_to_x(const Eigen::VectorXd& z, double t,
                               const SystemMatrices& m);

namespace debug {
/// General scaling-and-squaring matrix exponential, for cross-checking
/// the closed-form path only.
Eigen::MatrixXd expm_general(const Eigen::MatrixXd& m);
}  // namespace debug

}  // namespace hopf
