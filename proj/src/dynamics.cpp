#include "hopf/dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace hopf {

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  if (a > M_PI) a -= 2.0 * M_PI;
  return a;
}

RelativeState JointState::vehicle(int i) const {
  return RelativeState::from_vec(chi.segment<4>(4 * i));
}

JointState JointState::from_vehicles(const std::vector<RelativeState>& v) {
  JointState s;
  s.k = static_cast<int>(v.size());
  s.chi.resize(4 * s.k);
  for (int i = 0; i < s.k; ++i) s.chi.segment<4>(4 * i) = v[i].vec();
  return s;
}

SystemMatrices build_single_system(EngagementAspect aspect) {
  return build_joint_system({aspect});
}

SystemMatrices build_joint_system(const std::vector<EngagementAspect>& aspects) {
  if (aspects.empty())
    throw std::invalid_argument("joint system needs at least one pursuer");

  SystemMatrices m;
  m.k = static_cast<int>(aspects.size());
  m.aspects = aspects;

  m.A.setZero();
  m.A(0, 2) = 1.0;
  m.A(1, 3) = 1.0;
  m.B = Eigen::Vector4d(0, 0, 0, aspect_sign(aspects[0]));
  m.D = Eigen::Vector4d(0, 0, 0, -1.0);

  const int n = 4 * m.k;
  m.A_hat = Eigen::MatrixXd::Zero(n, n);
  m.B_hat = Eigen::MatrixXd::Zero(n, m.k);
  m.D_hat = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m.k; ++i) {
    m.A_hat.block<4, 4>(4 * i, 4 * i) = m.A;
    m.B_hat(4 * i + 3, i) = aspect_sign(aspects[i]);
    m.D_hat(4 * i + 3) = -1.0;
  }
  return m;
}

BoundSchedule BoundSchedule::constant(double c) {
  if (c < 0.0) throw std::invalid_argument("control bound must be >= 0");
  BoundSchedule b;
  b.kind_ = Kind::Constant;
  b.c_ = c;
  return b;
}

BoundSchedule BoundSchedule::table(std::vector<std::pair<double, double>> pts) {
  if (pts.size() < 2)
    throw std::invalid_argument("bound table needs at least two points");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].second < 0.0)
      throw std::invalid_argument("bound table values must be >= 0");
    if (i > 0 && pts[i].first <= pts[i - 1].first)
      throw std::invalid_argument("bound table times must be increasing");
  }
  BoundSchedule b;
  b.kind_ = Kind::Table;
  b.pts_ = std::move(pts);
  return b;
}

BoundSchedule BoundSchedule::parabolic(double t0, double scale) {
  if (scale <= 0.0) throw std::invalid_argument("parabolic scale must be > 0");
  BoundSchedule b;
  b.kind_ = Kind::Parabolic;
  b.t0_ = t0;
  b.scale_ = scale;
  return b;
}

double BoundSchedule::operator()(double t) const {
  switch (kind_) {
    case Kind::Constant:
      return c_;
    case Kind::Parabolic:
      if (t >= t0_) return 0.0;
      return (t - t0_) * (t - t0_) / scale_;
    case Kind::Table: {
      if (t <= pts_.front().first) return pts_.front().second;
      if (t >= pts_.back().first) return pts_.back().second;
      for (std::size_t i = 1; i < pts_.size(); ++i) {
        if (t <= pts_[i].first) {
          const auto& [t0, v0] = pts_[i - 1];
          const auto& [t1, v1] = pts_[i];
          return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
        }
      }
      return pts_.back().second;
    }
  }
  return 0.0;
}

double CaptureSet::membership(const Eigen::VectorXd& chi) const {
  return chi.dot(Wi_inv_diag.cwiseProduct(chi));
}

CaptureSet build_capture_set(double r, double v_max, int k, int vehicle) {
  if (r <= 0.0) throw std::invalid_argument("capture radius must be > 0");
  if (v_max <= 0.0) throw std::invalid_argument("v_max must be > 0");
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (vehicle < 0 || vehicle >= k)
    throw std::invalid_argument("capture-set vehicle index out of range");

  CaptureSet c;
  c.k = k;
  c.vehicle = vehicle;
  c.r = r;
  c.v_max = v_max;
  c.W_diag = Eigen::Vector4d(r * r, r * r, v_max * v_max, v_max * v_max);
  c.Wi_diag = Eigen::VectorXd::Constant(4 * k, v_max * v_max);
  c.Wi_diag.segment<4>(4 * vehicle) = c.W_diag;
  c.Wi_inv_diag = c.Wi_diag.cwiseInverse();
  return c;
}

NonlinearState nonlinear_derivative(const NonlinearState& s, double v_p,
                                    double v_e, double a_p, double a_e) {
  if (v_p <= 0.0 || v_e <= 0.0)
    throw std::domain_error("vehicle speeds must be positive");
  NonlinearState d;
  d.dx = v_p * std::cos(s.dtheta) - v_e + s.dy * a_e / v_e;
  d.dy = v_p * std::sin(s.dtheta) - s.dx * a_e / v_e;
  d.dtheta = a_p / v_p - a_e / v_e;
  return d;
}

Eigen::MatrixXd expm_joint(const SystemMatrices& m, double t) {
  const int n = 4 * m.k;
  return Eigen::MatrixXd::Identity(n, n) + t * m.A_hat;
}

Eigen::VectorXd transform_to_z(const Eigen::VectorXd& x, double t,
                               const SystemMatrices& m) {
  return x - t * (m.A_hat * x);
}

Eigen::VectorXd transform_to_x(const Eigen::VectorXd& z, double t,
                               const SystemMatrices& m) {
  return z + t * (m.A_hat * z);
}

namespace debug {
Eigen::MatrixXd expm_general(const Eigen::MatrixXd& m) { return m.exp(); }
}  // namespace debug

}  // namespace hopf
