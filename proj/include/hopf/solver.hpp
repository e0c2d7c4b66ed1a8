#pragma once

#include <Eigen/Dense>

#include "hopf/dynamics.hpp"

namespace hopf {

/// Quadrature controls for the Hamiltonian time integral. The rule is
/// left-endpoint rectangular with h = t / n_samples and
/// n_samples = refine * max(64, ceil(t / 0.05)), unless an explicit
/// step is requested.
struct QuadratureOptions {
  int refine = 1;
  double explicit_h = 0.0;  // > 0 overrides the sample-count rule
};

/// Precomputed integrand data over [0, t] for horizon T = t:
///   E_p(s) = e^{-(T-s) A_hat} B_hat,  E_e(s) = e^{-(T-s) A_hat} D_hat,
/// sampled at s_k = k h, stored as stacked transposes so one matrix
/// product evaluates every sample. Pursuer bounds are sampled at
/// engagement-absolute time t_now + (t - s_k).
struct QuadratureGrid {
  double h = 0.0;
  double horizon = 0.0;      // t (= T of the probe)
  double engagement_time = 0.0;
  Eigen::VectorXd samples;   // s_k, strictly increasing
  Eigen::MatrixXd ep_t;      // (n*k) x 4k, rows sample-major then vehicle
  Eigen::MatrixXd ee_t;      // n x 4k
  Eigen::VectorXd qp_flat;   // n*k, aligned with ep_t rows
  double qe = 0.0;

  int n_samples() const { return static_cast<int>(samples.size()); }
  int k() const {
    return n_samples() > 0 ? static_cast<int>(ep_t.rows()) / n_samples() : 0;
  }
};

QuadratureGrid build_quadrature_grid(const SystemMatrices& m,
                                     const ControlBounds& bounds, double t,
                                     double engagement_time = 0.0,
                                     const QuadratureOptions& opts = {});

/// Terminal-cost data for one capture set at horizon T:
///   V0     = e^{T A_hat'} W_i^-1 e^{T A_hat}
///   V0_inv = e^{-T A_hat} W_i  e^{-T A_hat'}
/// both exact closed forms (A_hat nilpotent), so V0 * V0_inv = I to
/// rounding. J_z(z) = <z, V0 z> - 1 is negative inside the target set.
/// The solver evaluates quadratic forms through the factors: the dense
/// products cancel badly once T^2 v_max^2 dwarfs r^2, while the
/// factored forms stay accurate at every horizon.
struct TerminalCost {
  double T = 0.0;
  Eigen::MatrixXd V0;
  Eigen::MatrixXd V0_inv;
  Eigen::MatrixXd eTA;       // e^{T A_hat}
  Eigen::MatrixXd emTA;      // e^{-T A_hat}
  Eigen::VectorXd W_diag;
  Eigen::VectorXd W_inv_diag;

  Eigen::VectorXd apply_v0(const Eigen::VectorXd& x) const;
  Eigen::VectorXd apply_v0_inv(const Eigen::VectorXd& p) const;
  double quad_v0(const Eigen::VectorXd& z) const;       // <z, V0 z>
  double quad_v0_inv(const Eigen::VectorXd& p) const;   // <p, V0^-1 p>
};

TerminalCost build_terminal_cost(const SystemMatrices& m, const CaptureSet& set,
                                 double T);

/// Game Hamiltonian  ||Q_p(.) B_hat' e^{-theta A_hat'} p||_1
///                 - ||Q_e   D_hat' e^{-theta A_hat'} p||_1
/// with theta = T - s; qp_time is the absolute time at which the
/// pursuer bounds are evaluated.
double hamiltonian(const SystemMatrices& m, const ControlBounds& bounds,
                   const Eigen::VectorXd& p, double theta, double qp_time);

/// h * sum_k H(p, s_k) over the grid.
double hamiltonian_integral(const QuadratureGrid& grid, const Eigen::VectorXd& p);

/// Fenchel conjugate of the quadratic terminal cost:
/// J*(p) = 1 + <p, V0^-1 p> / 4.
double terminal_cost_conjugate(const TerminalCost& tc, const Eigen::VectorXd& p);

/// Hopf objective J*(p) + integral of H - <z, p> and its gradient
/// (sgn(0) = 0 at integrand kinks).
double hopf_objective(const TerminalCost& tc, const QuadratureGrid& grid,
                      const Eigen::VectorXd& p, const Eigen::VectorXd& z,
                      Eigen::VectorXd* gradient = nullptr);

/// Constant Newton Hessian V0^-1 / 2, independent of p, z, t.
Eigen::MatrixXd hopf_hessian(const TerminalCost& tc);

struct NewtonOptions {
  double tolerance = 1e-6;  // iterate-change norm
  int max_iterations = 100;
  double initial_guess_scale = 2.0;  // p0 = scale * V0 * z
};

/// Result of one Hopf minimization. p_star is both the minimizer and
/// the value-function spatial gradient; value = phi(z, t).
struct HopfSolution {
  double value = 0.0;
  Eigen::VectorXd p_star;
  int iterations = 0;
  bool converged = false;
  double final_step_norm = 0.0;
};

/// Relaxed Newton on the Hopf objective: full step, halved on objective
/// increase without refreshing the direction, floor 2^-30.
HopfSolution minimize_hopf(const TerminalCost& tc, const QuadratureGrid& grid,
                           const Eigen::VectorXd& z,
                           const NewtonOptions& opts = {});

}  // namespace hopf
