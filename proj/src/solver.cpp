#include "hopf/solver.hpp"

#include <cmath>
#include <stdexcept>

namespace hopf {
namespace {

// e^{-theta A} B column for one vehicle block is sigma * (e4 - theta e2),
// e^{-theta A} D is -e4 + theta e2; only rows 2 and 4 of each block are
// nonzero, filled directly below.
void fill_sample_rows(const SystemMatrices& m, double theta, int sample,
                      QuadratureGrid& g) {
  const int k = m.k;
  for (int i = 0; i < k; ++i) {
    const double sigma = aspect_sign(m.aspects[i]);
    const int row = sample * k + i;
    g.ep_t(row, 4 * i + 1) = -sigma * theta;
    g.ep_t(row, 4 * i + 3) = sigma;
    g.ee_t(sample, 4 * i + 1) = theta;
    g.ee_t(sample, 4 * i + 3) = -1.0;
  }
}

}  // namespace

QuadratureGrid build_quadrature_grid(const SystemMatrices& m,
                                     const ControlBounds& bounds, double t,
                                     double engagement_time,
                                     const QuadratureOptions& opts) {
  if (t < 0.0) throw std::invalid_argument("quadrature horizon must be >= 0");
  if (static_cast<int>(bounds.q_p.size()) != m.k)
    throw std::invalid_argument("one pursuer bound schedule per vehicle required");

  QuadratureGrid g;
  g.horizon = t;
  g.engagement_time = engagement_time;
  g.qe = bounds.q_e;
  if (t == 0.0) return g;  // empty grid: the integral vanishes at t = 0

  int n;
  if (opts.explicit_h > 0.0) {
    n = std::max(1, static_cast<int>(std::ceil(t / opts.explicit_h - 1e-12)));
  } else {
    n = std::max(64, static_cast<int>(std::ceil(t / 0.05)));
    n *= std::max(1, opts.refine);
  }
  g.h = t / n;

  const int k = m.k;
  g.samples.resize(n);
  g.ep_t = Eigen::MatrixXd::Zero(n * k, 4 * k);
  g.ee_t = Eigen::MatrixXd::Zero(n, 4 * k);
  g.qp_flat.resize(n * k);
  for (int j = 0; j < n; ++j) {
    const double s = j * g.h;
    const double theta = t - s;  // time remaining within the probe
    g.samples[j] = s;
    fill_sample_rows(m, theta, j, g);
    for (int i = 0; i < k; ++i)
      g.qp_flat[j * k + i] = bounds.q_p[i](engagement_time + theta);
  }
  return g;
}

TerminalCost build_terminal_cost(const SystemMatrices& m, const CaptureSet& set,
                                 double T) {
  if ((set.Wi_diag.array() <= 0.0).any())
    throw std::runtime_error("capture-set shape matrix must be positive definite");
  if (4 * m.k != set.Wi_diag.size())
    throw std::invalid_argument("capture set and system dimension mismatch");

  TerminalCost tc;
  tc.T = T;
  tc.eTA = expm_joint(m, T);
  tc.emTA = expm_joint(m, -T);
  tc.W_diag = set.Wi_diag;
  tc.W_inv_diag = set.Wi_inv_diag;
  tc.V0 = tc.eTA.transpose() * set.Wi_inv_diag.asDiagonal() * tc.eTA;
  tc.V0_inv = tc.emTA * set.Wi_diag.asDiagonal() * tc.emTA.transpose();
  return tc;
}

Eigen::VectorXd TerminalCost::apply_v0(const Eigen::VectorXd& x) const {
  return eTA.transpose() * W_inv_diag.cwiseProduct(eTA * x);
}

Eigen::VectorXd TerminalCost::apply_v0_inv(const Eigen::VectorXd& p) const {
  return emTA * W_diag.cwiseProduct(emTA.transpose() * p);
}

double TerminalCost::quad_v0(const Eigen::VectorXd& z) const {
  return W_inv_diag.cwiseProduct((eTA * z).cwiseAbs2()).sum();
}

double TerminalCost::quad_v0_inv(const Eigen::VectorXd& p) const {
  return W_diag.cwiseProduct((emTA.transpose() * p).cwiseAbs2()).sum();
}

double hamiltonian(const SystemMatrices& m, const ControlBounds& bounds,
                   const Eigen::VectorXd& p, double theta, double qp_time) {
  // B_hat' e^{-theta A_hat'} p, per vehicle: sigma * (p4 - theta p2).
  double pursuer = 0.0;
  double evader_arg = 0.0;
  for (int i = 0; i < m.k; ++i) {
    const double u = p[4 * i + 3] - theta * p[4 * i + 1];
    pursuer += bounds.q_p[i](qp_time) * std::abs(u);
    evader_arg += -u;
  }
  return pursuer - bounds.q_e * std::abs(evader_arg);
}

double hamiltonian_integral(const QuadratureGrid& grid, const Eigen::VectorXd& p) {
  if (grid.horizon > 0.0 && grid.n_samples() == 0)
    throw std::invalid_argument("empty quadrature grid over a nonzero horizon");
  if (grid.n_samples() == 0) return 0.0;
  const Eigen::VectorXd up = grid.ep_t * p;
  const Eigen::VectorXd ue = grid.ee_t * p;
  const double pursuer = grid.qp_flat.cwiseProduct(up.cwiseAbs()).sum();
  const double evader = grid.qe * ue.cwiseAbs().sum();
  return grid.h * (pursuer - evader);
}

double terminal_cost_conjugate(const TerminalCost& tc, const Eigen::VectorXd& p) {
  return 1.0 + 0.25 * tc.quad_v0_inv(p);
}

double hopf_objective(const TerminalCost& tc, const QuadratureGrid& grid,
                      const Eigen::VectorXd& p, const Eigen::VectorXd& z,
                      Eigen::VectorXd* gradient) {
  double value = 1.0 + 0.25 * tc.quad_v0_inv(p) - z.dot(p);
  if (gradient) *gradient = 0.5 * tc.apply_v0_inv(p) - z;

  if (grid.n_samples() > 0) {
    const Eigen::VectorXd up = grid.ep_t * p;
    const Eigen::VectorXd ue = grid.ee_t * p;
    value += grid.h * (grid.qp_flat.cwiseProduct(up.cwiseAbs()).sum() -
                       grid.qe * ue.cwiseAbs().sum());
    if (gradient) {
      const Eigen::VectorXd wp = grid.qp_flat.cwiseProduct(
          up.array().sign().matrix());
      *gradient += grid.h * (grid.ep_t.transpose() * wp -
                             grid.qe * (grid.ee_t.transpose() *
                                        ue.array().sign().matrix()));
    }
  } else if (grid.horizon > 0.0) {
    throw std::invalid_argument("empty quadrature grid over a nonzero horizon");
  }
  return value;
}

Eigen::MatrixXd hopf_hessian(const TerminalCost& tc) { return 0.5 * tc.V0_inv; }

HopfSolution minimize_hopf(const TerminalCost& tc, const QuadratureGrid& grid,
                           const Eigen::VectorXd& z, const NewtonOptions& opts) {
  HopfSolution sol;
  Eigen::VectorXd p = opts.initial_guess_scale * tc.apply_v0(z);
  Eigen::VectorXd grad(p.size()), trial(p.size());
  double value = hopf_objective(tc, grid, p, z, &grad);

  constexpr double kMinStep = 1.0 / (1 << 30);
  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    // Newton direction with the constant Hessian V0^-1/2: -2 V0 grad.
    const Eigen::VectorXd dir = -2.0 * tc.apply_v0(grad);
    sol.iterations = iter;
    if (dir.norm() <= opts.tolerance) {
      sol.final_step_norm = 0.0;
      sol.converged = true;
      break;
    }

    double alpha = 1.0;
    double trial_value = 0.0;
    bool moved = false;
    while (alpha >= kMinStep) {
      trial = p + alpha * dir;
      trial_value = hopf_objective(tc, grid, trial, z, nullptr);
      if (trial_value <= value) {
        moved = true;
        break;
      }
      alpha *= 0.5;  // direction kept fixed while halving
    }
    if (!moved) {
      // No descending step down a nonzero direction: the iterate is
      // untrustworthy and the caller must not treat phi as tight.
      sol.final_step_norm = 0.0;
      sol.converged = false;
      break;
    }

    p = trial;
    value = hopf_objective(tc, grid, p, z, &grad);
    sol.final_step_norm = alpha * dir.norm();
    if (sol.final_step_norm <= opts.tolerance) {
      sol.converged = true;
      break;
    }
  }

  sol.p_star = p;
  sol.value = -value;
  return sol;
}

}  // namespace hopf
