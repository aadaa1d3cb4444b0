#pragma once

#include <cmath>
#include <functional>

#include <Eigen/Dense>

namespace qpsim::detail {

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct LeastSquaresResult {
  Eigen::VectorXd x;
  Eigen::VectorXd residual;
  Eigen::MatrixXd jacobian;  // at x
  double cost = 0.0;         // 0.5 * |r|^2
  int iterations = 0;
  bool converged = false;
};

// Central-difference Jacobian of `f` at x.
inline Eigen::MatrixXd numeric_jacobian(const ResidualFn& f, const Eigen::VectorXd& x, Eigen::Index m) {
  Eigen::MatrixXd jac(m, x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(k)));
    probe(k) = x(k) + h;
    const Eigen::VectorXd up = f(probe);
    probe(k) = x(k) - h;
    const Eigen::VectorXd down = f(probe);
    probe(k) = x(k);
    jac.col(k) = (up - down) / (2.0 * h);
  }
  return jac;
}

// Levenberg-Marquardt with Marquardt diagonal scaling and finite-difference
// Jacobians. Stops on small relative cost decrease, small step, or when the
// cost drops below `cost_floor`.
inline LeastSquaresResult levenberg_marquardt(const ResidualFn& f, Eigen::VectorXd x, int max_iterations,
                                              double cost_floor = 0.0) {
  LeastSquaresResult out;
  Eigen::VectorXd r = f(x);
  double cost = 0.5 * r.squaredNorm();
  double lambda = 1e-3;
  Eigen::MatrixXd jac = numeric_jacobian(f, x, r.size());
  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    if (cost <= cost_floor) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() < 1e-15) {
      out.converged = true;
      break;
    }
    bool accepted = false;
    for (int attempt = 0; attempt < 30; ++attempt) {
      Eigen::MatrixXd damped = jtj;
      for (Eigen::Index k = 0; k < damped.rows(); ++k) damped(k, k) += lambda * std::max(jtj(k, k), 1e-12);
      const Eigen::VectorXd step = damped.ldlt().solve(-grad);
      const Eigen::VectorXd trial = x + step;
      const Eigen::VectorXd r_trial = f(trial);
      const double cost_trial = 0.5 * r_trial.squaredNorm();
      if (std::isfinite(cost_trial) && cost_trial < cost) {
        const double decrease = cost - cost_trial;
        x = trial;
        r = r_trial;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        const bool tiny_step = step.norm() < 1e-14 * (1.0 + x.norm());
        const bool tiny_decrease = decrease < 1e-15 * cost;
        cost = cost_trial;
        jac = numeric_jacobian(f, x, r.size());
        if (tiny_step || tiny_decrease) {
          out.converged = true;
          iter = max_iterations;  // leave the outer loop
        }
        break;
      }
      lambda *= 4.0;
    }
    if (!accepted) {
      out.converged = true;  // no descent direction left at this scale
      break;
    }
  }
  out.x = std::move(x);
  out.residual = std::move(r);
  out.jacobian = std::move(jac);
  out.cost = cost;
  out.iterations = std::min(iter, max_iterations);
  return out;
}

}  // namespace qpsim::detail
