#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>

#include "nvgrad/error.hpp"

namespace nvgrad {

struct LeastSquaresOptions {
  int max_iterations = 200;
  /// Converged when the scaled step is below this fraction of the scaled parameter norm.
  double step_tolerance = 1e-10;
  double initial_damping = 1e-3;
};

struct LeastSquaresResult {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;  // s^2 (J^T J)^-1, s^2 = rss / (m - n)
  Eigen::VectorXd residuals;
  double rss = 0.0;
  int iterations = 0;

  Eigen::VectorXd standard_errors() const { return covariance.diagonal().cwiseSqrt(); }
};

/// Damped Gauss-Newton with Marquardt diagonal scaling.
///
/// `residuals(p)` returns the residual vector r(p), `jacobian(p)` returns dr/dp.
/// Throws NumericError when no convergence within `max_iterations`.
template <typename ResidualFn, typename JacobianFn>
LeastSquaresResult levenberg_marquardt(const ResidualFn& residuals, const JacobianFn& jacobian,
                                       Eigen::VectorXd params,
                                       const LeastSquaresOptions& options = {}) {
  const Eigen::Index n = params.size();
  Eigen::VectorXd r = residuals(params);
  const Eigen::Index m = r.size();
  if (m < n) throw NumericError("least squares: fewer residuals than parameters");
  if (!r.allFinite()) throw NumericError("least squares: non-finite residuals at the start point");

  double cost = r.squaredNorm();
  double damping = options.initial_damping;
  Eigen::MatrixXd jac = jacobian(params);
  bool converged = false;
  int it = 0;

  for (it = 1; it <= options.max_iterations && !converged; ++it) {
    const Eigen::MatrixXd normal = jac.transpose() * jac;
    const Eigen::VectorXd gradient = jac.transpose() * r;
    Eigen::VectorXd scale = normal.diagonal().cwiseMax(1e-300 + 1e-14 * normal.diagonal().maxCoeff());

    if (cost == 0.0 || gradient.cwiseAbs().maxCoeff() == 0.0) {
      converged = true;
      break;
    }

    bool accepted = false;
    Eigen::VectorXd step;
    while (!accepted) {
      Eigen::MatrixXd lhs = normal;
      lhs.diagonal() += damping * scale;
      step = lhs.ldlt().solve(-gradient);
      const Eigen::VectorXd trial = params + step;
      const Eigen::VectorXd r_trial = residuals(trial);
      const double cost_trial = r_trial.allFinite() ? r_trial.squaredNorm()
                                                    : std::numeric_limits<double>::infinity();
      if (cost_trial <= cost) {
        params = trial;
        r = r_trial;
        cost = cost_trial;
        damping = std::max(damping / 10.0, 1e-15);
        accepted = true;
      } else {
        damping *= 10.0;
        if (damping > 1e20) {
          // No descent direction left: we are at the minimum to working precision.
          converged = true;
          break;
        }
      }
    }
    if (!accepted) break;

    jac = jacobian(params);
    const double step_norm = scale.cwiseSqrt().cwiseProduct(step).norm();
    const double param_norm = scale.cwiseSqrt().cwiseProduct(params).norm();
    if (step_norm <= options.step_tolerance * (param_norm + options.step_tolerance)) converged = true;
  }
  if (!converged) throw NumericError("least squares: no convergence within the iteration limit");

  LeastSquaresResult result;
  result.params = params;
  result.residuals = r;
  result.rss = cost;
  result.iterations = it;
  const double dof = static_cast<double>(std::max<Eigen::Index>(m - n, 1));
  const Eigen::MatrixXd normal = jac.transpose() * jac;
  result.covariance = (cost / dof) * normal.completeOrthogonalDecomposition().pseudoInverse();
  return result;
}

}  // namespace nvgrad
