#pragma once

#include <Eigen/Core>

namespace fwf {

/// Solves (A + ridge * I) x = b by Cholesky factorization.
///
/// Throws ConditioningError carrying the smallest pivot when the shifted
/// matrix is not numerically positive definite, i.e. a pivot falls at or
/// below n * eps * max(diag).
Eigen::VectorXd solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double ridge = 0.0);

/// Default ridge: 1e-8 * trace(a) / n.
double default_ridge(const Eigen::MatrixXd& a);

struct RidgedSolution {
    Eigen::VectorXd x;
    double ridge;
};

/// solve_spd with default_ridge(a), retried with the ridge scaled by 10 up to
/// `max_steps` times while the factorization fails. The last ConditioningError
/// propagates when every step fails.
RidgedSolution solve_spd_default_ridge(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int max_steps = 6);

}  // namespace fwf
