#include "fwf/linalg.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <fmt/format.h>

#include "fwf/errors.hpp"

namespace fwf {

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double ridge) {
    if (a.rows() != a.cols() || a.rows() != b.size()) {
        throw DimensionError(fmt::format("system is {}x{} but right-hand side has {} entries", a.rows(),
                                         a.cols(), b.size()));
    }
    if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
        throw ParameterError(fmt::format("ridge must be non-negative and finite (got {})", ridge));
    }
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() += ridge;

    const double scale = shifted.diagonal().cwiseAbs().maxCoeff();
    const double threshold = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * scale;

    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() != Eigen::Success) {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(shifted);
        const double pivot = ldlt.vectorD().minCoeff();
        throw ConditioningError(
            pivot, fmt::format("matrix (+ ridge {:g}) is not positive definite; smallest pivot {:.3e}; "
                               "increase the ridge",
                               ridge, pivot));
    }
    const Eigen::VectorXd pivots = llt.matrixLLT().diagonal().array().square();
    const double smallest = pivots.minCoeff();
    if (!(smallest > threshold)) {
        throw ConditioningError(
            smallest, fmt::format("matrix (+ ridge {:g}) is numerically singular; smallest pivot {:.3e} "
                                  "(threshold {:.3e}); increase the ridge",
                                  ridge, smallest, threshold));
    }
    return llt.solve(b);
}

double default_ridge(const Eigen::MatrixXd& a) {
    if (a.rows() == 0) return 0.0;
    return 1e-8 * a.trace() / static_cast<double>(a.rows());
}

RidgedSolution solve_spd_default_ridge(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int max_steps) {
    double ridge = default_ridge(a);
    for (int step = 0;; ++step) {
        try {
            return {solve_spd(a, b, ridge), ridge};
        } catch (const ConditioningError&) {
            if (step >= max_steps || !(ridge > 0.0)) throw;
        }
        ridge *= 10.0;
    }
}

}  // namespace fwf
