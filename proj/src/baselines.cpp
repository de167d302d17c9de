#include "fwf/baselines.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <fmt/format.h>

#include "fwf/errors.hpp"
#include "fwf/linalg.hpp"

namespace fwf {

WienerModel wiener_fit(const Dataset& data, std::optional<double> ridge) {
    if (data.empty()) throw DimensionError("cannot fit on an empty dataset");
    const LagMatrix r = toeplitz(autocovariance(data));
    const LagProfile p = crosscovariance(data);
    if (ridge) return {solve_spd(r.entries(), p.values, *ridge), *ridge};
    RidgedSolution sol = solve_spd_default_ridge(r.entries(), p.values);
    return {std::move(sol.x), sol.ridge};
}

double wiener_predict(const WienerModel& m, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(m.weights.size())) {
        throw DimensionError(fmt::format("window has length {} but the filter has {} taps", x.size(),
                                         m.weights.size()));
    }
    double acc = 0.0;
    for (std::size_t tau = 0; tau < x.size(); ++tau) acc += m.weights[static_cast<Eigen::Index>(tau)] * x[tau];
    return acc;
}

std::string_view to_string(KafVariant v) {
    switch (v) {
        case KafVariant::klms: return "klms";
        case KafVariant::krls: return "krls";
        case KafVariant::krr: return "krr";
    }
    return "unknown";
}

double gaussian_window(std::span<const double> a, std::span<const double> b, KernelWidth w) noexcept {
    double d2 = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        d2 += d * d;
    }
    return std::exp(-d2 / (2.0 * w.sigma() * w.sigma()));
}

KafModel klms_fit(const Dataset& data, double eta, KernelWidth sigma) {
    if (!(eta >= 0.0) || !std::isfinite(eta)) {
        throw ParameterError(fmt::format("eta must be non-negative and finite (got {})", eta));
    }
    const std::size_t n = data.rows();
    Eigen::VectorXd coef(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = data.window(i);
        double f = 0.0;
        for (std::size_t j = 0; j < i; ++j) {
            f += coef[static_cast<Eigen::Index>(j)] * gaussian_window(data.window(j), x, sigma);
        }
        coef[static_cast<Eigen::Index>(i)] = eta * (data.target(i) - f);
    }
    return {data.windows(), std::move(coef), sigma, KafVariant::klms};
}

namespace {

Eigen::MatrixXd gram(const Dataset& data, KernelWidth sigma, double lambda) {
    const auto n = static_cast<Eigen::Index>(data.rows());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = 1.0 + lambda;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double g = gaussian_window(data.window(static_cast<std::size_t>(i)),
                                             data.window(static_cast<std::size_t>(j)), sigma);
            k(i, j) = g;
            k(j, i) = g;
        }
    }
    return k;
}

void check_lambda(double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw ParameterError(fmt::format("lambda must be non-negative and finite (got {})", lambda));
    }
}

}  // namespace

KafModel krls_fit(const Dataset& data, double lambda, KernelWidth sigma) {
    check_lambda(lambda);
    if (data.empty()) throw DimensionError("cannot fit on an empty dataset");
    Eigen::VectorXd coef = solve_spd(gram(data, sigma, 0.0), data.targets(), lambda);
    return {data.windows(), std::move(coef), sigma, KafVariant::krls};
}

KafModel krr_fit(const Dataset& data, double lambda, KernelWidth sigma) {
    check_lambda(lambda);
    if (data.empty()) throw DimensionError("cannot fit on an empty dataset");
    const Eigen::MatrixXd k = gram(data, sigma, lambda);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(k);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) {
        const double pivot = ldlt.vectorD().minCoeff();
        throw ConditioningError(pivot, fmt::format("Gram matrix + lambda I is not positive definite; "
                                                   "smallest pivot {:.3e}",
                                                   pivot));
    }
    Eigen::VectorXd coef = ldlt.solve(data.targets());
    return {data.windows(), std::move(coef), sigma, KafVariant::krr};
}

double kaf_predict(const KafModel& m, std::span<const double> x) {
    if (m.size() == 0) return 0.0;
    if (x.size() != static_cast<std::size_t>(m.centers.cols())) {
        throw DimensionError(fmt::format("window has length {} but centers have {} lags", x.size(),
                                         m.centers.cols()));
    }
    const std::size_t order = x.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        acc += m.coefficients[static_cast<Eigen::Index>(i)] *
               gaussian_window({m.centers.data() + i * order, order}, x, m.sigma);
    }
    return acc;
}

}  // namespace fwf
