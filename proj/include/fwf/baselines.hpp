#pragma once

#include <optional>
#include <span>
#include <string_view>

#include <Eigen/Core>

#include "fwf/kernel_stats.hpp"
#include "fwf/signal_gen.hpp"

namespace fwf {

/// Linear FIR filter from the Toeplitz normal equations.
struct WienerModel {
    Eigen::VectorXd weights;
    double ridge = 0.0;
};

/// Builds R from the autocovariance and P from the cross-covariance of the
/// training windows and solves (R + ridge I) W = P. `ridge` defaults to
/// 1e-8 * trace(R) / L, escalated like the FWF weight solve.
WienerModel wiener_fit(const Dataset& data, std::optional<double> ridge = std::nullopt);

double wiener_predict(const WienerModel& m, std::span<const double> x);

enum class KafVariant { klms, krls, krr };

std::string_view to_string(KafVariant v);

/// Kernel expansion f(x) = sum_i coef_i G(center_i, x) over full windows.
struct KafModel {
    RowMatrix centers;
    Eigen::VectorXd coefficients;
    KernelWidth sigma;
    KafVariant variant;

    std::size_t size() const noexcept { return static_cast<std::size_t>(coefficients.size()); }
};

/// Single pass of kernel LMS: e_i = z_i - f_{i-1}(x_i), coef_i = eta * e_i.
/// Every sample becomes a center.
KafModel klms_fit(const Dataset& data, double eta, KernelWidth sigma);

/// Batch kernel RLS: coef = (K + lambda I)^-1 z via Cholesky of the Gram matrix.
KafModel krls_fit(const Dataset& data, double lambda, KernelWidth sigma);

/// Kernel ridge regression, same estimator as krls_fit but solved through an
/// LDLT factorization.
KafModel krr_fit(const Dataset& data, double lambda, KernelWidth sigma);

double kaf_predict(const KafModel& m, std::span<const double> x);

/// exp(-||a - b||^2 / 2 sigma^2).
double gaussian_window(std::span<const double> a, std::span<const double> b, KernelWidth w) noexcept;

}  // namespace fwf
