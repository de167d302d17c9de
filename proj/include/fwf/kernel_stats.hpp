#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "fwf/signal_gen.hpp"

namespace fwf {

/// Width of the unnormalized Gaussian kernel exp(-(x-y)^2 / 2 sigma^2).
class KernelWidth {
public:
    explicit KernelWidth(double sigma);
    double sigma() const noexcept { return sigma_; }

private:
    double sigma_;
};

double gaussian(double x, double y, KernelWidth w) noexcept;

/// Non-negative distance d with gaussian(x, x - d) == g. Requires g in (0, 1].
double gaussian_inverse(double g, KernelWidth w);

enum class LagKind { correntropy, covariance, cross_correntropy, cross_covariance };

std::string_view to_string(LagKind kind);

/// Per-lag statistic, index tau = 0 .. L-1.
struct LagProfile {
    LagKind kind;
    Eigen::VectorXd values;

    std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
    double operator[](std::size_t tau) const { return values[static_cast<Eigen::Index>(tau)]; }
};

/// Symmetric L x L matrix of lag statistics.
class LagMatrix {
public:
    explicit LagMatrix(Eigen::MatrixXd entries);
    const Eigen::MatrixXd& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(entries_.rows()); }

private:
    Eigen::MatrixXd entries_;
};

// Series estimators. Every lag averages over all N - tau valid pairs.

LagProfile autocorrentropy(const Series& s, std::size_t order, KernelWidth w);
LagProfile crosscorrentropy(const Series& x, const Series& z, std::size_t order, KernelWidth w);
LagProfile autocovariance(const Series& s, std::size_t order);
LagProfile crosscovariance(const Series& x, const Series& z, std::size_t order);

// Dataset estimators used for training. Auto statistics are pooled over the
// contiguous runs of input samples covered by the windows (a single run gives
// exactly the series estimator on that stretch); cross statistics pair each
// target with the lags of its own window.

LagProfile autocorrentropy(const Dataset& d, KernelWidth w);
LagProfile crosscorrentropy(const Dataset& d, KernelWidth w);
LagProfile autocovariance(const Dataset& d);
LagProfile crosscovariance(const Dataset& d);

/// Row indices sorted by time index (stable). Sums over rows run in this
/// order so results do not depend on how the rows are arranged.
std::vector<std::size_t> time_order(const Dataset& d);

/// Input samples reconstructed from the windows, one vector per contiguous run
/// of time indices (rows are visited in time order).
std::vector<std::vector<double>> input_runs(const Dataset& d);

LagMatrix toeplitz(const LagProfile& profile);

/// Coefficient attached to the kernel section at time `time`.
struct WeightedSample {
    long long time;
    double coef;
};

/// sum_ij a_i b_j profile(|t_i - s_j|): the inner product of two kernel
/// expansions under a stationary lag profile.
double rkhs_inner(std::span<const WeightedSample> a, std::span<const WeightedSample> b,
                  const LagProfile& profile);

/// 1.06 * std * N^(-1/5).
KernelWidth silverman_sigma(const Series& s);
KernelWidth silverman_sigma(const Dataset& d);

}  // namespace fwf
