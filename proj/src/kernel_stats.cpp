#include "fwf/kernel_stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include <fmt/format.h>

#include "fwf/errors.hpp"

namespace fwf {

KernelWidth::KernelWidth(double sigma) : sigma_(sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw ParameterError(fmt::format("kernel width must be positive and finite (got {})", sigma));
    }
}

double gaussian(double x, double y, KernelWidth w) noexcept {
    const double d = x - y;
    return std::exp(-(d * d) / (2.0 * w.sigma() * w.sigma()));
}

double gaussian_inverse(double g, KernelWidth w) {
    if (!(g > 0.0) || !(g <= 1.0)) {
        throw DomainError(fmt::format("gaussian_inverse needs g in (0, 1], got {}", g));
    }
    return w.sigma() * std::sqrt(2.0 * std::log(1.0 / g));
}

std::string_view to_string(LagKind kind) {
    switch (kind) {
        case LagKind::correntropy: return "correntropy";
        case LagKind::covariance: return "covariance";
        case LagKind::cross_correntropy: return "cross_correntropy";
        case LagKind::cross_covariance: return "cross_covariance";
    }
    return "unknown";
}

LagMatrix::LagMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) throw DimensionError("lag matrix must be square");
}

namespace {

void check_order(std::size_t len, std::size_t order) {
    if (order == 0) throw ParameterError("order must be at least 1");
    if (len < order + 1) {
        throw DimensionError(
            fmt::format("series of length {} is too short for {} lags (need > {})", len, order, order));
    }
}

void check_aligned(const Series& x, const Series& z) {
    if (x.size() != z.size()) {
        throw AlignmentError(
            fmt::format("cross statistics need aligned series ({} vs {} samples)", x.size(), z.size()));
    }
}

// (1/(N - tau)) sum_{t >= tau} f(z[t], x[t - tau])
template <typename F>
LagProfile lag_average(const std::vector<double>& x, const std::vector<double>& z, std::size_t order,
                       LagKind kind, F f) {
    const std::size_t n = x.size();
    Eigen::VectorXd out(static_cast<Eigen::Index>(order));
    for (std::size_t tau = 0; tau < order; ++tau) {
        double acc = 0.0;
        for (std::size_t t = tau; t < n; ++t) acc += f(z[t], x[t - tau]);
        out[static_cast<Eigen::Index>(tau)] = acc / static_cast<double>(n - tau);
    }
    return {kind, std::move(out)};
}

template <typename F>
LagProfile pooled_auto(const Dataset& d, LagKind kind, F f) {
    if (d.empty()) throw DimensionError("dataset is empty");
    const std::size_t order = d.order();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(order));
    std::vector<double> count(order, 0.0);
    for (const auto& run : input_runs(d)) {
        const std::size_t n = run.size();
        for (std::size_t tau = 0; tau < order && tau < n; ++tau) {
            double acc = 0.0;
            for (std::size_t t = tau; t < n; ++t) acc += f(run[t], run[t - tau]);
            sum[static_cast<Eigen::Index>(tau)] += acc;
            count[tau] += static_cast<double>(n - tau);
        }
    }
    for (std::size_t tau = 0; tau < order; ++tau) sum[static_cast<Eigen::Index>(tau)] /= count[tau];
    return {kind, std::move(sum)};
}

template <typename F>
LagProfile pooled_cross(const Dataset& d, LagKind kind, F f) {
    if (d.empty()) throw DimensionError("dataset is empty");
    const std::size_t order = d.order();
    const std::vector<std::size_t> rows = time_order(d);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(order));
    for (std::size_t tau = 0; tau < order; ++tau) {
        double acc = 0.0;
        for (std::size_t i : rows) acc += f(d.target(i), d.window(i)[tau]);
        out[static_cast<Eigen::Index>(tau)] = acc / static_cast<double>(rows.size());
    }
    return {kind, std::move(out)};
}

}  // namespace

LagProfile autocorrentropy(const Series& s, std::size_t order, KernelWidth w) {
    check_order(s.size(), order);
    auto p = lag_average(s.values(), s.values(), order, LagKind::correntropy,
                         [w](double a, double b) { return gaussian(a, b, w); });
    p.values[0] = 1.0;  // G(x, x) == 1 for every term
    return p;
}

LagProfile crosscorrentropy(const Series& x, const Series& z, std::size_t order, KernelWidth w) {
    check_aligned(x, z);
    check_order(x.size(), order);
    return lag_average(x.values(), z.values(), order, LagKind::cross_correntropy,
                       [w](double a, double b) { return gaussian(a, b, w); });
}

LagProfile autocovariance(const Series& s, std::size_t order) {
    check_order(s.size(), order);
    return lag_average(s.values(), s.values(), order, LagKind::covariance,
                       [](double a, double b) { return a * b; });
}

LagProfile crosscovariance(const Series& x, const Series& z, std::size_t order) {
    check_aligned(x, z);
    check_order(x.size(), order);
    return lag_average(x.values(), z.values(), order, LagKind::cross_covariance,
                       [](double a, double b) { return a * b; });
}

std::vector<std::size_t> time_order(const Dataset& d) {
    const auto& ti = d.time_index();
    std::vector<std::size_t> rows(d.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::stable_sort(rows.begin(), rows.end(), [&ti](std::size_t a, std::size_t b) { return ti[a] < ti[b]; });
    return rows;
}

std::vector<std::vector<double>> input_runs(const Dataset& d) {
    std::vector<std::vector<double>> runs;
    const std::size_t order = d.order();
    const auto& ti = d.time_index();
    const std::vector<std::size_t> rows = time_order(d);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::size_t i = rows[k];
        if (k > 0 && ti[i] == ti[rows[k - 1]]) continue;  // repeated row adds no new sample
        if (k == 0 || ti[i] != ti[rows[k - 1]] + 1) {
            const auto w = d.window(i);
            std::vector<double> run;
            run.reserve(order);
            for (std::size_t tau = order; tau-- > 0;) run.push_back(w[tau]);
            runs.push_back(std::move(run));
        } else {
            runs.back().push_back(d.window(i)[0]);
        }
    }
    return runs;
}

LagProfile autocorrentropy(const Dataset& d, KernelWidth w) {
    auto p = pooled_auto(d, LagKind::correntropy,
                         [w](double a, double b) { return gaussian(a, b, w); });
    p.values[0] = 1.0;
    return p;
}

LagProfile crosscorrentropy(const Dataset& d, KernelWidth w) {
    return pooled_cross(d, LagKind::cross_correntropy,
                        [w](double a, double b) { return gaussian(a, b, w); });
}

LagProfile autocovariance(const Dataset& d) {
    return pooled_auto(d, LagKind::covariance, [](double a, double b) { return a * b; });
}

LagProfile crosscovariance(const Dataset& d) {
    return pooled_cross(d, LagKind::cross_covariance, [](double a, double b) { return a * b; });
}

LagMatrix toeplitz(const LagProfile& profile) {
    const auto n = static_cast<Eigen::Index>(profile.size());
    if (n == 0) throw DimensionError("toeplitz needs a profile of length >= 1");
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = profile.values[std::abs(i - j)];
    }
    return LagMatrix(std::move(m));
}

double rkhs_inner(std::span<const WeightedSample> a, std::span<const WeightedSample> b,
                  const LagProfile& profile) {
    const auto len = static_cast<long long>(profile.size());
    double acc = 0.0;
    for (const auto& u : a) {
        for (const auto& v : b) {
            const long long lag = u.time > v.time ? u.time - v.time : v.time - u.time;
            if (lag >= len) {
                throw RangeError(fmt::format("lag {} outside profile of length {}", lag, len));
            }
            acc += u.coef * v.coef * profile.values[static_cast<Eigen::Index>(lag)];
        }
    }
    return acc;
}

namespace {

KernelWidth silverman_from(const std::vector<double>& v) {
    if (v.size() < 2) throw DimensionError("Silverman's rule needs at least 2 samples");
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());
    const double std = std::sqrt(var);
    if (!(std > 0.0)) throw DegenerateSeriesError("Silverman's rule needs a non-constant series");
    return KernelWidth(1.06 * std * std::pow(static_cast<double>(v.size()), -0.2));
}

}  // namespace

KernelWidth silverman_sigma(const Series& s) { return silverman_from(s.values()); }

KernelWidth silverman_sigma(const Dataset& d) {
    std::vector<double> all;
    for (const auto& run : input_runs(d)) all.insert(all.end(), run.begin(), run.end());
    return silverman_from(all);
}

}  // namespace fwf
