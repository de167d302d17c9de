#include "fwf/signal_gen.hpp"

#include <cmath>
#include <random>
#include <string>

#include <fmt/format.h>

#include "fwf/errors.hpp"

namespace fwf {

Series::Series(std::vector<double> values, double dt, double mean, double std)
    : values_(std::move(values)), dt_(dt), mean_(mean), std_(std) {
    if (values_.empty()) {
        throw DimensionError("series must contain at least one sample");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw DomainError(fmt::format("series sample {} is not finite", i));
        }
    }
    if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
        throw ParameterError("series dt must be positive and finite");
    }
}

Dataset::Dataset(RowMatrix windows, Eigen::VectorXd targets, std::size_t horizon,
                 std::vector<std::size_t> time_index)
    : windows_(std::move(windows)),
      targets_(std::move(targets)),
      horizon_(horizon),
      time_index_(std::move(time_index)) {
    if (windows_.rows() != targets_.size()) {
        throw DimensionError(fmt::format("dataset has {} windows but {} targets", windows_.rows(),
                                         targets_.size()));
    }
    if (time_index_.size() != rows()) {
        throw DimensionError("dataset time index length differs from row count");
    }
    if (windows_.rows() > 0 && windows_.cols() == 0) {
        throw DimensionError("dataset windows must have order >= 1");
    }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    RowMatrix w(static_cast<Eigen::Index>(rows.size()), windows_.cols());
    Eigen::VectorXd t(static_cast<Eigen::Index>(rows.size()));
    std::vector<std::size_t> ti(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto r = rows[k];
        if (r >= this->rows()) {
            throw RangeError(fmt::format("row {} out of range for dataset of {} rows", r, this->rows()));
        }
        w.row(static_cast<Eigen::Index>(k)) = windows_.row(static_cast<Eigen::Index>(r));
        t[static_cast<Eigen::Index>(k)] = targets_[static_cast<Eigen::Index>(r)];
        ti[k] = time_index_[r];
    }
    return Dataset(std::move(w), std::move(t), horizon_, std::move(ti));
}

Dataset Dataset::slice(std::size_t first, std::size_t count) const {
    if (first + count > rows()) {
        throw RangeError(fmt::format("slice [{}, {}) exceeds dataset of {} rows", first,
                                     first + count, rows()));
    }
    std::vector<std::size_t> idx(count);
    for (std::size_t k = 0; k < count; ++k) idx[k] = first + k;
    return subset(idx);
}

std::size_t MGParams::delay_slots() const {
    const double ratio = tau_delay / step;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio) || rounded < 1.0) {
        throw ParameterError(fmt::format(
            "tau_delay/step = {} must be a positive integer number of history slots", ratio));
    }
    return static_cast<std::size_t>(rounded);
}

namespace {

void require_positive(double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ParameterError(fmt::format("{} must be positive and finite (got {})", field, v));
    }
}

}  // namespace

void MGParams::validate() const {
    require_positive(beta, "beta");
    require_positive(gamma, "gamma");
    require_positive(n_exp, "n_exp");
    require_positive(tau_delay, "tau_delay");
    require_positive(step, "step");
    if (downsample == 0) throw ParameterError("downsample must be a positive integer");
    (void)delay_slots();
}

void LorenzParams::validate() const {
    require_positive(sigma, "sigma");
    require_positive(rho, "rho");
    require_positive(beta, "beta");
    require_positive(step, "step");
    if (downsample == 0) throw ParameterError("downsample must be a positive integer");
}

Series gen_mackey_glass(const MGParams& p, std::size_t n, std::size_t warmup, double init) {
    p.validate();
    if (n == 0) throw ParameterError("n must be at least 1");
    const std::size_t slots = p.delay_slots();
    if (warmup < slots) {
        throw ParameterError(
            fmt::format("warmup ({}) must cover the delay history of {} steps", warmup, slots));
    }
    if (!std::isfinite(init)) throw DomainError("initial history value must be finite");

    const auto rhs = [&p](double x, double delayed) {
        return p.beta * delayed / (1.0 + std::pow(delayed, p.n_exp)) - p.gamma * x;
    };

    // ring[j % (slots + 1)] holds x_j for j in [k - slots, k].
    std::vector<double> ring(slots + 1, init);
    const std::size_t ring_size = ring.size();
    const double h = p.step;

    std::vector<double> out;
    out.reserve(n);
    const std::size_t last = warmup + (n - 1) * p.downsample;
    double x = init;
    for (std::size_t k = 0;; ++k) {
        if (k >= warmup && (k - warmup) % p.downsample == 0) {
            out.push_back(x);
            if (k == last) break;
        }
        const double d0 = ring[(k + 1) % ring_size];
        const double d1 = ring[(k + 2) % ring_size];
        const double dm = 0.5 * (d0 + d1);
        const double k1 = rhs(x, d0);
        const double k2 = rhs(x + 0.5 * h * k1, dm);
        const double k3 = rhs(x + 0.5 * h * k2, dm);
        const double k4 = rhs(x + h * k3, d1);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!std::isfinite(x)) {
            throw IntegrationDivergenceError(
                k + 1, fmt::format("Mackey-Glass integration diverged at step {}", k + 1));
        }
        ring[(k + 1) % ring_size] = x;
    }
    return Series(std::move(out), h * static_cast<double>(p.downsample));
}

LorenzState lorenz_rk4_step(const LorenzState& s, const LorenzParams& p) {
    const auto f = [&p](const LorenzState& u) -> LorenzState {
        return {p.sigma * (u[1] - u[0]), u[0] * (p.rho - u[2]) - u[1], u[0] * u[1] - p.beta * u[2]};
    };
    const auto axpy = [](const LorenzState& a, double c, const LorenzState& b) -> LorenzState {
        return {a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2]};
    };
    const double h = p.step;
    const LorenzState k1 = f(s);
    const LorenzState k2 = f(axpy(s, 0.5 * h, k1));
    const LorenzState k3 = f(axpy(s, 0.5 * h, k2));
    const LorenzState k4 = f(axpy(s, h, k3));
    LorenzState next{};
    for (std::size_t i = 0; i < 3; ++i) {
        next[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return next;
}

Series gen_lorenz(const LorenzParams& p, std::size_t n, std::size_t warmup, const LorenzState& init) {
    p.validate();
    if (n == 0) throw ParameterError("n must be at least 1");
    for (double v : init) {
        if (!std::isfinite(v)) throw DomainError("initial Lorenz state must be finite");
    }
    std::vector<double> out;
    out.reserve(n);
    const std::size_t last = warmup + (n - 1) * p.downsample;
    LorenzState s = init;
    for (std::size_t k = 0;; ++k) {
        if (k >= warmup && (k - warmup) % p.downsample == 0) {
            out.push_back(s[0]);
            if (k == last) break;
        }
        s = lorenz_rk4_step(s, p);
        if (!std::isfinite(s[0]) || !std::isfinite(s[1]) || !std::isfinite(s[2])) {
            throw IntegrationDivergenceError(
                k + 1, fmt::format("Lorenz integration diverged at step {}", k + 1));
        }
    }
    return Series(std::move(out), p.step * static_cast<double>(p.downsample));
}

FirProcess gen_fir_process(std::span<const double> coeffs, std::size_t n, std::uint64_t noise_seed) {
    if (coeffs.empty()) throw ParameterError("FIR coefficients must be non-empty");
    if (n == 0) throw ParameterError("n must be at least 1");
    std::mt19937_64 rng(noise_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> input(n);
    for (auto& v : input) v = normal(rng);

    std::vector<double> desired(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        double acc = 0.0;
        for (std::size_t k = 0; k < coeffs.size() && k <= t; ++k) {
            acc += coeffs[k] * input[t - k];
        }
        desired[t] = acc;
    }
    return {Series(std::move(input)), Series(std::move(desired))};
}

Series add_white_noise(const Series& s, double noise_std, std::uint64_t seed) {
    if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
        throw ParameterError("noise_std must be non-negative and finite");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v = s.values();
    for (auto& x : v) x += noise_std * normal(rng);
    return Series(std::move(v), s.dt(), s.mean(), s.std());
}

Dataset embed(const Series& input, const Series& desired, std::size_t order, std::size_t horizon) {
    if (order == 0) throw ParameterError("filter order must be at least 1");
    if (input.size() != desired.size()) {
        throw AlignmentError(fmt::format("input has {} samples but desired has {}", input.size(),
                                         desired.size()));
    }
    const std::size_t len = input.size();
    if (len < order + horizon) {
        throw DimensionError(fmt::format(
            "series of length {} is too short for order {} and horizon {}", len, order, horizon));
    }
    const std::size_t rows = len - (order - 1) - horizon;
    RowMatrix windows(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(order));
    Eigen::VectorXd targets(static_cast<Eigen::Index>(rows));
    std::vector<std::size_t> time_index(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t t = i + order - 1;
        for (std::size_t tau = 0; tau < order; ++tau) {
            windows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(tau)) = input[t - tau];
        }
        targets[static_cast<Eigen::Index>(i)] = desired[t + horizon];
        time_index[i] = t;
    }
    return Dataset(std::move(windows), std::move(targets), horizon, std::move(time_index));
}

Dataset embed(const Series& s, std::size_t order, std::size_t horizon) {
    return embed(s, s, order, horizon);
}

Series standardize(const Series& s) {
    if (s.size() < 2) throw DimensionError("standardize needs at least 2 samples");
    const auto& v = s.values();
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());
    const double std = std::sqrt(var);
    if (!(std > 0.0)) throw DegenerateSeriesError("cannot standardize a zero-variance series");
    return standardize_with(s, mean, std);
}

Series standardize_with(const Series& s, double mean, double std) {
    if (!(std > 0.0) || !std::isfinite(std) || !std::isfinite(mean)) {
        throw DegenerateSeriesError("standardization requires finite mean and positive std");
    }
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = (s[i] - mean) / std;
    return Series(std::move(out), s.dt(), mean, std);
}

}  // namespace fwf
