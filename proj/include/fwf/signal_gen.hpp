#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace fwf {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Uniformly sampled scalar series. `mean` and `std` are the statistics that
/// were removed when the series was standardized (0 and 1 otherwise).
class Series {
public:
    explicit Series(std::vector<double> values, double dt = 1.0, double mean = 0.0,
                    double std = 1.0);

    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double dt() const noexcept { return dt_; }
    double mean() const noexcept { return mean_; }
    double std() const noexcept { return std_; }

private:
    std::vector<double> values_;
    double dt_;
    double mean_;
    double std_;
};

/// Embedded supervised data: row i holds the window [X(t), X(t-1), ..., X(t-L+1)]
/// (newest first) with t = time_index(i), paired with the target Z(t + horizon).
class Dataset {
public:
    Dataset(RowMatrix windows, Eigen::VectorXd targets, std::size_t horizon,
            std::vector<std::size_t> time_index);

    std::size_t rows() const noexcept { return static_cast<std::size_t>(windows_.rows()); }
    std::size_t order() const noexcept { return static_cast<std::size_t>(windows_.cols()); }
    std::size_t horizon() const noexcept { return horizon_; }
    bool empty() const noexcept { return rows() == 0; }

    const RowMatrix& windows() const noexcept { return windows_; }
    const Eigen::VectorXd& targets() const noexcept { return targets_; }
    const std::vector<std::size_t>& time_index() const noexcept { return time_index_; }

    std::span<const double> window(std::size_t i) const {
        return {windows_.data() + i * order(), order()};
    }
    double target(std::size_t i) const { return targets_[static_cast<Eigen::Index>(i)]; }

    /// Rows selected in the given order.
    Dataset subset(std::span<const std::size_t> rows) const;
    /// Rows [first, first + count).
    Dataset slice(std::size_t first, std::size_t count) const;

private:
    RowMatrix windows_;
    Eigen::VectorXd targets_;
    std::size_t horizon_;
    std::vector<std::size_t> time_index_;
};

struct MGParams {
    double beta = 0.2;
    double gamma = 0.1;
    double n_exp = 10.0;
    double tau_delay = 30.0;
    double step = 0.1;
    std::size_t downsample = 6;

    /// Number of integration steps spanned by the delay.
    std::size_t delay_slots() const;
    /// Throws ParameterError naming the offending field.
    void validate() const;
};

struct LorenzParams {
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
    double step = 0.01;
    std::size_t downsample = 5;

    void validate() const;
};

using LorenzState = std::array<double, 3>;

/// Mackey-Glass delay equation integrated with RK4 over a constant `init`
/// history. Sample k is the state after warmup + k*downsample steps.
Series gen_mackey_glass(const MGParams& p, std::size_t n, std::size_t warmup, double init);

/// One classical RK4 step of the Lorenz system.
LorenzState lorenz_rk4_step(const LorenzState& s, const LorenzParams& p);

/// x component of the Lorenz system; sample k is the state after
/// warmup + k*downsample RK4 steps.
Series gen_lorenz(const LorenzParams& p, std::size_t n, std::size_t warmup,
                  const LorenzState& init);

struct FirProcess {
    Series input;
    Series desired;
};

/// Unit-variance white Gaussian input (std::mt19937_64 + std::normal_distribution)
/// filtered by `coeffs` with zero initial state.
FirProcess gen_fir_process(std::span<const double> coeffs, std::size_t n, std::uint64_t noise_seed);

/// Adds N(0, noise_std^2) observation noise drawn from its own seeded stream.
Series add_white_noise(const Series& s, double noise_std, std::uint64_t seed);

/// Windows and targets drawn from the same series (self-prediction).
Dataset embed(const Series& s, std::size_t order, std::size_t horizon);
/// Windows from `input`, targets from `desired`; both must have equal length.
Dataset embed(const Series& input, const Series& desired, std::size_t order, std::size_t horizon);

/// Zero mean, unit population variance; the removed statistics are recorded.
Series standardize(const Series& s);
/// Applies previously recorded statistics.
Series standardize_with(const Series& s, double mean, double std);

}  // namespace fwf
