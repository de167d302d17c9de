#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fwf/kernel_stats.hpp"
#include "fwf/neighbors.hpp"
#include "fwf/signal_gen.hpp"

namespace fwf {

/// 50 log-spaced values in [0.01, 2].
std::vector<double> default_alpha_grid();
/// 25 log-spaced kernel widths in [0.25, 16] (units of the standardized input).
std::vector<double> default_sigma_grid();

/// Training configuration. Unset optionals are resolved during fit:
///   sigma_input  -> searched over sigma_grid when that is non-empty,
///                   otherwise Silverman's rule on the training input
///   sigma_weight -> sigma_input
///   alpha        -> minimizer of training MSE over alpha_grid
///   ridge        -> 1e-8 * trace(V) / L, raised tenfold while V + ridge I
///                   fails to factor (see solve_spd_default_ridge)
struct FwfConfig {
    std::size_t order = 10;
    std::size_t horizon = 1;
    std::optional<double> sigma_input;
    std::optional<double> sigma_weight;
    std::optional<double> alpha;
    std::size_t k_neighbors = 2;
    std::optional<double> ridge;
    std::vector<double> alpha_grid = default_alpha_grid();
    std::vector<double> sigma_grid;

    void validate() const;
};

/// Fully resolved hyperparameters stored with a fitted model.
struct FwfParams {
    std::size_t order = 0;
    std::size_t horizon = 0;
    double sigma_input = 1.0;
    double sigma_weight = 1.0;
    double alpha = 1.0;
    std::size_t k_neighbors = 2;
    double ridge = 0.0;
};

/// Similarity of each weight to a desired value; entries in (0, 1].
struct GVector {
    Eigen::VectorXd values;
};

/// W with (V + ridge I) W = Pv, via Cholesky.
Eigen::VectorXd solve_weights(const LagMatrix& v, const LagProfile& pv, double ridge);

/// sum_tau weights(tau) * G(centers(tau), point(tau)).
double evaluate_functional(std::span<const double> weights, std::span<const double> centers,
                           std::span<const double> point, KernelWidth w);

GVector compute_g(double z, std::span<const double> weights, KernelWidth w_weight);

/// partner(tau) = x(tau) - alpha * gaussian_inverse(g(tau)); g below 1e-300 is
/// clamped so the offset stays finite.
Eigen::VectorXd compute_partner(std::span<const double> x, const GVector& g, double alpha, KernelWidth w);

class FwfModel {
public:
    /// Assembles a model from its parts and builds the neighbor index over
    /// `train_windows`. Used by fit and by deserialization.
    FwfModel(Eigen::VectorXd weights, RowMatrix partners, RowMatrix train_windows, double bias,
             FwfParams params);

    const Eigen::VectorXd& weights() const noexcept { return *weights_; }
    const RowMatrix& partners() const noexcept { return *partners_; }
    const RowMatrix& train_windows() const noexcept { return *train_windows_; }
    double bias() const noexcept { return bias_; }
    const FwfParams& params() const noexcept { return params_; }
    const NeighborIndex& neighbor_index() const noexcept { return *index_; }
    std::size_t train_size() const noexcept { return static_cast<std::size_t>(train_windows_->rows()); }

    std::span<const double> partner(std::size_t i) const {
        return {partners_->data() + i * params_.order, params_.order};
    }

    /// Average functional output over the K nearest training windows, minus bias.
    double predict(std::span<const double> x, std::size_t k) const;
    double predict(std::span<const double> x) const { return predict(x, params_.k_neighbors); }

private:
    std::shared_ptr<const Eigen::VectorXd> weights_;
    std::shared_ptr<const RowMatrix> partners_;
    std::shared_ptr<const RowMatrix> train_windows_;
    std::shared_ptr<const NeighborIndex> index_;
    double bias_;
    FwfParams params_;
};

FwfModel fit(const Dataset& data, const FwfConfig& cfg);

double predict(const FwfModel& m, std::span<const double> x, std::size_t k);

struct AlphaSearch {
    double alpha;
    double training_mse;
    std::vector<double> grid;
    std::vector<double> grid_mse;
};

/// Training-MSE minimizer over `grid` (ties go to the smaller alpha). Weights,
/// g vectors and training neighbor lists are computed once and shared across
/// grid points.
AlphaSearch tune_alpha(const Dataset& data, const FwfConfig& cfg, std::span<const double> grid);

struct BandwidthSearch {
    double sigma_input;
    double alpha;
    double training_mse;
    /// One entry per sigma in the grid; nullopt when the weight solve failed.
    std::vector<std::optional<AlphaSearch>> per_sigma;
    std::vector<double> sigma_grid;
};

/// Joint search over cfg.sigma_grid x cfg.alpha_grid by training MSE.
BandwidthSearch tune_bandwidth(const Dataset& data, const FwfConfig& cfg);

/// Mean squared error of model.predict over every row of `data`.
double training_mse(const FwfModel& m, const Dataset& data);

}  // namespace fwf
