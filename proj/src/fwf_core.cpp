#include "fwf/fwf_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "fwf/errors.hpp"
#include "fwf/linalg.hpp"

namespace fwf {

namespace {

constexpr double kMinG = 1e-300;

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
    std::vector<double> out(count);
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        out[i] = std::exp(a + t * (b - a));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

void require_positive(const std::optional<double>& v, const char* field) {
    if (v && (!(*v > 0.0) || !std::isfinite(*v))) {
        throw ParameterError(fmt::format("{} must be positive and finite (got {})", field, *v));
    }
}

void check_grid(std::span<const double> grid, const char* name) {
    if (grid.empty()) throw ParameterError(fmt::format("{} must not be empty", name));
    for (double g : grid) {
        if (!(g > 0.0) || !std::isfinite(g)) {
            throw ParameterError(fmt::format("{} entries must be positive and finite (got {})", name, g));
        }
    }
}

std::vector<double> sorted_copy(std::span<const double> grid) {
    std::vector<double> out(grid.begin(), grid.end());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

std::vector<double> default_alpha_grid() { return log_spaced(0.01, 2.0, 50); }
std::vector<double> default_sigma_grid() { return log_spaced(0.25, 16.0, 25); }

void FwfConfig::validate() const {
    if (order == 0) throw ParameterError("order must be at least 1");
    if (k_neighbors == 0) throw ParameterError("k_neighbors must be at least 1");
    require_positive(sigma_input, "sigma_input");
    require_positive(sigma_weight, "sigma_weight");
    require_positive(alpha, "alpha");
    if (ridge && (!(*ridge >= 0.0) || !std::isfinite(*ridge))) {
        throw ParameterError(fmt::format("ridge must be non-negative and finite (got {})", *ridge));
    }
    if (!alpha) check_grid(alpha_grid, "alpha_grid");
    if (!sigma_grid.empty()) check_grid(sigma_grid, "sigma_grid");
}

Eigen::VectorXd solve_weights(const LagMatrix& v, const LagProfile& pv, double ridge) {
    if (v.size() != pv.size()) {
        throw DimensionError(
            fmt::format("correntropy matrix is {0}x{0} but the cross profile has {1} lags", v.size(), pv.size()));
    }
    return solve_spd(v.entries(), pv.values, ridge);
}

double evaluate_functional(std::span<const double> weights, std::span<const double> centers,
                           std::span<const double> point, KernelWidth w) {
    if (weights.size() != centers.size() || weights.size() != point.size()) {
        throw DimensionError(fmt::format("functional evaluation needs equal lengths ({}, {}, {})",
                                         weights.size(), centers.size(), point.size()));
    }
    double acc = 0.0;
    for (std::size_t tau = 0; tau < weights.size(); ++tau) {
        acc += weights[tau] * gaussian(centers[tau], point[tau], w);
    }
    return acc;
}

GVector compute_g(double z, std::span<const double> weights, KernelWidth w_weight) {
    Eigen::VectorXd g(static_cast<Eigen::Index>(weights.size()));
    for (std::size_t tau = 0; tau < weights.size(); ++tau) {
        g[static_cast<Eigen::Index>(tau)] = gaussian(weights[tau], z, w_weight);
    }
    return {std::move(g)};
}

Eigen::VectorXd compute_partner(std::span<const double> x, const GVector& g, double alpha, KernelWidth w) {
    if (static_cast<std::size_t>(g.values.size()) != x.size()) {
        throw DimensionError(
            fmt::format("window has {} lags but g has {}", x.size(), g.values.size()));
    }
    Eigen::VectorXd p(static_cast<Eigen::Index>(x.size()));
    for (std::size_t tau = 0; tau < x.size(); ++tau) {
        const double gt = g.values[static_cast<Eigen::Index>(tau)];
        const double offset = gaussian_inverse(gt < kMinG && gt > 0.0 ? kMinG : gt, w);
        p[static_cast<Eigen::Index>(tau)] = x[tau] - alpha * offset;
    }
    return p;
}

FwfModel::FwfModel(Eigen::VectorXd weights, RowMatrix partners, RowMatrix train_windows, double bias,
                   FwfParams params)
    : bias_(bias), params_(params) {
    const auto order = static_cast<Eigen::Index>(params_.order);
    if (order == 0) throw ParameterError("model order must be at least 1");
    if (weights.size() != order) {
        throw DimensionError(fmt::format("model has {} weights for order {}", weights.size(), order));
    }
    if (train_windows.rows() == 0) throw DimensionError("model needs at least one training window");
    if (train_windows.cols() != order || partners.rows() != train_windows.rows() ||
        partners.cols() != order) {
        throw DimensionError(fmt::format("partners ({}x{}) and training windows ({}x{}) must both be Nx{}",
                                         partners.rows(), partners.cols(), train_windows.rows(),
                                         train_windows.cols(), order));
    }
    if (!partners.allFinite() || !weights.allFinite() || !std::isfinite(bias)) {
        throw DomainError("model weights, partners and bias must be finite");
    }
    if (params_.k_neighbors == 0) throw ParameterError("k_neighbors must be at least 1");
    (void)KernelWidth(params_.sigma_input);
    (void)KernelWidth(params_.sigma_weight);

    index_ = std::make_shared<const NeighborIndex>(train_windows);
    weights_ = std::make_shared<const Eigen::VectorXd>(std::move(weights));
    partners_ = std::make_shared<const RowMatrix>(std::move(partners));
    train_windows_ = std::make_shared<const RowMatrix>(std::move(train_windows));
}

double FwfModel::predict(std::span<const double> x, std::size_t k) const {
    if (x.size() != params_.order) {
        throw DimensionError(fmt::format("window has length {} but the model order is {}", x.size(),
                                         params_.order));
    }
    if (k == 0) throw ParameterError("K must be at least 1");
    if (k > train_size()) {
        throw ParameterError(fmt::format("K = {} exceeds the {} training windows", k, train_size()));
    }
    const KernelWidth w(params_.sigma_input);
    const std::span<const double> weights(weights_->data(), params_.order);
    double acc = 0.0;
    for (const auto& nb : index_->query(x, k)) {
        acc += evaluate_functional(weights, partner(nb.index), x, w);
    }
    return acc / static_cast<double>(k) - bias_;
}

double predict(const FwfModel& m, std::span<const double> x, std::size_t k) { return m.predict(x, k); }

namespace {

/// K nearest training rows of every training row.
struct TrainingNeighbors {
    std::size_t k;
    std::vector<std::size_t> idx;    // row-major N x k
    std::vector<std::size_t> order;  // rows by time index, for order-free sums

    TrainingNeighbors(const Dataset& data, std::size_t k_) : k(k_), idx(data.rows() * k_), order(time_order(data)) {
        const NeighborIndex index(data.windows());
        for (std::size_t i = 0; i < data.rows(); ++i) {
            const auto nbrs = index.query(data.window(i), k);
            for (std::size_t j = 0; j < k; ++j) idx[i * k + j] = nbrs[j].index;
        }
    }
};

/// Everything about a fit that does not depend on alpha.
struct WeightSolution {
    double sigma_input;
    double sigma_weight;
    double ridge;
    Eigen::VectorXd weights;
    RowMatrix offsets;  // gaussian_inverse(g_i(tau)), the per-unit-alpha partner shift
};

WeightSolution solve_for_width(const Dataset& data, const FwfConfig& cfg, double sigma_input) {
    const KernelWidth w_in(sigma_input);
    const double sigma_weight = cfg.sigma_weight.value_or(sigma_input);
    const KernelWidth w_wt(sigma_weight);

    const LagMatrix v = toeplitz(autocorrentropy(data, w_in));
    const LagProfile pv = crosscorrentropy(data, w_in);
    double ridge = 0.0;
    Eigen::VectorXd weights;
    if (cfg.ridge) {
        ridge = *cfg.ridge;
        weights = solve_weights(v, pv, ridge);
    } else {
        // The per-lag 1/(N - tau) averages need not form a positive definite
        // Toeplitz matrix, so the default ridge may have to grow.
        RidgedSolution sol = solve_spd_default_ridge(v.entries(), pv.values);
        ridge = sol.ridge;
        weights = std::move(sol.x);
    }

    const std::size_t n = data.rows();
    const std::size_t order = data.order();
    RowMatrix offsets(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(order));
    const std::span<const double> wspan(weights.data(), order);
    for (std::size_t i = 0; i < n; ++i) {
        const GVector g = compute_g(data.target(i), wspan, w_wt);
        for (std::size_t tau = 0; tau < order; ++tau) {
            double gt = g.values[static_cast<Eigen::Index>(tau)];
            if (gt < kMinG) gt = kMinG;
            offsets(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(tau)) = gaussian_inverse(gt, w_in);
        }
    }
    return {sigma_input, sigma_weight, ridge, std::move(weights), std::move(offsets)};
}

RowMatrix partners_for(const Dataset& data, const WeightSolution& sol, double alpha) {
    RowMatrix p = data.windows();
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        for (Eigen::Index tau = 0; tau < p.cols(); ++tau) p(i, tau) -= alpha * sol.offsets(i, tau);
    }
    return p;
}

struct AlphaEvaluation {
    double bias;
    double mse;
};

/// Bias and training MSE for one alpha, using the same arithmetic as
/// FwfModel::predict on each training window.
AlphaEvaluation evaluate_alpha(const Dataset& data, const WeightSolution& sol,
                               const TrainingNeighbors& nbrs, const RowMatrix& partners) {
    const std::size_t n = data.rows();
    const std::size_t order = data.order();
    const KernelWidth w(sol.sigma_input);
    const std::span<const double> weights(sol.weights.data(), order);
    std::vector<double> raw(n);
    double raw_mean = 0.0;
    double target_mean = 0.0;
    for (std::size_t i : nbrs.order) {
        const auto x = data.window(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < nbrs.k; ++j) {
            const std::size_t r = nbrs.idx[i * nbrs.k + j];
            acc += evaluate_functional(weights, {partners.data() + r * order, order}, x, w);
        }
        raw[i] = acc / static_cast<double>(nbrs.k);
        raw_mean += raw[i];
        target_mean += data.target(i);
    }
    raw_mean /= static_cast<double>(n);
    target_mean /= static_cast<double>(n);
    const double bias = raw_mean - target_mean;
    double sse = 0.0;
    for (std::size_t i : nbrs.order) {
        const double e = raw[i] - bias - data.target(i);
        sse += e * e;
    }
    return {bias, sse / static_cast<double>(n)};
}

AlphaSearch search_alpha(const Dataset& data, const WeightSolution& sol, const TrainingNeighbors& nbrs,
                         std::span<const double> grid) {
    AlphaSearch out{0.0, std::numeric_limits<double>::infinity(), sorted_copy(grid), {}};
    out.grid_mse.reserve(out.grid.size());
    for (double a : out.grid) {
        const double mse = evaluate_alpha(data, sol, nbrs, partners_for(data, sol, a)).mse;
        out.grid_mse.push_back(mse);
        if (mse < out.training_mse) {  // strict: ties keep the smaller alpha
            out.training_mse = mse;
            out.alpha = a;
        }
    }
    if (!std::isfinite(out.training_mse)) {
        throw DomainError("training MSE is not finite for any alpha in the grid");
    }
    return out;
}

void check_data(const Dataset& data, const FwfConfig& cfg) {
    cfg.validate();
    if (data.empty()) throw DimensionError("cannot fit on an empty dataset");
    if (data.order() != cfg.order) {
        throw DimensionError(
            fmt::format("dataset order {} does not match configured order {}", data.order(), cfg.order));
    }
    if (data.horizon() != cfg.horizon) {
        throw DimensionError(fmt::format("dataset horizon {} does not match configured horizon {}",
                                         data.horizon(), cfg.horizon));
    }
    if (cfg.k_neighbors > data.rows()) {
        throw ParameterError(
            fmt::format("k_neighbors = {} exceeds the {} training windows", cfg.k_neighbors, data.rows()));
    }
}

std::vector<double> alpha_candidates(const FwfConfig& cfg) {
    if (cfg.alpha) return {*cfg.alpha};
    return cfg.alpha_grid;
}

BandwidthSearch search_bandwidth(const Dataset& data, const FwfConfig& cfg, const TrainingNeighbors& nbrs) {
    check_grid(cfg.sigma_grid, "sigma_grid");
    BandwidthSearch out{0.0, 0.0, std::numeric_limits<double>::infinity(), {}, sorted_copy(cfg.sigma_grid)};
    const auto alphas = alpha_candidates(cfg);
    std::optional<ConditioningError> last_failure;
    for (double s : out.sigma_grid) {
        try {
            const WeightSolution sol = solve_for_width(data, cfg, s);
            AlphaSearch a = search_alpha(data, sol, nbrs, alphas);
            if (a.training_mse < out.training_mse) {
                out.training_mse = a.training_mse;
                out.sigma_input = s;
                out.alpha = a.alpha;
            }
            out.per_sigma.emplace_back(std::move(a));
        } catch (const ConditioningError& e) {
            last_failure = e;
            out.per_sigma.emplace_back(std::nullopt);
        }
    }
    if (!std::isfinite(out.training_mse)) {
        if (last_failure) throw *last_failure;
        throw DomainError("no kernel width in the grid produced a finite training MSE");
    }
    return out;
}

double resolve_sigma(const Dataset& data, const FwfConfig& cfg) {
    if (cfg.sigma_input) return *cfg.sigma_input;
    return silverman_sigma(data).sigma();
}

}  // namespace

AlphaSearch tune_alpha(const Dataset& data, const FwfConfig& cfg, std::span<const double> grid) {
    check_grid(grid, "alpha grid");
    check_data(data, cfg);
    const TrainingNeighbors nbrs(data, cfg.k_neighbors);
    const WeightSolution sol = solve_for_width(data, cfg, resolve_sigma(data, cfg));
    return search_alpha(data, sol, nbrs, grid);
}

BandwidthSearch tune_bandwidth(const Dataset& data, const FwfConfig& cfg) {
    check_data(data, cfg);
    const TrainingNeighbors nbrs(data, cfg.k_neighbors);
    return search_bandwidth(data, cfg, nbrs);
}

FwfModel fit(const Dataset& data, const FwfConfig& cfg) {
    check_data(data, cfg);
    const TrainingNeighbors nbrs(data, cfg.k_neighbors);

    double sigma = 0.0;
    std::optional<double> alpha = cfg.alpha;
    if (cfg.sigma_input) {
        sigma = *cfg.sigma_input;
    } else if (!cfg.sigma_grid.empty()) {
        const BandwidthSearch bw = search_bandwidth(data, cfg, nbrs);
        sigma = bw.sigma_input;
        alpha = bw.alpha;
    } else {
        sigma = silverman_sigma(data).sigma();
    }

    const WeightSolution sol = solve_for_width(data, cfg, sigma);
    if (!alpha) alpha = search_alpha(data, sol, nbrs, cfg.alpha_grid).alpha;

    RowMatrix partners = partners_for(data, sol, *alpha);
    const AlphaEvaluation eval = evaluate_alpha(data, sol, nbrs, partners);

    FwfParams params;
    params.order = cfg.order;
    params.horizon = cfg.horizon;
    params.sigma_input = sol.sigma_input;
    params.sigma_weight = sol.sigma_weight;
    params.alpha = *alpha;
    params.k_neighbors = cfg.k_neighbors;
    params.ridge = sol.ridge;
    return FwfModel(sol.weights, std::move(partners), data.windows(), eval.bias, params);
}

double training_mse(const FwfModel& m, const Dataset& data) {
    if (data.empty()) throw DimensionError("cannot score an empty dataset");
    double sse = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const double e = m.predict(data.window(i)) - data.target(i);
        sse += e * e;
    }
    return sse / static_cast<double>(data.rows());
}

}  // namespace fwf
