#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fwf/methods.hpp"
#include "fwf/signal_gen.hpp"

namespace fwf {

enum class DatasetKind { mackey_glass, lorenz, fir };

std::string_view to_string(DatasetKind k);
/// Throws ConfigError for unknown names.
DatasetKind dataset_kind_from_string(std::string_view s);

struct GeneratorConfig {
    DatasetKind kind = DatasetKind::mackey_glass;
    MGParams mg;
    std::size_t mg_warmup = 3000;
    double mg_init = 1.2;
    LorenzParams lorenz;
    std::size_t lorenz_warmup = 1000;
    LorenzState lorenz_init{1.0, 1.0, 1.0};
    std::vector<double> fir_coeffs{0.3, -0.2, 0.1};
    /// Observation noise added to the FIR desired signal.
    double fir_noise_std = 0.1;
    /// Zero mean / unit variance for the autonomous series. FIR data is never
    /// rescaled so fitted weights stay comparable to the true coefficients.
    bool standardize = true;

    void validate() const;
};

struct GeneratedSeries {
    Series input;
    /// Set for FIR data only; autonomous series predict themselves.
    std::optional<Series> desired;
};

/// Raw (or standardized, per `g.standardize`) series of `n` samples. FIR noise
/// draws from `seed`.
GeneratedSeries generate_series(const GeneratorConfig& g, std::size_t n, std::uint64_t seed);

/// Generates enough samples for `rows` embedded rows.
Dataset make_dataset(const GeneratorConfig& g, std::size_t rows, std::size_t order,
                     std::size_t horizon, std::uint64_t seed);

struct ExperimentConfig {
    GeneratorConfig generator;
    std::size_t order = 10;
    std::size_t horizon = 1;
    std::vector<std::size_t> train_sizes{500, 1000, 1500, 2000};
    std::size_t folds = 5;
    std::size_t test_size = 200;
    std::vector<MethodSpec> methods;
    std::uint64_t seed = 0;
    /// Worker cap; 0 defers to FWF_THREADS, then to the hardware count.
    std::size_t threads = 0;

    void validate() const;
    /// Rows needed so every fold keeps max(train_sizes) training rows.
    std::size_t required_rows() const;
};

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Rows a window/target pair reaches on either side of a test block.
std::size_t guard_gap(std::size_t order, std::size_t horizon);

/// Contiguous test blocks of `test_size` rows, one per stride of rows/folds,
/// placed at a seeded offset inside their stride. Training rows are all rows
/// whose samples stay clear of the test block, in ascending order. Throws
/// ParameterError when rows < folds * test_size or a fold keeps fewer than
/// `min_train` training rows.
std::vector<Split> kfold(const Dataset& data, std::size_t folds, std::size_t test_size,
                         std::uint64_t seed, std::size_t min_train = 0);

/// True when no training row shares a raw sample with any test row.
bool split_is_leak_free(const Dataset& data, const Split& split);

double mse(std::span<const double> pred, std::span<const double> target);

struct ResultRow {
    std::string method;
    std::size_t n_train = 0;
    std::size_t fold = 0;
    /// NaN on error rows.
    double mse = 0.0;
    double fit_seconds = 0.0;
    double predict_us_per_query = 0.0;
    /// Empty unless the cell failed.
    std::string error;

    bool ok() const noexcept { return error.empty(); }
};

struct ResultTable {
    std::vector<ResultRow> rows;
};

/// Rows ordered by (method as configured, N ascending, fold).
ResultTable run_experiment(const ExperimentConfig& cfg);

struct AggregateRow {
    std::string method;
    std::size_t n_train = 0;
    std::size_t count = 0;
    std::size_t errors = 0;
    double mean = std::numeric_limits<double>::quiet_NaN();
    /// Sample standard deviation over successful folds; 0 for a single fold.
    double std = std::numeric_limits<double>::quiet_NaN();
};

std::vector<AggregateRow> aggregate(const ResultTable& t);

struct TimingPoint {
    std::size_t n_train = 0;
    double fit_seconds = 0.0;
    double predict_seconds_per_query = 0.0;
    std::size_t fit_reps = 0;
};

struct TimingTable {
    std::string method;
    std::vector<TimingPoint> points;
    double fit_slope = 0.0;
    double predict_slope = 0.0;
};

struct TimingOptions {
    std::size_t reps = 5;
    std::size_t queries = 200;
    /// Once a single fit exceeds this, further fit repetitions are skipped.
    double fit_budget_seconds = std::numeric_limits<double>::infinity();
};

/// Wall-clock medians of fit time and per-query predict time at each size,
/// with least-squares slopes on the log-log points. Runs serially.
TimingTable timing_scaling(const MethodSpec& method, std::span<const std::size_t> sizes,
                           const GeneratorConfig& gen, std::size_t order, std::size_t horizon,
                           std::uint64_t seed, const TimingOptions& opts = {});

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Worker count from an explicit request, FWF_THREADS, or the hardware.
std::size_t resolve_threads(std::size_t requested);

/// Header `method,n_train,fold,mse,fit_seconds,predict_us_per_query`.
void write_results_csv(std::ostream& os, const ResultTable& t);
void write_timing_csv(std::ostream& os, std::span<const TimingTable> timings);
nlohmann::json summary_json(const ResultTable& t, std::span<const TimingTable> timings);

}  // namespace fwf
