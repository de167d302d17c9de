#include "fwf/evalbench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <map>
#include <ostream>
#include <random>
#include <thread>
#include <utility>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "fwf/errors.hpp"

namespace fwf {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt_double(double x) {
    return fmt::format("{:.17g}", x);
}

nlohmann::json number_or_null(double x) {
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

}  // namespace

std::string_view to_string(DatasetKind k) {
    switch (k) {
        case DatasetKind::mackey_glass: return "mackey_glass";
        case DatasetKind::lorenz: return "lorenz";
        case DatasetKind::fir: return "fir";
    }
    return "unknown";
}

DatasetKind dataset_kind_from_string(std::string_view s) {
    if (s == "mackey_glass") return DatasetKind::mackey_glass;
    if (s == "lorenz") return DatasetKind::lorenz;
    if (s == "fir") return DatasetKind::fir;
    throw ConfigError(fmt::format("dataset: unknown kind '{}' (expected mackey_glass, lorenz or fir)", s));
}

void GeneratorConfig::validate() const {
    switch (kind) {
        case DatasetKind::mackey_glass:
            mg.validate();
            if (mg_warmup < mg.delay_slots()) {
                throw ParameterError(fmt::format("mg_warmup: {} steps is shorter than the {} delay slots",
                                                 mg_warmup, mg.delay_slots()));
            }
            if (!std::isfinite(mg_init)) throw ParameterError("mg_init: must be finite");
            break;
        case DatasetKind::lorenz:
            lorenz.validate();
            for (double v : lorenz_init) {
                if (!std::isfinite(v)) throw ParameterError("lorenz_init: must be finite");
            }
            break;
        case DatasetKind::fir:
            if (fir_coeffs.empty()) throw ParameterError("fir_coeffs: must not be empty");
            for (double c : fir_coeffs) {
                if (!std::isfinite(c)) throw ParameterError("fir_coeffs: must be finite");
            }
            if (!(fir_noise_std >= 0.0) || !std::isfinite(fir_noise_std)) {
                throw ParameterError("fir_noise_std: must be non-negative and finite");
            }
            break;
    }
}

GeneratedSeries generate_series(const GeneratorConfig& g, std::size_t n, std::uint64_t seed) {
    g.validate();
    switch (g.kind) {
        case DatasetKind::mackey_glass: {
            Series s = gen_mackey_glass(g.mg, n, g.mg_warmup, g.mg_init);
            return {g.standardize ? standardize(s) : std::move(s), std::nullopt};
        }
        case DatasetKind::lorenz: {
            Series s = gen_lorenz(g.lorenz, n, g.lorenz_warmup, g.lorenz_init);
            return {g.standardize ? standardize(s) : std::move(s), std::nullopt};
        }
        case DatasetKind::fir: {
            FirProcess p = gen_fir_process(g.fir_coeffs, n, seed);
            // Distinct stream for the observation noise.
            Series desired = add_white_noise(p.desired, g.fir_noise_std, seed ^ 0x9e3779b97f4a7c15ULL);
            return {std::move(p.input), std::move(desired)};
        }
    }
    throw ConfigError("dataset: unknown kind");
}

Dataset make_dataset(const GeneratorConfig& g, std::size_t rows, std::size_t order,
                     std::size_t horizon, std::uint64_t seed) {
    if (rows == 0) throw ParameterError("rows: must be at least 1");
    if (order == 0) throw ParameterError("order: must be at least 1");
    const GeneratedSeries s = generate_series(g, rows + order - 1 + horizon, seed);
    return s.desired ? embed(s.input, *s.desired, order, horizon) : embed(s.input, order, horizon);
}

std::size_t guard_gap(std::size_t order, std::size_t horizon) {
    return order + horizon - 1;
}

void ExperimentConfig::validate() const {
    generator.validate();
    if (order == 0) throw ConfigError("order_L: must be at least 1");
    if (train_sizes.empty()) throw ConfigError("train_sizes: must not be empty");
    for (std::size_t i = 0; i < train_sizes.size(); ++i) {
        if (train_sizes[i] == 0) throw ConfigError("train_sizes: entries must be positive");
        if (i > 0 && train_sizes[i] <= train_sizes[i - 1]) {
            throw ConfigError("train_sizes: must be strictly ascending");
        }
    }
    if (folds < 2) throw ConfigError(fmt::format("folds: must be at least 2 (got {})", folds));
    if (test_size == 0) throw ConfigError("test_size: must be at least 1");
    if (methods.empty()) throw ConfigError("methods: must name at least one method");
    for (std::size_t i = 0; i < methods.size(); ++i) {
        if (methods[i].name.empty()) throw ConfigError(fmt::format("methods[{}].name: must not be empty", i));
        for (std::size_t j = 0; j < i; ++j) {
            if (methods[j].name == methods[i].name) {
                throw ConfigError(fmt::format("methods: duplicate name '{}'", methods[i].name));
            }
        }
        if (const auto* f = std::get_if<FwfMethod>(&methods[i].config)) {
            FwfConfig c = f->config;
            c.order = order;
            c.horizon = horizon;
            c.validate();
        }
    }
}

std::size_t ExperimentConfig::required_rows() const {
    return folds * test_size + train_sizes.back() + 2 * guard_gap(order, horizon);
}

std::vector<Split> kfold(const Dataset& data, std::size_t folds, std::size_t test_size,
                         std::uint64_t seed, std::size_t min_train) {
    const std::size_t rows = data.rows();
    if (folds < 2) throw ParameterError(fmt::format("folds must be at least 2 (got {})", folds));
    if (test_size == 0) throw ParameterError("test_size must be at least 1");
    if (rows < folds * test_size) {
        throw ParameterError(fmt::format("{} rows cannot hold {} test blocks of {}", rows, folds, test_size));
    }
    const std::size_t stride = rows / folds;
    const std::size_t gap = guard_gap(data.order(), data.horizon());
    const auto& ti = data.time_index();

    std::mt19937_64 rng(seed);
    std::vector<Split> out;
    out.reserve(folds);
    for (std::size_t f = 0; f < folds; ++f) {
        std::uniform_int_distribution<std::size_t> offset(0, stride - test_size);
        const std::size_t start = f * stride + offset(rng);
        Split s;
        s.test.resize(test_size);
        for (std::size_t j = 0; j < test_size; ++j) s.test[j] = start + j;

        std::size_t lo_t = ti[start];
        std::size_t hi_t = ti[start];
        for (std::size_t r : s.test) {
            lo_t = std::min(lo_t, ti[r]);
            hi_t = std::max(hi_t, ti[r]);
        }
        for (std::size_t i = 0; i < rows; ++i) {
            if (i >= start && i < start + test_size) continue;
            const std::size_t t = ti[i];
            const bool clear = t + gap < lo_t || t > hi_t + gap;
            if (clear) s.train.push_back(i);
        }
        if (s.train.size() < min_train) {
            throw ParameterError(fmt::format("fold {} keeps {} training rows but {} are required", f,
                                             s.train.size(), min_train));
        }
        out.push_back(std::move(s));
    }
    return out;
}

bool split_is_leak_free(const Dataset& data, const Split& split) {
    if (split.test.empty()) return true;
    // Row i touches raw samples [t - L + 1, t + h].
    const std::size_t before = data.order() - 1;
    const std::size_t after = data.horizon();
    const auto& ti = data.time_index();
    auto first = [&](std::size_t r) { return ti[r] >= before ? ti[r] - before : 0; };
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    spans.reserve(split.test.size());
    for (std::size_t r : split.test) spans.emplace_back(first(r), ti[r] + after);
    for (std::size_t r : split.train) {
        const std::size_t a = first(r);
        const std::size_t b = ti[r] + after;
        for (const auto& [lo, hi] : spans) {
            if (a <= hi && b >= lo) return false;
        }
    }
    return true;
}

double mse(std::span<const double> pred, std::span<const double> target) {
    if (pred.size() != target.size()) {
        throw DimensionError(fmt::format("mse: {} predictions but {} targets", pred.size(), target.size()));
    }
    if (pred.empty()) throw DimensionError("mse: needs at least one sample");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pred.size());
}

std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("FWF_THREADS")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

MethodConfig bind_shape(const MethodConfig& m, std::size_t order, std::size_t horizon) {
    MethodConfig out = m;
    if (auto* f = std::get_if<FwfMethod>(&out)) {
        f->config.order = order;
        f->config.horizon = horizon;
    }
    return out;
}

ResultRow run_cell(const MethodSpec& method, const MethodConfig& config, const Dataset& data,
                   const Split& split, std::size_t n_train, std::size_t fold) {
    ResultRow row;
    row.method = method.name;
    row.n_train = n_train;
    row.fold = fold;
    try {
        const std::span<const std::size_t> train_rows(split.train.data(), n_train);
        const Dataset train = data.subset(train_rows);
        const Dataset test = data.subset(split.test);

        const auto t0 = Clock::now();
        const Model model = fit_method(config, train);
        row.fit_seconds = seconds_since(t0);

        std::vector<double> pred(test.rows());
        const auto t1 = Clock::now();
        for (std::size_t i = 0; i < test.rows(); ++i) pred[i] = predict(model, test.window(i));
        row.predict_us_per_query = seconds_since(t1) * 1e6 / static_cast<double>(test.rows());

        row.mse = mse(pred, std::span<const double>(test.targets().data(), test.rows()));
        if (!std::isfinite(row.mse)) throw RangeError("prediction produced a non-finite MSE");
    } catch (const std::exception& e) {
        row.mse = std::numeric_limits<double>::quiet_NaN();
        row.fit_seconds = std::numeric_limits<double>::quiet_NaN();
        row.predict_us_per_query = std::numeric_limits<double>::quiet_NaN();
        row.error = e.what();
        if (row.error.empty()) row.error = "unknown error";
    }
    return row;
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const Dataset data = make_dataset(cfg.generator, cfg.required_rows(), cfg.order, cfg.horizon, cfg.seed);
    const std::vector<Split> splits = kfold(data, cfg.folds, cfg.test_size, cfg.seed, cfg.train_sizes.back());
    for (std::size_t f = 0; f < splits.size(); ++f) {
        if (!split_is_leak_free(data, splits[f])) {
            throw Error(fmt::format("fold {}: training rows overlap the test block", f));
        }
    }

    std::vector<MethodConfig> bound;
    bound.reserve(cfg.methods.size());
    for (const auto& m : cfg.methods) bound.push_back(bind_shape(m.config, cfg.order, cfg.horizon));

    const std::size_t n_sizes = cfg.train_sizes.size();
    const std::size_t cells = cfg.methods.size() * n_sizes * cfg.folds;
    ResultTable table;
    table.rows.resize(cells);

    auto cell = [&](std::size_t c) {
        const std::size_t f = c % cfg.folds;
        const std::size_t s = (c / cfg.folds) % n_sizes;
        const std::size_t m = c / (cfg.folds * n_sizes);
        table.rows[c] = run_cell(cfg.methods[m], bound[m], data, splits[f], cfg.train_sizes[s], f);
    };

    const std::size_t workers = std::min(resolve_threads(cfg.threads), cells);
    if (workers <= 1) {
        for (std::size_t c = 0; c < cells; ++c) cell(c);
        return table;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t c = next++; c < cells; c = next++) cell(c);
        });
    }
    for (auto& t : pool) t.join();
    return table;
}

std::vector<AggregateRow> aggregate(const ResultTable& t) {
    std::vector<AggregateRow> out;
    std::map<std::pair<std::string, std::size_t>, std::size_t> slot;
    std::vector<std::vector<double>> values;
    for (const auto& r : t.rows) {
        const auto key = std::make_pair(r.method, r.n_train);
        auto it = slot.find(key);
        if (it == slot.end()) {
            it = slot.emplace(key, out.size()).first;
            AggregateRow a;
            a.method = r.method;
            a.n_train = r.n_train;
            out.push_back(a);
            values.emplace_back();
        }
        if (r.ok()) {
            values[it->second].push_back(r.mse);
        } else {
            ++out[it->second].errors;
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto& v = values[i];
        out[i].count = v.size();
        if (v.empty()) continue;
        double sum = 0.0;
        for (double x : v) sum += x;
        const double mean = sum / static_cast<double>(v.size());
        out[i].mean = mean;
        if (v.size() == 1) {
            out[i].std = 0.0;
            continue;
        }
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        out[i].std = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DimensionError("loglog_slope: x and y differ in length");
    if (x.size() < 2) throw DimensionError("loglog_slope: needs at least two points");
    const std::size_t n = x.size();
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("loglog_slope: values must be positive");
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) throw DomainError("loglog_slope: x values must not all be equal");
    return sxy / sxx;
}

TimingTable timing_scaling(const MethodSpec& method, std::span<const std::size_t> sizes,
                           const GeneratorConfig& gen, std::size_t order, std::size_t horizon,
                           std::uint64_t seed, const TimingOptions& opts) {
    if (sizes.size() < 3) throw ParameterError("timing_scaling: needs at least 3 sizes");
    for (std::size_t i = 1; i < sizes.size(); ++i) {
        if (sizes[i] <= sizes[i - 1]) throw ParameterError("timing_scaling: sizes must be strictly ascending");
    }
    if (sizes.front() == 0) throw ParameterError("timing_scaling: sizes must be positive");
    if (opts.reps == 0 || opts.queries == 0) throw ParameterError("timing_scaling: reps and queries must be positive");

    const MethodConfig config = bind_shape(method.config, order, horizon);
    const Dataset all = make_dataset(gen, sizes.back() + opts.queries, order, horizon, seed);
    const Dataset queries = all.slice(sizes.back(), opts.queries);

    TimingTable table;
    table.method = method.name;
    volatile double sink = 0.0;
    for (std::size_t n : sizes) {
        const Dataset train = all.slice(0, n);
        std::vector<double> fit_times;
        std::optional<Model> model;
        for (std::size_t r = 0; r < opts.reps; ++r) {
            const auto t0 = Clock::now();
            Model m = fit_method(config, train);
            fit_times.push_back(seconds_since(t0));
            model.emplace(std::move(m));
            if (fit_times.back() > opts.fit_budget_seconds) break;
        }
        std::vector<double> predict_times;
        for (std::size_t r = 0; r < opts.reps; ++r) {
            double acc = 0.0;
            const auto t0 = Clock::now();
            for (std::size_t q = 0; q < queries.rows(); ++q) acc += predict(*model, queries.window(q));
            predict_times.push_back(seconds_since(t0) / static_cast<double>(queries.rows()));
            sink = sink + acc;
        }
        table.points.push_back({n, median(fit_times), median(predict_times), fit_times.size()});
    }
    std::vector<double> xs;
    std::vector<double> fit;
    std::vector<double> pred;
    for (const auto& p : table.points) {
        xs.push_back(static_cast<double>(p.n_train));
        fit.push_back(std::max(p.fit_seconds, 1e-9));
        pred.push_back(std::max(p.predict_seconds_per_query, 1e-12));
    }
    table.fit_slope = loglog_slope(xs, fit);
    table.predict_slope = loglog_slope(xs, pred);
    return table;
}

void write_results_csv(std::ostream& os, const ResultTable& t) {
    os << "method,n_train,fold,mse,fit_seconds,predict_us_per_query\n";
    for (const auto& r : t.rows) {
        os << r.method << ',' << r.n_train << ',' << r.fold << ',' << fmt_double(r.mse) << ','
           << fmt_double(r.fit_seconds) << ',' << fmt_double(r.predict_us_per_query) << '\n';
    }
}

void write_timing_csv(std::ostream& os, std::span<const TimingTable> timings) {
    os << "method,n_train,fit_seconds,predict_us_per_query,fit_reps\n";
    for (const auto& t : timings) {
        for (const auto& p : t.points) {
            os << t.method << ',' << p.n_train << ',' << fmt_double(p.fit_seconds) << ','
               << fmt_double(p.predict_seconds_per_query * 1e6) << ',' << p.fit_reps << '\n';
        }
    }
}

nlohmann::json summary_json(const ResultTable& t, std::span<const TimingTable> timings) {
    nlohmann::json j;
    j["aggregate"] = nlohmann::json::array();
    for (const auto& a : aggregate(t)) {
        j["aggregate"].push_back({{"method", a.method},
                                  {"n_train", a.n_train},
                                  {"folds_ok", a.count},
                                  {"folds_failed", a.errors},
                                  {"mse_mean", number_or_null(a.mean)},
                                  {"mse_std", number_or_null(a.std)}});
    }
    j["errors"] = nlohmann::json::array();
    for (const auto& r : t.rows) {
        if (!r.ok()) {
            j["errors"].push_back({{"method", r.method}, {"n_train", r.n_train}, {"fold", r.fold}, {"message", r.error}});
        }
    }
    j["timing"] = nlohmann::json::array();
    for (const auto& tt : timings) {
        j["timing"].push_back({{"method", tt.method},
                               {"fit_slope", number_or_null(tt.fit_slope)},
                               {"predict_slope", number_or_null(tt.predict_slope)}});
    }
    return j;
}

}  // namespace fwf
