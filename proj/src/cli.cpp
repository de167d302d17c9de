#include "fwf/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "fwf/errors.hpp"

namespace fwf::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// Typed access to one JSON object; every read records the key so leftover
/// (misspelled) keys can be reported.
class Fields {
public:
    Fields(json j, std::string path) : j_(std::move(j)), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(fmt::format("{}: expected a JSON object", label()));
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key); }

    const json* take(const std::string& key) {
        used_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    std::optional<double> opt_number(const std::string& key) {
        const json* v = take(key);
        if (!v || v->is_null()) return std::nullopt;
        return number_value(*v, at(key));
    }
    double number(const std::string& key, double def) { return opt_number(key).value_or(def); }

    std::size_t count(const std::string& key, std::size_t def) {
        const json* v = take(key);
        return v ? count_value(*v, at(key)) : def;
    }

    std::uint64_t u64(const std::string& key, std::uint64_t def) {
        const json* v = take(key);
        if (!v) return def;
        if (!v->is_number_unsigned()) throw ConfigError(fmt::format("{}: expected a non-negative integer", at(key)));
        return v->get<std::uint64_t>();
    }

    bool flag(const std::string& key, bool def) {
        const json* v = take(key);
        if (!v) return def;
        if (!v->is_boolean()) throw ConfigError(fmt::format("{}: expected true or false", at(key)));
        return v->get<bool>();
    }

    std::optional<std::string> opt_text(const std::string& key) {
        const json* v = take(key);
        if (!v) return std::nullopt;
        if (!v->is_string()) throw ConfigError(fmt::format("{}: expected a string", at(key)));
        return v->get<std::string>();
    }
    std::string text(const std::string& key, const std::string& def) { return opt_text(key).value_or(def); }

    std::vector<double> numbers(const std::string& key, std::vector<double> def) {
        const json* v = take(key);
        if (!v) return def;
        if (!v->is_array()) throw ConfigError(fmt::format("{}: expected an array of numbers", at(key)));
        std::vector<double> out;
        for (std::size_t i = 0; i < v->size(); ++i) out.push_back(number_value((*v)[i], fmt::format("{}[{}]", at(key), i)));
        return out;
    }

    std::vector<std::size_t> counts(const std::string& key, std::vector<std::size_t> def) {
        const json* v = take(key);
        if (!v) return def;
        if (!v->is_array()) throw ConfigError(fmt::format("{}: expected an array of integers", at(key)));
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < v->size(); ++i) out.push_back(count_value((*v)[i], fmt::format("{}[{}]", at(key), i)));
        return out;
    }

    Fields object(const std::string& key) {
        const json* v = take(key);
        return Fields(v ? *v : json::object(), at(key));
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!used_.count(key)) throw ConfigError(fmt::format("{}: unknown field", at(key)));
        }
    }

    std::string label() const { return path_.empty() ? "config" : path_; }

private:
    static double number_value(const json& v, const std::string& where) {
        if (!v.is_number()) throw ConfigError(fmt::format("{}: expected a number", where));
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(fmt::format("{}: must be finite", where));
        return d;
    }

    static std::size_t count_value(const json& v, const std::string& where) {
        if (!v.is_number_unsigned()) throw ConfigError(fmt::format("{}: expected a non-negative integer", where));
        return v.get<std::size_t>();
    }

    json j_;
    std::string path_;
    std::set<std::string> used_;
};

/// Re-raises a validation failure as a ConfigError prefixed with `path`.
template <class F>
void validated(const std::string& path, F&& f) {
    try {
        f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(fmt::format("{}.{}", path, e.what()));
    }
}

void require_positive(double v, const std::string& where) {
    if (!(v > 0.0)) throw ConfigError(fmt::format("{}: must be positive (got {})", where, v));
}

std::string valid_methods_list() {
    std::string s;
    for (const auto& k : valid_method_kinds()) s += (s.empty() ? "" : ", ") + k;
    return s;
}

}  // namespace

GeneratorConfig parse_generator(const json& j, const std::string& path) {
    Fields f(j, path);
    GeneratorConfig g;
    const std::string kind = f.text("dataset", std::string(to_string(g.kind)));
    validated(path, [&] { g.kind = dataset_kind_from_string(kind); });
    g.standardize = f.flag("standardize", g.standardize);

    Fields mg = f.object("mackey_glass");
    g.mg.beta = mg.number("beta", g.mg.beta);
    g.mg.gamma = mg.number("gamma", g.mg.gamma);
    g.mg.n_exp = mg.number("n_exp", g.mg.n_exp);
    g.mg.tau_delay = mg.number("tau_delay", g.mg.tau_delay);
    g.mg.step = mg.number("step", g.mg.step);
    g.mg.downsample = mg.count("downsample", g.mg.downsample);
    g.mg_warmup = mg.count("warmup", g.mg_warmup);
    g.mg_init = mg.number("init", g.mg_init);
    mg.finish();

    Fields lz = f.object("lorenz");
    g.lorenz.sigma = lz.number("sigma", g.lorenz.sigma);
    g.lorenz.rho = lz.number("rho", g.lorenz.rho);
    g.lorenz.beta = lz.number("beta", g.lorenz.beta);
    g.lorenz.step = lz.number("step", g.lorenz.step);
    g.lorenz.downsample = lz.count("downsample", g.lorenz.downsample);
    g.lorenz_warmup = lz.count("warmup", g.lorenz_warmup);
    const auto init = lz.numbers("init", {g.lorenz_init.begin(), g.lorenz_init.end()});
    if (init.size() != 3) throw ConfigError(fmt::format("{}: expected 3 numbers", lz.at("init")));
    std::copy(init.begin(), init.end(), g.lorenz_init.begin());
    lz.finish();

    Fields fir = f.object("fir");
    g.fir_coeffs = fir.numbers("coeffs", g.fir_coeffs);
    g.fir_noise_std = fir.number("noise_std", g.fir_noise_std);
    fir.finish();
    f.finish();

    switch (g.kind) {
        case DatasetKind::mackey_glass:
            validated(path + ".mackey_glass", [&] { g.mg.validate(); });
            if (g.mg_warmup < g.mg.delay_slots()) {
                throw ConfigError(fmt::format("{}.mackey_glass.warmup: {} steps do not cover the {} delay steps",
                                              path, g.mg_warmup, g.mg.delay_slots()));
            }
            break;
        case DatasetKind::lorenz:
            validated(path + ".lorenz", [&] { g.lorenz.validate(); });
            break;
        case DatasetKind::fir:
            if (g.fir_coeffs.empty()) throw ConfigError(fmt::format("{}.fir.coeffs: must not be empty", path));
            if (g.fir_noise_std < 0.0) throw ConfigError(fmt::format("{}.fir.noise_std: must be non-negative", path));
            break;
    }
    validated(path, [&] { g.validate(); });
    return g;
}

MethodSpec parse_method(const json& j, const std::string& path) {
    if (j.is_string()) {
        const std::string kind = j.get<std::string>();
        const auto m = method_from_kind(kind);
        if (!m) {
            throw ConfigError(fmt::format("{}: unknown method '{}' (valid methods: {})", path, kind, valid_methods_list()));
        }
        return {kind, *m};
    }
    Fields f(j, path);
    const auto kind = f.opt_text("kind");
    if (!kind) throw ConfigError(fmt::format("{}: missing field (valid methods: {})", f.at("kind"), valid_methods_list()));
    const auto base = method_from_kind(*kind);
    if (!base) {
        throw ConfigError(fmt::format("{}: unknown method '{}' (valid methods: {})", f.at("kind"), *kind,
                                      valid_methods_list()));
    }
    MethodSpec spec{f.text("name", *kind), *base};
    if (spec.name.empty()) throw ConfigError(fmt::format("{}: must not be empty", f.at("name")));

    if (auto* m = std::get_if<FwfMethod>(&spec.config)) {
        FwfConfig& c = m->config;
        const json* sigma = f.take("sigma_input");
        bool search = false;
        if (sigma && sigma->is_string()) {
            const std::string mode = sigma->get<std::string>();
            if (mode == "auto") {
                search = true;
            } else if (mode != "silverman") {
                throw ConfigError(fmt::format("{}: expected a number, \"auto\" or \"silverman\"", f.at("sigma_input")));
            }
        } else if (sigma && !sigma->is_null()) {
            if (!sigma->is_number()) {
                throw ConfigError(fmt::format("{}: expected a number, \"auto\" or \"silverman\"", f.at("sigma_input")));
            }
            c.sigma_input = sigma->get<double>();
            require_positive(*c.sigma_input, f.at("sigma_input"));
        }
        c.sigma_weight = f.opt_number("sigma_weight");
        c.alpha = f.opt_number("alpha");
        c.k_neighbors = f.count("k_neighbors", c.k_neighbors);
        c.ridge = f.opt_number("ridge");
        c.alpha_grid = f.numbers("alpha_grid", c.alpha_grid);
        const bool grid_given = f.has("sigma_grid");
        c.sigma_grid = f.numbers("sigma_grid", {});
        if (search && !grid_given) c.sigma_grid = default_sigma_grid();
        if (grid_given && !search) {
            throw ConfigError(fmt::format("{}: only used when sigma_input is \"auto\"", f.at("sigma_grid")));
        }
        if (grid_given && c.sigma_grid.empty()) {
            throw ConfigError(fmt::format("{}: must not be empty", f.at("sigma_grid")));
        }
        if (c.alpha_grid.empty() && !c.alpha) throw ConfigError(fmt::format("{}: must not be empty", f.at("alpha_grid")));
        validated(path, [&] { c.validate(); });
    } else if (auto* m = std::get_if<WienerMethod>(&spec.config)) {
        m->ridge = f.opt_number("ridge");
        if (m->ridge && *m->ridge < 0.0) throw ConfigError(fmt::format("{}: must be non-negative", f.at("ridge")));
    } else if (auto* m = std::get_if<KlmsMethod>(&spec.config)) {
        m->eta = f.number("eta", m->eta);
        require_positive(m->eta, f.at("eta"));
        m->sigma = f.opt_number("sigma");
        if (m->sigma) require_positive(*m->sigma, f.at("sigma"));
    } else {
        double* lambda = nullptr;
        std::optional<double>* sigma = nullptr;
        if (auto* k = std::get_if<KrlsMethod>(&spec.config)) {
            lambda = &k->lambda;
            sigma = &k->sigma;
        } else {
            auto& r = std::get<KrrMethod>(spec.config);
            lambda = &r.lambda;
            sigma = &r.sigma;
        }
        *lambda = f.number("lambda", *lambda);
        if (*lambda < 0.0) throw ConfigError(fmt::format("{}: must be non-negative", f.at("lambda")));
        *sigma = f.opt_number("sigma");
        if (*sigma) require_positive(**sigma, f.at("sigma"));
    }
    f.finish();
    return spec;
}

GenerateConfig parse_generate_config(const json& j) {
    Fields f(j, "");
    GenerateConfig c;
    c.generator = parse_generator(f.take("generator") ? j.at("generator") : json::object(), "generator");
    c.n = f.count("n", c.n);
    if (c.n == 0) throw ConfigError("n: must be at least 1");
    c.seed = f.u64("seed", c.seed);
    f.finish();
    return c;
}

FitConfig parse_fit_config(const json& j) {
    Fields f(j, "");
    FitConfig c;
    const json* method = f.take("method");
    if (!method) throw ConfigError(fmt::format("method: missing field (valid methods: {})", valid_methods_list()));
    c.method = parse_method(*method, "method");
    c.order = f.count("order", c.order);
    c.horizon = f.count("horizon", c.horizon);
    c.standardize = f.flag("standardize", c.standardize);
    f.finish();
    if (c.order == 0) throw ConfigError("order: must be at least 1");
    if (auto* m = std::get_if<FwfMethod>(&c.method.config)) {
        m->config.order = c.order;
        m->config.horizon = c.horizon;
    }
    return c;
}

BenchConfig parse_bench_config(const json& j) {
    Fields f(j, "");
    BenchConfig b;
    ExperimentConfig& e = b.experiment;
    e.generator = parse_generator(f.take("generator") ? j.at("generator") : json::object(), "generator");
    e.order = f.count("order", e.order);
    e.horizon = f.count("horizon", e.horizon);
    e.train_sizes = f.counts("train_sizes", e.train_sizes);
    e.folds = f.count("folds", e.folds);
    e.test_size = f.count("test_size", e.test_size);
    e.seed = f.u64("seed", e.seed);
    e.threads = f.count("threads", e.threads);
    const json* methods = f.take("methods");
    if (!methods) throw ConfigError(fmt::format("methods: missing field (valid methods: {})", valid_methods_list()));
    if (!methods->is_array()) throw ConfigError("methods: expected an array");
    for (std::size_t i = 0; i < methods->size(); ++i) {
        e.methods.push_back(parse_method((*methods)[i], fmt::format("methods[{}]", i)));
    }

    Fields t = f.object("timing");
    b.timing.enabled = t.flag("enabled", b.timing.enabled);
    b.timing.sizes = t.counts("sizes", {});
    const json* tm = t.take("methods");
    if (tm) {
        if (!tm->is_array()) throw ConfigError("timing.methods: expected an array of method names");
        for (std::size_t i = 0; i < tm->size(); ++i) {
            if (!(*tm)[i].is_string()) throw ConfigError(fmt::format("timing.methods[{}]: expected a string", i));
            b.timing.methods.push_back((*tm)[i].get<std::string>());
        }
    }
    b.timing.options.reps = t.count("reps", b.timing.options.reps);
    b.timing.options.queries = t.count("queries", b.timing.options.queries);
    if (const auto budget = t.opt_number("fit_budget_seconds")) {
        require_positive(*budget, "timing.fit_budget_seconds");
        b.timing.options.fit_budget_seconds = *budget;
    }
    t.finish();
    f.finish();

    validated("experiment", [&] {
        try {
            e.validate();
        } catch (const ConfigError& err) {
            throw ParameterError(err.what());
        }
    });
    if (b.timing.enabled) {
        const auto& sizes = b.timing.sizes.empty() ? e.train_sizes : b.timing.sizes;
        if (sizes.size() < 3) throw ConfigError("timing.sizes: at least 3 sizes are needed for a slope");
        for (std::size_t i = 1; i < sizes.size(); ++i) {
            if (sizes[i] <= sizes[i - 1]) throw ConfigError("timing.sizes: must be strictly ascending");
        }
        if (sizes.front() == 0) throw ConfigError("timing.sizes: entries must be positive");
        if (b.timing.options.reps < 5) throw ConfigError("timing.reps: at least 5 repetitions are required");
        if (b.timing.options.queries == 0) throw ConfigError("timing.queries: must be at least 1");
        for (const auto& name : b.timing.methods) {
            const bool known = std::any_of(e.methods.begin(), e.methods.end(),
                                           [&](const MethodSpec& m) { return m.name == name; });
            if (!known) throw ConfigError(fmt::format("timing.methods: '{}' is not a configured method", name));
        }
    }
    return b;
}

json to_json(const GeneratorConfig& g) {
    return {{"dataset", std::string(to_string(g.kind))},
            {"standardize", g.standardize},
            {"mackey_glass",
             {{"beta", g.mg.beta},
              {"gamma", g.mg.gamma},
              {"n_exp", g.mg.n_exp},
              {"tau_delay", g.mg.tau_delay},
              {"step", g.mg.step},
              {"downsample", g.mg.downsample},
              {"warmup", g.mg_warmup},
              {"init", g.mg_init}}},
            {"lorenz",
             {{"sigma", g.lorenz.sigma},
              {"rho", g.lorenz.rho},
              {"beta", g.lorenz.beta},
              {"step", g.lorenz.step},
              {"downsample", g.lorenz.downsample},
              {"warmup", g.lorenz_warmup},
              {"init", std::vector<double>(g.lorenz_init.begin(), g.lorenz_init.end())}}},
            {"fir", {{"coeffs", g.fir_coeffs}, {"noise_std", g.fir_noise_std}}}};
}

namespace {

json optional_json(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

}  // namespace

json to_json(const MethodSpec& m) {
    json j{{"kind", std::string(method_kind(m.config))}, {"name", m.name}};
    if (const auto* f = std::get_if<FwfMethod>(&m.config)) {
        const FwfConfig& c = f->config;
        if (c.sigma_input) {
            j["sigma_input"] = *c.sigma_input;
        } else if (!c.sigma_grid.empty()) {
            j["sigma_input"] = "auto";
            j["sigma_grid"] = c.sigma_grid;
        } else {
            j["sigma_input"] = "silverman";
        }
        j["sigma_weight"] = optional_json(c.sigma_weight);
        j["alpha"] = optional_json(c.alpha);
        j["k_neighbors"] = c.k_neighbors;
        j["ridge"] = optional_json(c.ridge);
        j["alpha_grid"] = c.alpha_grid;
    } else if (const auto* w = std::get_if<WienerMethod>(&m.config)) {
        j["ridge"] = optional_json(w->ridge);
    } else if (const auto* k = std::get_if<KlmsMethod>(&m.config)) {
        j["eta"] = k->eta;
        j["sigma"] = optional_json(k->sigma);
    } else if (const auto* k = std::get_if<KrlsMethod>(&m.config)) {
        j["lambda"] = k->lambda;
        j["sigma"] = optional_json(k->sigma);
    } else if (const auto* k = std::get_if<KrrMethod>(&m.config)) {
        j["lambda"] = k->lambda;
        j["sigma"] = optional_json(k->sigma);
    }
    return j;
}

json to_json(const BenchConfig& b) {
    const ExperimentConfig& e = b.experiment;
    json methods = json::array();
    for (const auto& m : e.methods) methods.push_back(to_json(m));
    json timing{{"enabled", b.timing.enabled},
                {"sizes", b.timing.sizes.empty() ? e.train_sizes : b.timing.sizes},
                {"methods", b.timing.methods},
                {"reps", b.timing.options.reps},
                {"queries", b.timing.options.queries}};
    timing["fit_budget_seconds"] = std::isfinite(b.timing.options.fit_budget_seconds)
                                       ? json(b.timing.options.fit_budget_seconds)
                                       : json(nullptr);
    return {{"generator", to_json(e.generator)},
            {"order", e.order},
            {"horizon", e.horizon},
            {"train_sizes", e.train_sizes},
            {"folds", e.folds},
            {"test_size", e.test_size},
            {"seed", e.seed},
            {"threads", e.threads},
            {"methods", methods},
            {"timing", timing}};
}

Prediction apply_model(const SavedModel& m, const Series& input, const Series* desired, std::size_t start,
                       std::size_t count) {
    const Series& target_raw = desired ? *desired : input;
    const Dataset raw = embed(input, target_raw, m.order, m.horizon);
    const Standardization& st = m.standardization;
    const Dataset scaled = st.enabled ? embed(standardize_with(input, st.input_mean, st.input_std),
                                              standardize_with(target_raw, st.target_mean, st.target_std),
                                              m.order, m.horizon)
                                      : raw;
    if (start >= raw.rows()) {
        throw ParameterError(fmt::format("start row {} is past the {} available rows", start, raw.rows()));
    }
    count = std::min(count, raw.rows() - start);
    if (count == 0) throw ParameterError("the prediction range is empty");

    Prediction p;
    p.index.reserve(count);
    p.prediction.reserve(count);
    p.target.reserve(count);
    for (std::size_t i = start; i < start + count; ++i) {
        double y = predict(m.model, scaled.window(i));
        if (st.enabled) y = y * st.target_std + st.target_mean;
        p.index.push_back(i);
        p.prediction.push_back(y);
        p.target.push_back(raw.target(i));
    }
    p.mse = mse(p.prediction, p.target);
    return p;
}

namespace {

using Clock = std::chrono::steady_clock;

/// Failure that maps directly to an exit code.
struct Exit {
    int code;
    std::string message;
};

json read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Exit{kExitConfig, fmt::format("cannot open config file '{}'", path)};
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Exit{kExitConfig, fmt::format("config file '{}' is not valid JSON: {}", path, e.what())};
    }
}

template <class T, class F>
T config_stage(F&& f) {
    try {
        return f();
    } catch (const Exit&) {
        throw;
    } catch (const std::exception& e) {
        throw Exit{kExitConfig, e.what()};
    }
}

Series read_series(const std::string& path) {
    try {
        return read_series_csv(fs::path(path));
    } catch (const std::exception& e) {
        throw Exit{kExitRuntime, e.what()};
    }
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    out << text;
    if (!out) throw IoError(fmt::format("failed while writing '{}'", path.string()));
}

std::string series_csv_text(const Series& s) {
    std::ostringstream os;
    write_series_csv(os, s);
    return os.str();
}

fs::path desired_path_for(const fs::path& out) {
    fs::path p = out;
    p.replace_filename(out.stem().string() + "_desired" + out.extension().string());
    return p;
}

void print_series_summary(std::ostream& out, const char* label, const Series& s) {
    const auto& v = s.values();
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    out << fmt::format("{}: samples {} mean {} std {} min {} max {}\n", label, v.size(), format_double(mean),
                       format_double(std::sqrt(var)), format_double(*lo), format_double(*hi));
}

struct Scaled {
    Series input;
    std::optional<Series> desired;
    Standardization st;
};

Scaled scale_inputs(const Series& input, const Series* desired, bool enabled) {
    Scaled s{input, desired ? std::optional<Series>(*desired) : std::nullopt, {}};
    if (!enabled) return s;
    s.st.enabled = true;
    s.input = standardize(input);
    s.st.input_mean = s.input.mean();
    s.st.input_std = s.input.std();
    if (desired) {
        s.desired = standardize(*desired);
        s.st.target_mean = s.desired->mean();
        s.st.target_std = s.desired->std();
    } else {
        s.st.target_mean = s.st.input_mean;
        s.st.target_std = s.st.input_std;
    }
    return s;
}

Dataset training_data(const Scaled& s, const FitConfig& cfg) {
    const Series& target = s.desired ? *s.desired : s.input;
    return embed(s.input, target, cfg.order, cfg.horizon);
}

void check_lengths(const Series& input, const Series* desired, std::size_t order, std::size_t horizon) {
    if (desired && desired->size() != input.size()) {
        throw Exit{kExitConfig, fmt::format("series has {} samples but the desired series has {}", input.size(),
                                            desired->size())};
    }
    if (input.size() < order + horizon) {
        throw Exit{kExitConfig, fmt::format("series of {} samples yields no rows for order {} and horizon {}",
                                            input.size(), order, horizon)};
    }
}

struct Options {
    std::string config;
    std::string out;
    std::string series;
    std::string desired;
    std::string model;
    std::optional<std::uint64_t> seed;
};

int cmd_generate(const Options& o, std::ostream& out) {
    GenerateConfig cfg = config_stage<GenerateConfig>([&] { return parse_generate_config(read_config(o.config)); });
    if (o.seed) cfg.seed = *o.seed;
    const fs::path out_path(o.out);
    const bool fir = cfg.generator.kind == DatasetKind::fir;
    const fs::path desired_path = o.desired.empty() ? desired_path_for(out_path) : fs::path(o.desired);

    std::string input_text;
    std::string desired_text;
    try {
        const GeneratedSeries g = generate_series(cfg.generator, cfg.n, cfg.seed);
        input_text = series_csv_text(g.input);
        print_series_summary(out, fir ? "input" : "series", g.input);
        if (g.desired) {
            desired_text = series_csv_text(*g.desired);
            print_series_summary(out, "desired", *g.desired);
        }
        write_text_file(out_path, input_text);
        out << "wrote " << out_path.string() << '\n';
        if (fir) {
            write_text_file(desired_path, desired_text);
            out << "wrote " << desired_path.string() << '\n';
        }
    } catch (const std::exception& e) {
        throw Exit{kExitRuntime, e.what()};
    }
    return kExitOk;
}

void print_model(std::ostream& out, const SavedModel& sm) {
    out << "method " << model_kind(sm.model) << '\n';
    if (const auto* f = std::get_if<FwfModel>(&sm.model)) {
        const FwfParams& p = f->params();
        out << fmt::format("sigma_input {}\nsigma_weight {}\nalpha {}\nk_neighbors {}\nridge {}\nbias {}\n",
                           format_double(p.sigma_input), format_double(p.sigma_weight), format_double(p.alpha),
                           p.k_neighbors, format_double(p.ridge), format_double(f->bias()));
    } else if (const auto* w = std::get_if<WienerModel>(&sm.model)) {
        // Weights in the units of the raw series.
        const double scale = sm.standardization.enabled
                                 ? sm.standardization.target_std / sm.standardization.input_std
                                 : 1.0;
        out << "weights";
        for (Eigen::Index i = 0; i < w->weights.size(); ++i) out << ' ' << format_double(w->weights[i] * scale);
        out << '\n';
    } else if (const auto* k = std::get_if<KafModel>(&sm.model)) {
        out << fmt::format("centers {}\nsigma {}\n", k->size(), format_double(k->sigma.sigma()));
    }
}

int cmd_fit(const Options& o, std::ostream& out) {
    const FitConfig cfg = config_stage<FitConfig>([&] { return parse_fit_config(read_config(o.config)); });
    const Series input = read_series(o.series);
    const std::optional<Series> desired = o.desired.empty() ? std::nullopt : std::optional<Series>(read_series(o.desired));
    const Series* dptr = desired ? &*desired : nullptr;
    check_lengths(input, dptr, cfg.order, cfg.horizon);

    try {
        const Scaled scaled = scale_inputs(input, dptr, cfg.standardize);
        const Dataset data = training_data(scaled, cfg);
        const auto t0 = Clock::now();
        SavedModel sm{fit_method(cfg.method.config, data), cfg.order, cfg.horizon, scaled.st};
        const double fit_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        const Prediction p = apply_model(sm, input, dptr);
        save_model(o.out, sm);
        print_model(out, sm);
        out << "training_rows " << data.rows() << '\n';
        out << "training_mse " << format_double(p.mse) << '\n';
        out << "fit_seconds " << format_double(fit_seconds) << '\n';
        out << "wrote " << o.out << '\n';
    } catch (const Exit&) {
        throw;
    } catch (const std::exception& e) {
        throw Exit{kExitRuntime, e.what()};
    }
    return kExitOk;
}

struct PredictConfig {
    std::optional<std::size_t> order;
    std::optional<std::size_t> horizon;
    std::size_t start = 0;
    std::optional<std::size_t> count;
};

PredictConfig parse_predict_config(const json& j) {
    Fields f(j, "");
    PredictConfig c;
    if (f.has("order")) c.order = f.count("order", 0);
    if (f.has("horizon")) c.horizon = f.count("horizon", 0);
    c.start = f.count("start", 0);
    if (f.has("count")) c.count = f.count("count", 0);
    f.finish();
    if (c.count && *c.count == 0) throw ConfigError("count: zero-length prediction range");
    return c;
}

int cmd_predict(const Options& o, std::ostream& out) {
    const PredictConfig cfg = o.config.empty()
                                  ? PredictConfig{}
                                  : config_stage<PredictConfig>([&] { return parse_predict_config(read_config(o.config)); });
    SavedModel sm = [&] {
        try {
            return load_model(o.model);
        } catch (const std::exception& e) {
            throw Exit{kExitRuntime, e.what()};
        }
    }();
    if (cfg.order && *cfg.order != sm.order) {
        throw Exit{kExitConfig, fmt::format("configured order {} does not match the model order {}", *cfg.order, sm.order)};
    }
    if (cfg.horizon && *cfg.horizon != sm.horizon) {
        throw Exit{kExitConfig,
                   fmt::format("configured horizon {} does not match the model horizon {}", *cfg.horizon, sm.horizon)};
    }
    const Series input = read_series(o.series);
    const std::optional<Series> desired = o.desired.empty() ? std::nullopt : std::optional<Series>(read_series(o.desired));
    const Series* dptr = desired ? &*desired : nullptr;
    check_lengths(input, dptr, sm.order, sm.horizon);
    const std::size_t rows = input.size() - (sm.order - 1) - sm.horizon;
    if (cfg.start >= rows) {
        throw Exit{kExitConfig, fmt::format("start row {} leaves a zero-length range ({} rows available)", cfg.start, rows)};
    }

    try {
        const Prediction p = apply_model(sm, input, dptr, cfg.start, cfg.count.value_or(rows));
        std::ostringstream csv;
        csv << "index,prediction,target,squared_error\n";
        for (std::size_t i = 0; i < p.index.size(); ++i) {
            const double e = p.prediction[i] - p.target[i];
            csv << p.index[i] << ',' << format_double(p.prediction[i]) << ',' << format_double(p.target[i]) << ','
                << format_double(e * e) << '\n';
        }
        write_text_file(o.out, csv.str());
        out << fmt::format("rows {} mse {}\n", p.index.size(), format_double(p.mse));
    } catch (const std::exception& e) {
        throw Exit{kExitRuntime, e.what()};
    }
    return kExitOk;
}

int cmd_tune(const Options& o, std::ostream& out) {
    const FitConfig cfg = config_stage<FitConfig>([&] {
        FitConfig c = parse_fit_config(read_config(o.config));
        if (!std::holds_alternative<FwfMethod>(c.method.config)) {
            throw ConfigError(fmt::format("method: tune only applies to fwf (got '{}')", method_kind(c.method.config)));
        }
        return c;
    });
    const Series input = read_series(o.series);
    const std::optional<Series> desired = o.desired.empty() ? std::nullopt : std::optional<Series>(read_series(o.desired));
    const Series* dptr = desired ? &*desired : nullptr;
    check_lengths(input, dptr, cfg.order, cfg.horizon);

    try {
        const Scaled scaled = scale_inputs(input, dptr, cfg.standardize);
        const Dataset data = training_data(scaled, cfg);
        FwfConfig fc = std::get<FwfMethod>(cfg.method.config).config;
        const std::vector<double> alphas = fc.alpha ? std::vector<double>{*fc.alpha} : fc.alpha_grid;
        fc.alpha.reset();
        std::ostringstream csv;
        csv << "sigma_input,alpha,training_mse\n";
        double best_sigma = 0.0;
        double best_alpha = 0.0;
        double best_mse = 0.0;
        if (!fc.sigma_input && !fc.sigma_grid.empty()) {
            fc.alpha_grid = alphas;
            const BandwidthSearch bw = tune_bandwidth(data, fc);
            for (std::size_t s = 0; s < bw.sigma_grid.size(); ++s) {
                if (!bw.per_sigma[s]) continue;
                const AlphaSearch& a = *bw.per_sigma[s];
                for (std::size_t i = 0; i < a.grid.size(); ++i) {
                    csv << format_double(bw.sigma_grid[s]) << ',' << format_double(a.grid[i]) << ','
                        << format_double(a.grid_mse[i]) << '\n';
                }
            }
            best_sigma = bw.sigma_input;
            best_alpha = bw.alpha;
            best_mse = bw.training_mse;
        } else {
            const double sigma = fc.sigma_input ? *fc.sigma_input : silverman_sigma(data).sigma();
            fc.sigma_input = sigma;
            const AlphaSearch a = tune_alpha(data, fc, alphas);
            for (std::size_t i = 0; i < a.grid.size(); ++i) {
                csv << format_double(sigma) << ',' << format_double(a.grid[i]) << ',' << format_double(a.grid_mse[i])
                    << '\n';
            }
            best_sigma = sigma;
            best_alpha = a.alpha;
            best_mse = a.training_mse;
        }
        write_text_file(o.out, csv.str());
        out << fmt::format("best sigma_input {} alpha {} training_mse {} (standardized units)\n",
                           format_double(best_sigma), format_double(best_alpha), format_double(best_mse));
        out << "wrote " << o.out << '\n';
    } catch (const std::exception& e) {
        throw Exit{kExitRuntime, e.what()};
    }
    return kExitOk;
}

int cmd_bench(const Options& o, std::ostream& out, std::ostream& err) {
    BenchConfig cfg = config_stage<BenchConfig>([&] { return parse_bench_config(read_config(o.config)); });
    if (o.seed) cfg.experiment.seed = *o.seed;
    const fs::path dir(o.out);

    try {
        const ResultTable table = run_experiment(cfg.experiment);
        std::vector<TimingTable> timings;
        if (cfg.timing.enabled) {
            const auto& sizes = cfg.timing.sizes.empty() ? cfg.experiment.train_sizes : cfg.timing.sizes;
            for (const auto& m : cfg.experiment.methods) {
                const auto& names = cfg.timing.methods;
                if (!names.empty() && std::find(names.begin(), names.end(), m.name) == names.end()) continue;
                try {
                    timings.push_back(timing_scaling(m, sizes, cfg.experiment.generator, cfg.experiment.order,
                                                     cfg.experiment.horizon, cfg.experiment.seed, cfg.timing.options));
                } catch (const std::exception& e) {
                    err << fmt::format("timing for '{}' failed: {}\n", m.name, e.what());
                }
            }
        }

        std::ostringstream results;
        write_results_csv(results, table);
        std::ostringstream timing_csv;
        write_timing_csv(timing_csv, timings);
        fs::create_directories(dir);
        write_text_file(dir / "config.json", to_json(cfg).dump(2) + "\n");
        write_text_file(dir / "results.csv", results.str());
        write_text_file(dir / "timing.csv", timing_csv.str());
        write_text_file(dir / "summary.json", summary_json(table, timings).dump(2) + "\n");

        for (const auto& a : aggregate(table)) {
            out << fmt::format("{:<10} N={:<7} mse_mean {} mse_std {} failed {}\n", a.method, a.n_train,
                               format_double(a.mean), format_double(a.std), a.errors);
        }
        for (const auto& t : timings) {
            out << fmt::format("{:<10} fit_slope {} predict_slope {}\n", t.method, format_double(t.fit_slope),
                               format_double(t.predict_slope));
        }
        for (const auto& r : table.rows) {
            if (!r.ok()) err << fmt::format("{} N={} fold {}: {}\n", r.method, r.n_train, r.fold, r.error);
        }
        out << "wrote " << dir.string() << '\n';
    } catch (const std::exception& e) {
        throw Exit{kExitRuntime, e.what()};
    }
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Functional Wiener filter toolkit"};
    app.require_subcommand(1);
    Options o;
    std::uint64_t seed = 0;

    auto* gen = app.add_subcommand("generate", "Generate a synthetic series as CSV");
    gen->add_option("--config", o.config, "Generator config (JSON)")->required();
    gen->add_option("--out", o.out, "Output series CSV")->required();
    gen->add_option("--desired", o.desired, "Output path for the FIR desired series");
    auto* gen_seed = gen->add_option("--seed", seed, "Overrides the config seed");

    auto* fitc = app.add_subcommand("fit", "Fit a model to a series");
    fitc->add_option("--config", o.config, "Fit config (JSON)")->required();
    fitc->add_option("--series", o.series, "Input series CSV")->required();
    fitc->add_option("--desired", o.desired, "Desired series CSV (defaults to the input series)");
    fitc->add_option("--out", o.out, "Output model file")->required();

    auto* pred = app.add_subcommand("predict", "Apply a saved model to a series");
    pred->add_option("--model", o.model, "Model file")->required();
    pred->add_option("--series", o.series, "Input series CSV")->required();
    pred->add_option("--desired", o.desired, "Desired series CSV (defaults to the input series)");
    pred->add_option("--config", o.config, "Optional range/shape config (JSON)");
    pred->add_option("--out", o.out, "Output predictions CSV")->required();

    auto* bench = app.add_subcommand("bench", "Cross-validated benchmark and timing sweep");
    bench->add_option("--config", o.config, "Experiment config (JSON)")->required();
    bench->add_option("--out", o.out, "Output directory")->required();
    auto* bench_seed = bench->add_option("--seed", seed, "Overrides the config seed");

    auto* tune = app.add_subcommand("tune", "Training-MSE grid search for the FWF hyperparameters");
    tune->add_option("--config", o.config, "Fit config (JSON)")->required();
    tune->add_option("--series", o.series, "Input series CSV")->required();
    tune->add_option("--desired", o.desired, "Desired series CSV (defaults to the input series)");
    tune->add_option("--out", o.out, "Output grid CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }
    if (gen_seed->count() > 0 || bench_seed->count() > 0) o.seed = seed;

    try {
        if (gen->parsed()) return cmd_generate(o, out);
        if (fitc->parsed()) return cmd_fit(o, out);
        if (pred->parsed()) return cmd_predict(o, out);
        if (bench->parsed()) return cmd_bench(o, out, err);
        if (tune->parsed()) return cmd_tune(o, out);
    } catch (const Exit& e) {
        err << "error: " << e.message << '\n';
        return e.code;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitConfig;
}

}  // namespace fwf::cli
