#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "fwf/evalbench.hpp"
#include "fwf/io.hpp"
#include "fwf/methods.hpp"

namespace fwf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Parsed `fit` / `tune` configuration.
struct FitConfig {
    MethodSpec method;
    std::size_t order = 10;
    std::size_t horizon = 1;
    bool standardize = true;
};

struct GenerateConfig {
    GeneratorConfig generator;
    std::size_t n = 1000;
    std::uint64_t seed = 0;
};

struct TimingConfig {
    bool enabled = true;
    /// Empty means train_sizes.
    std::vector<std::size_t> sizes;
    /// Method names to time; empty means every configured method.
    std::vector<std::string> methods;
    TimingOptions options;
};

struct BenchConfig {
    ExperimentConfig experiment;
    TimingConfig timing;
};

// Parsers throw ConfigError whose message starts with the offending field path.
GeneratorConfig parse_generator(const nlohmann::json& j, const std::string& path = "generator");
MethodSpec parse_method(const nlohmann::json& j, const std::string& path = "method");
GenerateConfig parse_generate_config(const nlohmann::json& j);
FitConfig parse_fit_config(const nlohmann::json& j);
BenchConfig parse_bench_config(const nlohmann::json& j);

nlohmann::json to_json(const GeneratorConfig& g);
nlohmann::json to_json(const MethodSpec& m);
/// Effective configuration with every default filled in.
nlohmann::json to_json(const BenchConfig& b);

/// Predictions of a saved model on a raw input series (and optional desired
/// series) over rows [start, start + count) of the embedding.
struct Prediction {
    std::vector<std::size_t> index;
    std::vector<double> prediction;
    std::vector<double> target;
    double mse = 0.0;
};

Prediction apply_model(const SavedModel& m, const Series& input, const Series* desired,
                       std::size_t start = 0, std::size_t count = static_cast<std::size_t>(-1));

/// Entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fwf::cli
