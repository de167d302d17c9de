// End-to-end acceptance checks. One PASS/FAIL line per criterion; the exit
// status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "../common/properties.hpp"
#include "fwf/cli.hpp"
#include "fwf/evalbench.hpp"
#include "fwf/fwf_core.hpp"
#include "fwf/methods.hpp"
#include "fwf/signal_gen.hpp"

using namespace fwf;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned thresholds.
constexpr double kMgTrainMse = 1e-3;
constexpr double kMgTrainSeconds = 60.0;
constexpr double kOrderingSeconds = 300.0;
constexpr std::size_t kOrderingFoldWins = 4;
constexpr double kLorenzSeconds = 300.0;
constexpr double kFitSlopeLo = 0.7;
constexpr double kFitSlopeHi = 1.3;
constexpr double kFwfPredictSlopeMax = 0.5;
constexpr double kKlmsSlopeLo = 0.7;
constexpr double kKlmsSlopeHi = 1.3;
constexpr double kTimingSeconds = 600.0;
constexpr double kFirWeightTol = 1e-2;
constexpr double kFirSeconds = 10.0;

constexpr std::size_t kOrder = 10;
constexpr std::size_t kTrainRows = 2000;

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

FwfConfig fwf_auto(std::size_t horizon) {
    FwfConfig c;
    c.order = kOrder;
    c.horizon = horizon;
    c.k_neighbors = 2;
    c.sigma_grid = default_sigma_grid();
    return c;
}

const AggregateRow* find(const std::vector<AggregateRow>& agg, const std::string& method) {
    for (const auto& a : agg) {
        if (a.method == method) return &a;
    }
    return nullptr;
}

std::vector<double> fold_mse(const ResultTable& t, const std::string& method) {
    std::vector<double> out;
    for (const auto& r : t.rows) {
        if (r.method == method) out.push_back(r.mse);
    }
    return out;
}

Outcome mg_training_accuracy() {
    const auto t0 = Clock::now();
    GeneratorConfig g;
    const Series s = generate_series(g, kTrainRows + kOrder, 0).input;
    const Dataset d = embed(s, kOrder, 1);
    const FwfModel m = fit(d, fwf_auto(1));
    const double err = training_mse(m, d);
    const double secs = seconds_since(t0);
    return {err <= kMgTrainMse && secs < kMgTrainSeconds,
            fmt::format("rows {} sigma {:.4g} alpha {:.4g} training mse {:.4g} (<= {:g}), {:.1f} s (< {:g})", d.rows(),
                        m.params().sigma_input, m.params().alpha, err, kMgTrainMse, secs, kMgTrainSeconds)};
}

ExperimentConfig cv_config(DatasetKind kind, std::size_t horizon) {
    ExperimentConfig e;
    e.generator.kind = kind;
    e.order = kOrder;
    e.horizon = horizon;
    e.train_sizes = {kTrainRows};
    e.folds = 5;
    e.test_size = 200;
    e.seed = 1;
    e.methods.push_back({"fwf", FwfMethod{fwf_auto(horizon)}});
    e.methods.push_back({"wiener", WienerMethod{}});
    return e;
}

Outcome mg_ordering() {
    const auto t0 = Clock::now();
    ExperimentConfig e = cv_config(DatasetKind::mackey_glass, 1);
    e.methods.push_back({"krls", KrlsMethod{}});
    const ResultTable t = run_experiment(e);
    const auto agg = aggregate(t);
    const double krls = find(agg, "krls")->mean;
    const double fwf = find(agg, "fwf")->mean;
    const double wiener = find(agg, "wiener")->mean;
    const auto f = fold_mse(t, "fwf");
    const auto w = fold_mse(t, "wiener");
    std::size_t wins = 0;
    for (std::size_t i = 0; i < f.size(); ++i) wins += f[i] < w[i] ? 1 : 0;
    const double secs = seconds_since(t0);
    const bool pass = krls < fwf && fwf < wiener && wins >= kOrderingFoldWins && secs < kOrderingSeconds;
    return {pass, fmt::format("mean test mse krls {:.4g} fwf {:.4g} wiener {:.4g}; fwf < wiener in {}/{} folds, {:.1f} s",
                              krls, fwf, wiener, wins, f.size(), secs)};
}

Outcome lorenz_horizon() {
    const auto t0 = Clock::now();
    const ResultTable t = run_experiment(cv_config(DatasetKind::lorenz, 10));
    const auto agg = aggregate(t);
    const double fwf = find(agg, "fwf")->mean;
    const double wiener = find(agg, "wiener")->mean;
    const double secs = seconds_since(t0);
    return {fwf < wiener && secs < kLorenzSeconds,
            fmt::format("horizon 10 mean test mse fwf {:.4g} wiener {:.4g}, {:.1f} s", fwf, wiener, secs)};
}

Outcome complexity() {
    const auto t0 = Clock::now();
    const std::vector<std::size_t> sizes{1000, 10000, 100000};
    GeneratorConfig g;
    TimingOptions opts;
    opts.fit_budget_seconds = 20.0;
    FwfConfig fc;
    fc.order = kOrder;
    const TimingTable f = timing_scaling({"fwf", FwfMethod{fc}}, sizes, g, kOrder, 1, 0, opts);
    const TimingTable k = timing_scaling({"klms", KlmsMethod{}}, sizes, g, kOrder, 1, 0, opts);
    const double secs = seconds_since(t0);
    const bool pass = f.fit_slope >= kFitSlopeLo && f.fit_slope <= kFitSlopeHi &&
                      f.predict_slope < kFwfPredictSlopeMax && k.predict_slope >= kKlmsSlopeLo &&
                      k.predict_slope <= kKlmsSlopeHi && secs < kTimingSeconds;
    return {pass, fmt::format("fwf fit slope {:.3f} predict slope {:.3f}; klms predict slope {:.3f}; {:.1f} s",
                              f.fit_slope, f.predict_slope, k.predict_slope, secs)};
}

Outcome fir_recovery() {
    const auto t0 = Clock::now();
    const std::vector<double> coeffs{0.3, -0.2, 0.1};
    const std::size_t n = 100000;
    const FirProcess p = gen_fir_process(coeffs, n, 7);
    const Series noisy = add_white_noise(p.desired, 0.1, 8);
    const Dataset d = embed(p.input, noisy, coeffs.size(), 0);
    const WienerModel m = wiener_fit(d);
    double worst = 0.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        worst = std::max(worst, std::abs(m.weights[static_cast<Eigen::Index>(i)] - coeffs[i]));
    }
    const double secs = seconds_since(t0);
    return {worst <= kFirWeightTol && secs < kFirSeconds,
            fmt::format("weights [{:.5f}, {:.5f}, {:.5f}], worst error {:.2e} (<= {:g}), {:.2f} s", m.weights[0],
                        m.weights[1], m.weights[2], worst, kFirWeightTol, secs)};
}

Outcome properties() {
    std::string detail;
    bool pass = true;
    const auto results = props::all();
    for (const auto& r : results) {
        const bool ok = r.passed() && r.cases >= props::kDefaultCases;
        pass = pass && ok;
        if (!ok) detail += fmt::format("[{}: {} of {} failed, worst {:.3g}, {}] ", r.name, r.failures, r.cases,
                                       r.worst, r.first_failure);
    }
    if (pass) detail = fmt::format("{} suites x {} cases", results.size(), props::kDefaultCases);
    return {pass, detail};
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::string> mse_columns(const std::string& csv) {
    std::vector<std::string> out;
    std::istringstream is(csv);
    std::string line;
    while (std::getline(is, line)) {
        std::size_t pos = 0;
        for (int c = 0; c < 4 && pos != std::string::npos; ++c) pos = line.find(',', pos + 1);
        out.push_back(line.substr(0, pos));
    }
    return out;
}

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / fmt::format("fwf_accept_{}", std::random_device{}());
    fs::create_directories(dir);
    std::ofstream(dir / "bench.json") << R"({
        "generator": {"dataset": "mackey_glass"},
        "order": 10, "train_sizes": [300, 600], "folds": 3, "test_size": 100, "seed": 42,
        "methods": [{"kind": "fwf", "sigma_input": "auto"}, {"kind": "wiener"}, {"kind": "klms"},
                    {"kind": "krls"}, {"kind": "krr"}],
        "timing": {"enabled": false}
    })";
    std::vector<std::string> cols[2];
    int codes[2];
    for (int run = 0; run < 2; ++run) {
        const std::string cfg = (dir / "bench.json").string();
        const std::string out = (dir / fmt::format("run{}", run)).string();
        const char* argv[] = {"fwf", "bench", "--config", cfg.c_str(), "--out", out.c_str()};
        std::ostringstream so, se;
        codes[run] = cli::run(6, argv, so, se);
        cols[run] = mse_columns(read_file(fs::path(out) / "results.csv"));
    }
    fs::remove_all(dir);
    const bool pass = codes[0] == 0 && codes[1] == 0 && cols[0].size() > 1 && cols[0] == cols[1];
    return {pass, fmt::format("exit codes {} {}, {} result lines, mse columns {}", codes[0], codes[1], cols[0].size(),
                              cols[0] == cols[1] ? "identical" : "differ")};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"mackey-glass training mse", mg_training_accuracy},
        {"mackey-glass method ordering", mg_ordering},
        {"lorenz 10-step prediction", lorenz_horizon},
        {"complexity slopes", complexity},
        {"wiener fir recovery", fir_recovery},
        {"property suites", properties},
        {"bench determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    return failures;
}
