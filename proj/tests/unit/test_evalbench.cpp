#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "fwf/errors.hpp"
#include "fwf/evalbench.hpp"
#include "fwf/signal_gen.hpp"

using namespace fwf;

namespace {

Dataset ramp_dataset(std::size_t rows, std::size_t order, std::size_t horizon) {
    std::vector<double> v(rows + order - 1 + horizon);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(0.1 * static_cast<double>(i));
    return embed(Series(v), order, horizon);
}

// Raw sample span of a row: [t - L + 1, t + h].
std::pair<long long, long long> span_of(const Dataset& d, std::size_t r) {
    const auto t = static_cast<long long>(d.time_index()[r]);
    return {t - static_cast<long long>(d.order()) + 1, t + static_cast<long long>(d.horizon())};
}

ExperimentConfig small_fir_experiment() {
    ExperimentConfig c;
    c.generator.kind = DatasetKind::fir;
    c.order = 3;
    c.horizon = 0;
    c.train_sizes = {200, 400, 800};
    c.folds = 5;
    c.test_size = 200;
    c.methods = {{"wiener", WienerMethod{}}};
    c.seed = 7;
    c.threads = 1;
    return c;
}

std::vector<double> mse_column(const ResultTable& t) {
    std::vector<double> v;
    for (const auto& r : t.rows) v.push_back(r.mse);
    return v;
}

}  // namespace

TEST_CASE("kfold on 10 rows with 5 folds of 2") {
    const Dataset d = ramp_dataset(10, 1, 0);
    const auto splits = kfold(d, 5, 2, 0);
    REQUIRE(splits.size() == 5);
    std::set<std::size_t> all_test;
    for (const auto& s : splits) {
        CHECK(s.test.size() == 2);
        CHECK(s.test[1] == s.test[0] + 1);
        for (std::size_t r : s.test) CHECK(all_test.insert(r).second);
        for (std::size_t r : s.train) CHECK(std::find(s.test.begin(), s.test.end(), r) == s.test.end());
        CHECK(s.train.size() == 8);
    }
    CHECK(all_test.size() == 10);
}

TEST_CASE("kfold with two folds on minimal data") {
    const Dataset d = ramp_dataset(6, 1, 0);
    const auto splits = kfold(d, 2, 3, 4);
    REQUIRE(splits.size() == 2);
    CHECK(splits[0].test == std::vector<std::size_t>{0, 1, 2});
    CHECK(splits[1].test == std::vector<std::size_t>{3, 4, 5});
}

TEST_CASE("kfold argument checks") {
    const Dataset d = ramp_dataset(50, 3, 1);
    CHECK_THROWS_AS(kfold(d, 1, 5, 0), ParameterError);
    CHECK_THROWS_AS(kfold(d, 5, 0, 0), ParameterError);
    CHECK_THROWS_AS(kfold(d, 5, 11, 0), ParameterError);
    CHECK_THROWS_AS(kfold(d, 5, 5, 0, 1000), ParameterError);
    CHECK_NOTHROW(kfold(d, 5, 5, 0, 20));
}

TEST_CASE("splits never share raw samples between train and test") {
    for (std::size_t horizon : {0u, 1u, 10u}) {
        const Dataset d = ramp_dataset(3000, 10, horizon);
        for (std::uint64_t seed : {0u, 1u, 99u}) {
            const auto splits = kfold(d, 5, 200, seed);
            std::set<std::size_t> seen;
            for (const auto& s : splits) {
                CHECK(split_is_leak_free(d, s));
                for (std::size_t r : s.test) CHECK(seen.insert(r).second);
                // Independent interval check; every row clear of the block is kept.
                const long long tlo = span_of(d, s.test.front()).first;
                const long long thi = span_of(d, s.test.back()).second;
                std::size_t clear = 0;
                for (std::size_t r = 0; r < d.rows(); ++r) {
                    const auto [a, b] = span_of(d, r);
                    if (b < tlo || a > thi) ++clear;
                }
                CHECK(s.train.size() == clear);
                for (std::size_t r : s.train) {
                    const auto [a, b] = span_of(d, r);
                    CHECK((b < tlo || a > thi));
                }
                CHECK(std::is_sorted(s.train.begin(), s.train.end()));
            }
        }
    }
}

TEST_CASE("a split with an adjacent training row is reported as leaky") {
    const Dataset d = ramp_dataset(100, 4, 1);
    Split s;
    for (std::size_t r = 40; r < 50; ++r) s.test.push_back(r);
    s.train = {10, 20};
    CHECK(split_is_leak_free(d, s));
    s.train.push_back(52);
    CHECK_FALSE(split_is_leak_free(d, s));
    s.train = {36};  // window reaches forward into the block via its target
    CHECK_FALSE(split_is_leak_free(d, s));
    s.train = {35};
    CHECK(split_is_leak_free(d, s));
}

TEST_CASE("mse") {
    const std::vector<double> a{1.0, 2.0, 3.0};
    CHECK(mse(a, a) == 0.0);
    CHECK(mse(std::vector<double>{0.0}, std::vector<double>{2.0}) == 4.0);
    CHECK_THROWS_AS(mse(a, std::vector<double>{1.0}), DimensionError);
    CHECK_THROWS_AS(mse(std::vector<double>{}, std::vector<double>{}), DimensionError);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    std::vector<double> p(100), t(100);
    for (std::size_t i = 0; i < 100; ++i) {
        p[i] = nd(rng);
        t[i] = nd(rng);
    }
    double s = 0.0;
    for (std::size_t i = 0; i < 100; ++i) s += (p[i] - t[i]) * (p[i] - t[i]);
    CHECK(std::abs(mse(p, t) - s / 100.0) <= 1e-15 * s / 100.0);
}

TEST_CASE("experiment config validation names the field") {
    ExperimentConfig c = small_fir_experiment();
    CHECK_NOTHROW(c.validate());
    CHECK(c.required_rows() == 5 * 200 + 800 + 2 * guard_gap(3, 0));

    auto expect = [](ExperimentConfig bad, const std::string& field) {
        try {
            bad.validate();
            FAIL("expected a configuration error for " << field);
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find(field) != std::string::npos);
        }
    };
    ExperimentConfig b = c;
    b.folds = 1;
    expect(b, "folds");
    b = c;
    b.train_sizes = {400, 200};
    expect(b, "train_sizes");
    b = c;
    b.methods.clear();
    expect(b, "methods");
    b = c;
    b.methods.push_back({"wiener", KlmsMethod{}});
    expect(b, "duplicate");
    b = c;
    b.generator.kind = DatasetKind::mackey_glass;
    b.generator.mg.tau_delay = -1.0;
    expect(b, "tau_delay");
}

TEST_CASE("wiener on FIR data reaches the noise floor out of sample") {
    const ExperimentConfig c = small_fir_experiment();
    const ResultTable t = run_experiment(c);
    REQUIRE(t.rows.size() == 15);
    const double floor = c.generator.fir_noise_std * c.generator.fir_noise_std;
    double sum = 0.0;
    for (const auto& r : t.rows) {
        CHECK(r.ok());
        CHECK(r.mse >= 0.0);
        CHECK(std::isfinite(r.fit_seconds));
        if (r.n_train == 800) sum += r.mse;
    }
    CHECK(sum / 5.0 < 2.0 * floor);
}

TEST_CASE("rows are ordered by method, size and fold") {
    ExperimentConfig c = small_fir_experiment();
    c.methods = {{"b", WienerMethod{}}, {"a", KrlsMethod{}}};
    c.train_sizes = {100, 200, 300};
    const ResultTable t = run_experiment(c);
    REQUIRE(t.rows.size() == 30);
    std::size_t k = 0;
    for (const char* m : {"b", "a"}) {
        for (std::size_t n : {100u, 200u, 300u}) {
            for (std::size_t f = 0; f < 5; ++f, ++k) {
                CHECK(t.rows[k].method == m);
                CHECK(t.rows[k].n_train == n);
                CHECK(t.rows[k].fold == f);
            }
        }
    }
}

TEST_CASE("identical configs give identical mse columns, whatever the thread count") {
    ExperimentConfig c = small_fir_experiment();
    c.methods = {{"wiener", WienerMethod{}}, {"krls", KrlsMethod{}}, {"fwf", FwfMethod{}}};
    c.train_sizes = {100, 200, 300};
    const auto a = mse_column(run_experiment(c));
    const auto b = mse_column(run_experiment(c));
    c.threads = 3;
    const auto p = mse_column(run_experiment(c));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] == b[i]);
        CHECK(a[i] == p[i]);
    }
    c.seed = 8;
    const auto other = mse_column(run_experiment(c));
    CHECK(other != a);
}

TEST_CASE("a failing method leaves error rows and spares the others") {
    ExperimentConfig c = small_fir_experiment();
    FwfMethod broken;
    broken.config.sigma_input = 1e12;  // V is all ones to working precision
    broken.config.alpha = 0.5;
    broken.config.ridge = 0.0;
    c.methods = {{"broken", broken}, {"wiener", WienerMethod{}}};
    const ResultTable t = run_experiment(c);
    std::size_t errors = 0;
    for (const auto& r : t.rows) {
        if (r.method == "broken") {
            CHECK_FALSE(r.ok());
            CHECK(std::isnan(r.mse));
            ++errors;
        } else {
            CHECK(r.ok());
        }
    }
    CHECK(errors == 15);
    for (const auto& a : aggregate(t)) {
        if (a.method == "broken") {
            CHECK(a.count == 0);
            CHECK(a.errors == 5);
            CHECK(std::isnan(a.mean));
        } else {
            CHECK(a.count == 5);
            CHECK(std::isfinite(a.mean));
        }
    }
    const auto j = summary_json(t, {});
    CHECK(j["errors"].size() == 15);
    CHECK(j["errors"][0]["message"].get<std::string>().find("positive definite") != std::string::npos);
    CHECK(j["aggregate"][0]["mse_mean"].is_null());
}

TEST_CASE("aggregate matches a recomputation from the rows") {
    ResultTable t;
    const std::vector<double> v{0.1, 0.4, 0.25, 0.3};
    for (std::size_t f = 0; f < v.size(); ++f) t.rows.push_back({"m", 10, f, v[f], 0.0, 0.0, ""});
    t.rows.push_back({"m", 10, 4, std::nan(""), std::nan(""), std::nan(""), "boom"});
    t.rows.push_back({"m", 20, 0, 0.7, 0.0, 0.0, ""});
    const auto agg = aggregate(t);
    REQUIRE(agg.size() == 2);
    const double mean = (0.1 + 0.4 + 0.25 + 0.3) / 4.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    CHECK(agg[0].count == 4);
    CHECK(agg[0].errors == 1);
    CHECK(agg[0].mean == mean);
    CHECK(agg[0].std == std::sqrt(ss / 3.0));
    CHECK(agg[1].count == 1);
    CHECK(agg[1].mean == 0.7);
    CHECK(agg[1].std == 0.0);
}

TEST_CASE("loglog slope") {
    const std::vector<double> x{1e3, 1e4, 1e5};
    CHECK(loglog_slope(x, std::vector<double>{1.0, 100.0, 10000.0}) == doctest::Approx(2.0));
    CHECK(loglog_slope(x, std::vector<double>{5.0, 5.0, 5.0}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(loglog_slope(x, std::vector<double>{1.0, 0.0, 1.0}), DomainError);
    CHECK_THROWS_AS(loglog_slope(std::vector<double>{1.0}, std::vector<double>{1.0}), DimensionError);
}

TEST_CASE("timing scaling table") {
    GeneratorConfig g;
    g.kind = DatasetKind::fir;
    const std::vector<std::size_t> sizes{200, 400, 800};
    TimingOptions o;
    o.reps = 3;
    o.queries = 50;
    const TimingTable t = timing_scaling({"klms", KlmsMethod{}}, sizes, g, 3, 0, 1, o);
    CHECK(t.method == "klms");
    REQUIRE(t.points.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(t.points[i].n_train == sizes[i]);
        CHECK(t.points[i].fit_reps == 3);
        CHECK(t.points[i].fit_seconds > 0.0);
    }
    CHECK(std::isfinite(t.fit_slope));

    o.fit_budget_seconds = 0.0;
    const TimingTable b = timing_scaling({"klms", KlmsMethod{}}, sizes, g, 3, 0, 1, o);
    for (const auto& p : b.points) CHECK(p.fit_reps == 1);

    CHECK_THROWS_AS(timing_scaling({"w", WienerMethod{}}, std::vector<std::size_t>{100, 200}, g, 3, 0, 1, o),
                    ParameterError);
    CHECK_THROWS_AS(timing_scaling({"w", WienerMethod{}}, std::vector<std::size_t>{100, 300, 200}, g, 3, 0, 1, o),
                    ParameterError);
}

TEST_CASE("result csv") {
    ResultTable t;
    t.rows.push_back({"fwf", 500, 2, 0.125, 1.5, 3.0, ""});
    t.rows.push_back({"krls", 500, 0, std::nan(""), std::nan(""), std::nan(""), "bad"});
    std::ostringstream os;
    write_results_csv(os, t);
    CHECK(os.str() ==
          "method,n_train,fold,mse,fit_seconds,predict_us_per_query\n"
          "fwf,500,2,0.125,1.5,3\n"
          "krls,500,0,nan,nan,nan\n");
}

TEST_CASE("thread count resolution") {
    CHECK(resolve_threads(3) == 3);
    CHECK(resolve_threads(0) >= 1);
}
