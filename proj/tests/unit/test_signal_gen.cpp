#include <doctest.h>

#include <cmath>
#include <random>

#include "../common/oracles.hpp"
#include "fwf/errors.hpp"
#include "fwf/signal_gen.hpp"

using namespace fwf;

TEST_CASE("series rejects empty and non-finite input") {
    CHECK_THROWS_AS(Series(std::vector<double>{}), DimensionError);
    CHECK_THROWS_AS(Series({1.0, NAN}), DomainError);
    CHECK_THROWS_AS(Series({INFINITY}), DomainError);
    const Series s({1.0, 2.0}, 0.5);
    CHECK(s.size() == 2);
    CHECK(s.dt() == 0.5);
}

TEST_CASE("mackey-glass at the equilibrium history stays at 1") {
    const Series s = gen_mackey_glass(MGParams{}, 500, 300, 1.0);
    CHECK(s.size() == 500);
    for (double v : s.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("mackey-glass default run is bounded and varies") {
    const Series s = gen_mackey_glass(MGParams{}, 5000, 3000, 1.2);
    double lo = 1e9;
    double hi = -1e9;
    for (double v : s.values()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(lo > 0.0);
    CHECK(hi < 2.0);
    CHECK(hi - lo > 0.5);
    CHECK(s.dt() == doctest::Approx(0.6));
}

TEST_CASE("mackey-glass matches an independent integrator") {
    const MGParams p;
    const Series s = gen_mackey_glass(p, 400, 300, 1.2);
    const auto ref = oracle::mackey_glass(p.beta, p.gamma, p.n_exp, p.tau_delay, p.step, p.downsample, 400, 300, 1.2);
    REQUIRE(ref.size() == s.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(ref[i] - s[i]));
    CHECK(worst < 1e-9);
}

TEST_CASE("mackey-glass autocorrelation decays beyond lag 50") {
    const Series s = standardize(gen_mackey_glass(MGParams{}, 2000, 3000, 1.2));
    const auto& x = s.values();
    double largest = -1.0;
    for (std::size_t lag = 51; lag < 400; ++lag) {
        double num = 0.0;
        for (std::size_t t = lag; t < x.size(); ++t) num += x[t] * x[t - lag];
        largest = std::max(largest, num / static_cast<double>(x.size() - lag));
    }
    CHECK(largest < 0.99);
}

TEST_CASE("mackey-glass parameter validation names the field") {
    MGParams p;
    p.tau_delay = -1.0;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("tau_delay"), ParameterError);
    MGParams q;
    q.tau_delay = 30.05;
    CHECK_THROWS_AS(q.validate(), ParameterError);
    CHECK_THROWS_AS(gen_mackey_glass(MGParams{}, 10, 100, 1.2), ParameterError);
    CHECK_THROWS_AS(gen_mackey_glass(MGParams{}, 0, 3000, 1.2), ParameterError);
}

TEST_CASE("mackey-glass divergence reports the step") {
    MGParams p;
    p.gamma = 1e154;  // stiff decay far beyond the RK4 stability limit
    try {
        (void)gen_mackey_glass(p, 10, 300, 1.2);
        FAIL("expected divergence");
    } catch (const IntegrationDivergenceError& e) {
        CHECK(e.step() >= 1);
        CHECK(std::string(e.what()).find("step") != std::string::npos);
    }
}

TEST_CASE("lorenz fixed points") {
    const Series zero = gen_lorenz(LorenzParams{}, 100, 10, {0.0, 0.0, 0.0});
    for (double v : zero.values()) CHECK(v == 0.0);

    const double c = std::sqrt(72.0);
    const Series fixed = gen_lorenz(LorenzParams{}, 100, 0, {c, c, 27.0});
    for (double v : fixed.values()) CHECK(std::abs(v - c) < 1e-6);
}

TEST_CASE("lorenz step matches an independent RK4") {
    const LorenzParams p;
    const LorenzState next = lorenz_rk4_step({1.0, 1.0, 1.0}, p);
    const auto ref = oracle::lorenz_rk4({1.0, 1.0, 1.0}, p.step, p.sigma, p.rho, p.beta);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(next[i] - ref[i]) < 1e-10);

    // gen_lorenz composes the same step.
    oracle::State3 s{1.0, 1.0, 1.0};
    for (int k = 0; k < 7 * 5 + 20; ++k) s = oracle::lorenz_rk4(s, p.step, p.sigma, p.rho, p.beta);
    const Series x = gen_lorenz(p, 8, 20, {1.0, 1.0, 1.0});
    CHECK(std::abs(x[7] - s[0]) < 1e-10);
}

TEST_CASE("lorenz local error shrinks like step^5") {
    LorenzParams p;
    const LorenzState s0{1.0, 2.0, 20.0};
    auto error_at = [&](double h) {
        p.step = h;
        const LorenzState one = lorenz_rk4_step(s0, p);
        p.step = h / 2;
        const LorenzState two = lorenz_rk4_step(lorenz_rk4_step(s0, p), p);
        double e = 0.0;
        for (int i = 0; i < 3; ++i) e = std::max(e, std::abs(one[i] - two[i]));
        return e;
    };
    const double ratio = error_at(0.01) / error_at(0.005);
    CHECK(ratio > 20.0);  // 2^5 = 32 asymptotically
    CHECK(ratio < 45.0);
}

TEST_CASE("fir process follows its definition") {
    const double one = 1.0;
    const FirProcess id = gen_fir_process(std::span<const double>(&one, 1), 200, 3);
    CHECK(id.input.values() == id.desired.values());

    const std::vector<double> delay{0.0, 0.5};
    const FirProcess d = gen_fir_process(delay, 300, 7);
    CHECK(d.desired[0] == 0.0);
    for (std::size_t t = 1; t < 300; ++t) CHECK(d.desired[t] == 0.5 * d.input[t - 1]);

    const std::vector<double> c{0.3, -0.2, 0.1};
    const FirProcess f = gen_fir_process(c, 500, 11);
    for (std::size_t t = 0; t < 500; ++t) {
        double want = 0.0;
        for (std::size_t k = 0; k < 3 && k <= t; ++k) want += c[k] * f.input[t - k];
        CHECK(f.desired[t] == doctest::Approx(want).epsilon(1e-15));
    }
    CHECK(gen_fir_process(c, 50, 11).input.values() == gen_fir_process(c, 50, 11).input.values());
    CHECK(gen_fir_process(c, 50, 11).input.values() != gen_fir_process(c, 50, 12).input.values());
    CHECK_THROWS_AS(gen_fir_process(std::vector<double>{}, 10, 1), ParameterError);
}

TEST_CASE("fir coefficients recovered by a least-squares refit") {
    const std::vector<double> c{0.3, -0.2, 0.1};
    const FirProcess f = gen_fir_process(c, 10000, 5);
    // Normal equations over lagged inputs, solved by the dense oracle.
    std::vector<std::vector<double>> a(3, std::vector<double>(3, 0.0));
    std::vector<double> b(3, 0.0);
    for (std::size_t t = 2; t < 10000; ++t) {
        for (std::size_t i = 0; i < 3; ++i) {
            b[i] += f.desired[t] * f.input[t - i];
            for (std::size_t j = 0; j < 3; ++j) a[i][j] += f.input[t - i] * f.input[t - j];
        }
    }
    const auto w = oracle::dense_solve(a, b);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(w[i] - c[i]) < 1e-2);

    // Unit variance input.
    double ss = 0.0;
    for (double v : f.input.values()) ss += v * v;
    CHECK(ss / 10000.0 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("white noise is seeded") {
    const Series s(std::vector<double>(1000, 2.0));
    const Series a = add_white_noise(s, 0.5, 9);
    const Series b = add_white_noise(s, 0.5, 9);
    CHECK(a.values() == b.values());
    double m = 0.0;
    for (double v : a.values()) m += v;
    CHECK(m / 1000.0 == doctest::Approx(2.0).epsilon(0.05));
    CHECK(add_white_noise(s, 0.0, 1).values() == s.values());
    CHECK_THROWS_AS(add_white_noise(s, -1.0, 1), ParameterError);
}

TEST_CASE("embed layout") {
    const Series s({1, 2, 3, 4, 5});
    const Dataset d = embed(s, 2, 1);
    REQUIRE(d.rows() == 3);
    CHECK(d.order() == 2);
    CHECK(d.horizon() == 1);
    const double w[3][2] = {{2, 1}, {3, 2}, {4, 3}};
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(d.window(i)[0] == w[i][0]);
        CHECK(d.window(i)[1] == w[i][1]);
        CHECK(d.target(i) == 3.0 + static_cast<double>(i));
        CHECK(d.time_index()[i] == i + 1);
    }
    CHECK(embed(Series({1, 2, 3}), 2, 1).rows() == 1);
    CHECK_THROWS_AS(embed(Series({1, 2}), 2, 1), DimensionError);
    CHECK_THROWS_AS(embed(Series({1, 2, 3}), Series({1, 2}), 2, 0), AlignmentError);
}

TEST_CASE("embed windows are backward slices of the series") {
    const Series s = gen_mackey_glass(MGParams{}, 300, 3000, 1.2);
    const Dataset d = embed(s, 10, 1);
    CHECK(d.rows() == 300 - 9 - 1);
    for (std::size_t tau = 0; tau < 10; ++tau) CHECK(d.window(0)[tau] == s[9 - tau]);
    for (std::size_t i = 0; i < d.rows(); ++i) {
        for (std::size_t tau = 0; tau < 10; ++tau) CHECK(d.window(i)[tau] == s[i + 9 - tau]);
        CHECK(d.target(i) == s[i + 10]);
    }
    // Column 0 plus the first L-1 samples rebuilds the series.
    std::vector<double> rebuilt(s.values().begin(), s.values().begin() + 9);
    for (std::size_t i = 0; i < d.rows(); ++i) rebuilt.push_back(d.window(i)[0]);
    rebuilt.push_back(d.target(d.rows() - 1));
    CHECK(rebuilt == s.values());
}

TEST_CASE("dataset subset and slice keep time indices") {
    const Dataset d = embed(Series({1, 2, 3, 4, 5, 6, 7}), 2, 0);
    const std::vector<std::size_t> rows{4, 0};
    const Dataset s = d.subset(rows);
    CHECK(s.rows() == 2);
    CHECK(s.time_index()[0] == 5);
    CHECK(s.window(1)[0] == 2.0);
    const Dataset sl = d.slice(2, 3);
    CHECK(sl.rows() == 3);
    CHECK(sl.time_index()[0] == 3);
    CHECK_THROWS(d.slice(5, 2));
}

TEST_CASE("standardize") {
    CHECK_THROWS_AS(standardize(Series({1, 1, 1})), DegenerateSeriesError);
    const Series s = standardize(Series({0, 2}));
    CHECK(s[0] == -1.0);
    CHECK(s[1] == 1.0);
    CHECK(s.mean() == 1.0);
    CHECK(s.std() == 1.0);

    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal(3.0, 7.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> v(500 + 37 * trial);
        for (auto& x : v) x = normal(rng);
        const Series z = standardize(Series(v));
        double m = 0.0;
        for (double x : z.values()) m += x;
        m /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : z.values()) var += (x - m) * (x - m);
        var /= static_cast<double>(v.size());
        CHECK(std::abs(m) < 1e-9);
        CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-9);
    }
    const Series again = standardize_with(Series({0, 2}), 1.0, 1.0);
    CHECK(again.values() == s.values());
}
