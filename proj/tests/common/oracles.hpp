#pragma once

// Straightforward reference implementations used to check the library.
// Nothing here calls into fwf except for plain data types.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

inline double gauss(double x, double y, double sigma) {
    const double d = x - y;
    return std::exp(-d * d / (2.0 * sigma * sigma));
}

/// (1/(N-tau)) sum_{t=tau}^{N-1} f(a[t], b[t-tau]) for tau = 0..L-1.
template <class F>
std::vector<double> lag_average(const std::vector<double>& a, const std::vector<double>& b, std::size_t order, F f) {
    const std::size_t n = a.size();
    std::vector<double> out(order, 0.0);
    for (std::size_t tau = 0; tau < order; ++tau) {
        double s = 0.0;
        for (std::size_t t = tau; t < n; ++t) s += f(a[t], b[t - tau]);
        out[tau] = s / static_cast<double>(n - tau);
    }
    return out;
}

inline std::vector<double> autocorrentropy(const std::vector<double>& x, std::size_t order, double sigma) {
    return lag_average(x, x, order, [sigma](double a, double b) { return gauss(a, b, sigma); });
}

inline std::vector<double> crosscorrentropy(const std::vector<double>& x, const std::vector<double>& z,
                                            std::size_t order, double sigma) {
    return lag_average(z, x, order, [sigma](double a, double b) { return gauss(a, b, sigma); });
}

inline std::vector<double> autocovariance(const std::vector<double>& x, std::size_t order) {
    return lag_average(x, x, order, [](double a, double b) { return a * b; });
}

inline std::vector<double> crosscovariance(const std::vector<double>& x, const std::vector<double>& z,
                                           std::size_t order) {
    return lag_average(z, x, order, [](double a, double b) { return a * b; });
}

/// Gaussian elimination with partial pivoting on a dense copy.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        }
        if (a[piv][c] == 0.0) throw std::runtime_error("singular system");
        std::swap(a[piv], a[c]);
        std::swap(b[piv], b[c]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
        x[i] = s / a[i][i];
    }
    return x;
}

/// Levinson recursion for the symmetric Toeplitz system T x = y with first
/// row r (r[0] on the diagonal).
inline std::vector<double> levinson(const std::vector<double>& r, const std::vector<double>& y) {
    const std::size_t n = r.size();
    std::vector<double> f{1.0 / r[0]};
    std::vector<double> x{y[0] / r[0]};
    for (std::size_t k = 1; k < n; ++k) {
        double ef = 0.0;
        for (std::size_t i = 0; i < k; ++i) ef += r[k - i] * f[i];
        // Backward vector of a symmetric Toeplitz matrix is the reversed forward vector.
        std::vector<double> fn(k + 1, 0.0);
        const double denom = 1.0 - ef * ef;
        for (std::size_t i = 0; i <= k; ++i) {
            const double fwd = i < k ? f[i] : 0.0;
            const double bwd = i > 0 ? f[k - i] : 0.0;
            fn[i] = (fwd - ef * bwd) / denom;
        }
        f = std::move(fn);
        double ex = 0.0;
        for (std::size_t i = 0; i < k; ++i) ex += r[k - i] * x[i];
        x.push_back(0.0);
        for (std::size_t i = 0; i <= k; ++i) x[i] += (y[k] - ex) * f[k - i];
    }
    return x;
}

struct Hit {
    std::size_t index;
    double dist2;
};

/// Exhaustive K-NN, ties by ascending index.
inline std::vector<Hit> linear_scan(const std::vector<std::vector<double>>& pts, const std::vector<double>& q,
                                    std::size_t k) {
    std::vector<Hit> all;
    all.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double d = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) d += (pts[i][j] - q[j]) * (pts[i][j] - q[j]);
        all.push_back({i, d});
    }
    std::sort(all.begin(), all.end(), [](const Hit& a, const Hit& b) {
        return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
    });
    all.resize(k);
    return all;
}

using State3 = std::array<double, 3>;

inline State3 lorenz_deriv(const State3& s, double sigma, double rho, double beta) {
    return {sigma * (s[1] - s[0]), s[0] * (rho - s[2]) - s[1], s[0] * s[1] - beta * s[2]};
}

inline State3 lorenz_rk4(const State3& s, double h, double sigma, double rho, double beta) {
    auto axpy = [](const State3& a, double c, const State3& b) {
        return State3{a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2]};
    };
    const State3 k1 = lorenz_deriv(s, sigma, rho, beta);
    const State3 k2 = lorenz_deriv(axpy(s, h / 2, k1), sigma, rho, beta);
    const State3 k3 = lorenz_deriv(axpy(s, h / 2, k2), sigma, rho, beta);
    const State3 k4 = lorenz_deriv(axpy(s, h, k3), sigma, rho, beta);
    State3 out;
    for (int i = 0; i < 3; ++i) out[i] = s[i] + h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    return out;
}

/// Mackey-Glass by RK4 over a flat history array; the delayed value at a
/// half step is the mean of the two neighbouring grid values.
inline std::vector<double> mackey_glass(double beta, double gamma, double n_exp, double tau, double h,
                                        std::size_t downsample, std::size_t n, std::size_t warmup, double init) {
    const auto lag = static_cast<std::size_t>(std::llround(tau / h));
    std::vector<double> hist(lag + 1, init);  // hist[j] = x at step j - lag
    auto f = [&](double x, double xd) { return beta * xd / (1.0 + std::pow(xd, n_exp)) - gamma * x; };
    std::vector<double> out;
    const std::size_t total = warmup + (n - 1) * downsample;
    for (std::size_t step = 0; step <= total; ++step) {
        if (step >= warmup && (step - warmup) % downsample == 0) out.push_back(hist.back());
        if (step == total) break;
        const std::size_t k = hist.size() - 1;  // current step index in hist
        const double x = hist[k];
        const double d0 = hist[k - lag];
        const double d1 = hist[k - lag + 1];
        const double dm = 0.5 * (d0 + d1);
        const double k1 = f(x, d0);
        const double k2 = f(x + h / 2 * k1, dm);
        const double k3 = f(x + h / 2 * k2, dm);
        const double k4 = f(x + h * k3, d1);
        hist.push_back(x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4));
    }
    return out;
}

}  // namespace oracle
