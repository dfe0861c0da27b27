#ifndef SN_TEST_HELPERS_HPP
#define SN_TEST_HELPERS_HPP

// Shared test utilities: random parameter generation, independent
// Kolmogorov-Smirnov checks, quadrature oracles, finite differences.
// These stay independent of the library paths they are used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "sn/types.hpp"

namespace sn_test {

using sn::Matd;
using sn::Vecd;

// random correlation matrix: normalized Gram matrix of a k x (k+2) Gaussian
inline Matd random_correlation(Eigen::Index k, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Matd a(k, k + 2);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k + 2; ++j) a(i, j) = nd(rng);
    Matd om = a * a.transpose();
    const Vecd d = om.diagonal().cwiseSqrt();
    om = (om.array() / (d * d.transpose()).array()).eval();
    om = ((om + om.transpose()) / 2.0).eval();
    om.diagonal().setOnes();
    return om;
}

inline Vecd random_vector(Eigen::Index k, std::mt19937_64& rng, double scale = 3.0) {
    std::normal_distribution<double> nd(0.0, scale);
    Vecd v(k);
    for (Eigen::Index i = 0; i < k; ++i) v(i) = nd(rng);
    return v;
}

// one-sample Kolmogorov-Smirnov statistic against a CDF
inline double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf) {
    std::sort(x.begin(), x.end());
    const double n = double(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max(d, std::abs(f - double(i + 1) / n));
        d = std::max(d, std::abs(f - double(i) / n));
    }
    return d;
}

// two-sample Kolmogorov-Smirnov statistic
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    return d;
}

// asymptotic KS critical values
inline double ks_critical_1pct(std::size_t n) { return 1.62762 / std::sqrt(double(n)); }
inline double ks_two_sample_critical_1pct(std::size_t n, std::size_t m) {
    return 1.62762 * std::sqrt((double(n) + double(m)) / (double(n) * double(m)));
}

inline double sample_skewness(const Vecd& x) {
    const double m = x.mean();
    const double m2 = (x.array() - m).square().mean();
    const double m3 = (x.array() - m).cube().mean();
    return m3 / std::pow(m2, 1.5);
}

inline double sample_correlation(const Vecd& x, const Vecd& y) {
    const double mx = x.mean(), my = y.mean();
    const double sxy = ((x.array() - mx) * (y.array() - my)).mean();
    const double sx = (x.array() - mx).square().mean();
    const double sy = (y.array() - my).square().mean();
    return sxy / std::sqrt(sx * sy);
}

// composite 16-point Gauss-Legendre on [a, b]
inline double integrate_1d(const std::function<double(double)>& f, double a, double b,
                           int panels = 128) {
    static const double gx[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                 0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                 0.9445750230732326, 0.9894009349916499};
    static const double gw[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                 0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                 0.0622535239386479, 0.0271524594117541};
    double acc = 0.0;
    for (int s = 0; s < panels; ++s) {
        const double lo = a + (b - a) * s / panels;
        const double hi = a + (b - a) * (s + 1) / panels;
        const double h = (hi - lo) / 2, mid = (hi + lo) / 2;
        for (int q = 0; q < 8; ++q)
            acc += h * gw[q] * (f(mid + h * gx[q]) + f(mid - h * gx[q]));
    }
    return acc;
}

// tensor-product cubature over a rectangle
inline double integrate_2d(const std::function<double(double, double)>& f, double ax, double bx,
                           double ay, double by, int panels = 48) {
    return integrate_1d(
        [&](double x) {
            return integrate_1d([&](double y) { return f(x, y); }, ay, by, panels);
        },
        ax, bx, panels);
}

// central finite-difference gradient
inline Vecd fd_gradient(const std::function<double(const Vecd&)>& f, const Vecd& x,
                        double h = 1e-6) {
    Vecd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vecd xp = x, xm = x;
        const double hi = h * (1.0 + std::abs(x(i)));
        xp(i) += hi;
        xm(i) -= hi;
        g(i) = (f(xp) - f(xm)) / (2.0 * hi);
    }
    return g;
}

}  // namespace sn_test

#endif
