#pragma once
// Reference computations written independently of the library code paths.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

// Kolmogorov-Smirnov statistic of samples against a CDF.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = double(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, std::abs(f - double(i) / n), std::abs(double(i + 1) / n - f)});
    }
    return d;
}

// Marchenko-Pastur density at ratio g ≤ 1, written out directly.
inline double mp_pdf(double x, double g) {
    const double a = std::pow(1.0 - std::sqrt(g), 2), b = std::pow(1.0 + std::sqrt(g), 2);
    if (x <= a || x >= b) return 0.0;
    return std::sqrt((b - x) * (x - a)) / (2.0 * M_PI * g * x);
}

// Composite Simpson on [a, b] after x = a + (b-a)(1-cos t)/2, which tames the
// square-root edges. n must be even.
inline double mp_integral(const std::function<double(double)>& f, double g, int n = 20000) {
    const double a = std::pow(1.0 - std::sqrt(g), 2), b = std::pow(1.0 + std::sqrt(g), 2);
    auto h = [&](double t) {
        const double x = a + (b - a) * (1.0 - std::cos(t)) / 2.0;
        const double jac = (b - a) * std::sin(t) / 2.0;
        return x > 0.0 ? f(x) * mp_pdf(x, g) * jac : 0.0;
    };
    const double step = M_PI / n;
    double s = h(0.0) + h(M_PI);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * h(i * step);
    return s * step / 3.0;
}

inline double mp_cdf(double x, double g) {
    const double a = std::pow(1.0 - std::sqrt(g), 2), b = std::pow(1.0 + std::sqrt(g), 2);
    if (x <= a) return 0.0;
    if (x >= b) return 1.0;
    const int n = 4000;
    // Simpson in t ∈ [0, t_x] with the same cosine map.
    const double tx = std::acos(1.0 - 2.0 * (x - a) / (b - a));
    auto h = [&](double t) {
        const double y = a + (b - a) * (1.0 - std::cos(t)) / 2.0;
        return y > 0.0 ? mp_pdf(y, g) * (b - a) * std::sin(t) / 2.0 : 0.0;
    };
    const double step = tx / n;
    double s = h(0.0) + h(tx);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * h(i * step);
    return s * step / 3.0;
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / double(v.size());
}

inline double stddev(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / double(v.size() - 1));
}

// Least-squares slope of ln y against ln x.
inline double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        lx.push_back(std::log(xs[i]));
        ly.push_back(std::log(ys[i]));
    }
    const double mx = mean(lx), my = mean(ly);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace oracle
