#pragma once

// Shapiro-Wilk W test with Royston's (1992, 1995) coefficient and p-value
// approximations, valid for 3 <= n <= 5000.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "windfleet/error.hpp"

namespace windfleet {

struct ShapiroWilkResult {
    double w = 1.0;
    double p = 1.0;

    bool normal_at(double level = 0.05) const { return p > level; }
};

namespace detail {

template <std::size_t N>
double poly(const double (&c)[N], double x) {
    double r = c[N - 1];
    for (std::size_t i = N - 1; i-- > 0;) r = r * x + c[i];
    return r;
}

/// Royston's approximation of the Shapiro-Wilk coefficients for the lower
/// half of the order statistics, a[0] >= a[1] >= ... >= 0.
inline std::vector<double> shapiro_wilk_coefficients(std::size_t n) {
    const std::size_t half = n / 2;
    std::vector<double> a(half);
    if (n == 3) {
        a[0] = std::numbers::sqrt2 / 2.0;
        return a;
    }
    static constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
    static constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    const boost::math::normal_distribution<double> std_normal;
    const double an = static_cast<double>(n);
    std::vector<double> m(half);
    double summ2 = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
        m[i] = boost::math::quantile(std_normal, (static_cast<double>(i + 1) - 0.375) / (an + 0.25));
        summ2 += m[i] * m[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = poly(c1, rsn) - m[0] / ssumm2;

    std::size_t first_exact = 1;
    double fac = 0.0;
    if (n > 5) {
        first_exact = 2;
        const double a2 = -m[1] / ssumm2 + poly(c2, rsn);
        fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
        a[1] = a2;
    } else {
        fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
    }
    a[0] = a1;
    for (std::size_t i = first_exact; i < half; ++i) a[i] = -m[i] / fac;
    return a;
}

inline double shapiro_wilk_pvalue(double w, std::size_t n) {
    if (n == 3) {
        constexpr double six_over_pi = 6.0 / std::numbers::pi;
        constexpr double asin_sqrt_3_4 = std::numbers::pi / 3.0;
        return std::max(0.0, six_over_pi * (std::asin(std::sqrt(w)) - asin_sqrt_3_4));
    }
    static constexpr double c3[] = {0.544, -0.39978, 0.025054, -6.714e-4};
    static constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
    static constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
    static constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};
    static constexpr double g[] = {-2.273, 0.459};

    const double an = static_cast<double>(n);
    double y = std::log1p(-w);
    double mean = 0.0, sd = 1.0;
    if (n <= 11) {
        const double gamma = poly(g, an);
        if (y >= gamma) return 1e-99;
        y = -std::log(gamma - y);
        mean = poly(c3, an);
        sd = std::exp(poly(c4, an));
    } else {
        const double xx = std::log(an);
        mean = poly(c5, xx);
        sd = std::exp(poly(c6, xx));
    }
    const boost::math::normal_distribution<double> dist(mean, sd);
    return boost::math::cdf(boost::math::complement(dist, y));
}

}  // namespace detail

inline ShapiroWilkResult shapiro_wilk(std::span<const double> samples) {
    const std::size_t n = samples.size();
    if (n < 3 || n > 5000) throw DomainError("Shapiro-Wilk needs 3 <= n <= 5000");
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    const double range = x.back() - x.front();
    if (!(range > 0.0) || !std::isfinite(range)) throw DomainError("Shapiro-Wilk sample has zero variance");

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    if (!(ss > 0.0)) throw DomainError("Shapiro-Wilk sample has zero variance");

    const auto a = detail::shapiro_wilk_coefficients(n);
    double num = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) num += a[i] * (x[n - 1 - i] - x[i]);

    ShapiroWilkResult res;
    res.w = std::min(1.0, num * num / ss);
    res.p = detail::shapiro_wilk_pvalue(res.w, n);
    return res;
}

}  // namespace windfleet
