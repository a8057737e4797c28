#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace srptlab {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// log Phi(z), stable far into the left tail
inline double log_normal_cdf(double z) {
    if (z > -37.0) return std::log(normal_cdf(z));
    const double z2 = z * z;
    return -0.5 * z2 - std::log(-z * std::sqrt(2.0 * std::acos(-1.0)));
}

// P(W(t) <= w) for W = Gamma[mu iota + sigma B] started at 0:
//   Phi((w - mu t)/(sigma sqrt t)) - e^{2 mu w / sigma^2} Phi((-w - mu t)/(sigma sqrt t)).
inline double reflected_bm_marginal_cdf(double w, double t, double mu, double sigma) {
    if (!(w >= 0.0)) throw std::domain_error("reflected_bm_marginal_cdf: w must be >= 0");
    if (!(t > 0.0)) throw std::domain_error("reflected_bm_marginal_cdf: t must be > 0");
    if (!(sigma > 0.0)) throw std::domain_error("reflected_bm_marginal_cdf: sigma must be > 0");
    const double s = sigma * std::sqrt(t);
    const double first = normal_cdf((w - mu * t) / s);
    const double log_second = 2.0 * mu * w / (sigma * sigma) + log_normal_cdf((-w - mu * t) / s);
    const double second = log_second < -745.0 ? 0.0 : std::exp(log_second);
    const double val = first - second;
    return std::clamp(val, 0.0, 1.0);
}

// One-sample Kolmogorov-Smirnov distance against a CDF handle; exact sup
// over the jump points of the empirical CDF.
inline double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::vector<double> xs(samples.begin(), samples.end());
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double F = cdf(xs[i]);
        d = std::max(d, std::fabs(F - static_cast<double>(i) / n));
        d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - F));
    }
    return d;
}

// Two-sample KS distance, exact sup over the merged jump points.
inline double ks_statistic(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::vector<double> xs(a.begin(), a.end()), ys(b.begin(), b.end());
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    const double na = static_cast<double>(xs.size()), nb = static_cast<double>(ys.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < xs.size() && j < ys.size()) {
        const double x = std::min(xs[i], ys[j]);
        while (i < xs.size() && xs[i] <= x) ++i;
        while (j < ys.size() && ys[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

inline double mean_of(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double median_of(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("median_of: empty sample");
    const std::size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + static_cast<long>(mid), xs.end());
    double hi = xs[mid];
    if (xs.size() % 2 == 1) return hi;
    std::nth_element(xs.begin(), xs.begin() + static_cast<long>(mid) - 1, xs.begin() + static_cast<long>(mid));
    return 0.5 * (xs[mid - 1] + hi);
}

inline double stddev_of(std::span<const double> xs) {
    const double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() > 1 ? xs.size() - 1 : 1));
}

}  // namespace srptlab
