#pragma once

#include <cmath>
#include <functional>

// Test-only numerical oracles, independent of the library implementations
// they check.
namespace oracle {

inline double simpson(const std::function<double(double)>& f, double a, double b) {
    return (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b, double whole,
                                   double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double left = simpson(f, a, m), right = simpson(f, m, b);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
    if (b <= a) return 0.0;
    return adaptive_simpson_rec(f, a, b, simpson(f, a, b), tol, 48);
}

// E[v 1{v > x}] = int_x^inf ccdf(t) dt + x ccdf(x), with the integral cut at
// a point where the tail is negligible.
inline double tail_mean_by_quadrature(const std::function<double(double)>& ccdf, double x, double cutoff) {
    return integrate(ccdf, x, cutoff, 1e-13) + x * ccdf(x);
}

// E[v^2] = int_0^inf 2 t ccdf(t) dt
inline double second_moment_by_quadrature(const std::function<double(double)>& ccdf, double cutoff) {
    return integrate([&](double t) { return 2.0 * t * ccdf(t); }, 0.0, cutoff, 1e-13);
}

// bisection for S(x) = r on a monotone S
inline double invert_monotone(const std::function<double(double)>& S, double r, double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (S(mid) > r)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace oracle
