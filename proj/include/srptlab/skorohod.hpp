#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace srptlab {

// One path sampled at finitely many knots. Linear paths interpolate between
// knots; StepRight paths are right-continuous and constant on [t_i, t_{i+1}).
struct SampledPath {
    enum class Interp { Linear, StepRight };

    std::vector<double> times;   // strictly increasing, starts at 0
    std::vector<double> values;  // same length
    Interp interp = Interp::Linear;

    SampledPath() = default;
    SampledPath(std::vector<double> t, std::vector<double> v, Interp i = Interp::Linear)
        : times(std::move(t)), values(std::move(v)), interp(i) {
        if (times.size() != values.size() || times.empty())
            throw std::invalid_argument("SampledPath: times/values size mismatch or empty");
        if (times.front() != 0.0) throw std::invalid_argument("SampledPath: must start at t=0");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1])) throw std::invalid_argument("SampledPath: times must increase");
    }

    double horizon() const { return times.back(); }

    double value_at(double t) const {
        if (t < 0.0 || t > times.back()) throw std::out_of_range("SampledPath::value_at: t outside domain");
        auto it = std::upper_bound(times.begin(), times.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - times.begin()) - 1;
        if (i + 1 == times.size() || interp == Interp::StepRight) return values[i];
        const double w = (t - times[i]) / (times[i + 1] - times[i]);
        return values[i] + w * (values[i + 1] - values[i]);
    }
};

// In-place reflection kernel: y[i] = x[i] - min(0, min_{j<=i} x[j]).
// For both interpretations the running infimum over [0, t_i] is attained at a
// knot, so the knot values of Gamma[f] are exact.
inline void reflect_values(std::span<const double> x, std::span<double> y) {
    double runmin = x[0];
    for (std::size_t i = 0; i < x.size(); ++i) {
        runmin = std::min(runmin, x[i]);
        y[i] = x[i] - std::min(0.0, runmin);
    }
}

// Skorohod map Gamma[f](t) = f(t) - inf_{s<=t}(f(s) ^ 0). Requires f(0) >= 0.
inline SampledPath reflect(const SampledPath& f) {
    if (f.values.front() < 0.0) throw std::invalid_argument("reflect: f(0) must be >= 0");
    SampledPath out = f;
    reflect_values(f.values, out.values);
    return out;
}

struct LastZero {
    double time = 0.0;  // sup{s <= t : w(s) <= eps}, or 0 if that set is empty
    bool found = true;  // false means the sup ran over the empty set
};

// Latest time s <= t with w(s) <= eps_zero. For Linear paths the upcrossing
// inside a segment is solved exactly; for StepRight paths the sup of a
// below-level segment [t_i, t_{i+1}) is t_{i+1}.
inline LastZero last_zero(const SampledPath& w, double t, double eps_zero = 0.0) {
    if (t < 0.0 || t > w.horizon()) throw std::out_of_range("last_zero: t outside domain");
    if (w.value_at(t) <= eps_zero) return {t, true};
    auto ub = std::upper_bound(w.times.begin(), w.times.end(), t);
    std::size_t hi = static_cast<std::size_t>(ub - w.times.begin());  // first index with time > t
    // scan segments [i, i+1] backwards, clipping the last one at t
    for (std::size_t i = hi; i-- > 0;) {
        const double wi = w.values[i];
        if (i + 1 < w.times.size()) {
            const double tnext = std::min(w.times[i + 1], t);
            const double wnext = w.value_at(tnext);
            if (w.interp == SampledPath::Interp::StepRight) {
                if (wi <= eps_zero) return {tnext, true};
                continue;
            }
            if (wnext <= eps_zero) return {tnext, true};
            if (wi <= eps_zero) {
                // upcrossing of the level inside the segment
                const double frac = (eps_zero - wi) / (wnext - wi);
                return {w.times[i] + frac * (tnext - w.times[i]), true};
            }
        } else if (wi <= eps_zero) {
            return {w.times[i], true};
        }
    }
    return {0.0, false};
}

// Busy-period duration t - sup{s <= t : w(s) <= eps_zero} of a reflected
// path; the empty-set convention sup = 0 makes the result t, flagged via
// LastZero::found in last_zero above.
inline double last_zero_derivative(const SampledPath& w, double t, double eps_zero = 0.0) {
    return t - last_zero(w, t, eps_zero).time;
}

// Value of Gamma[f] at an arbitrary t, with the running infimum taken over
// the exact path (knot values plus the interpolated value at t).
inline double reflect_value_at(const SampledPath& f, double t) {
    if (f.values.front() < 0.0) throw std::invalid_argument("reflect_value_at: f(0) must be >= 0");
    if (t < 0.0 || t > f.horizon()) throw std::out_of_range("reflect_value_at: t outside domain");
    const double ft = f.value_at(t);
    double runmin = ft;
    for (std::size_t i = 0; i < f.times.size() && f.times[i] <= t; ++i) runmin = std::min(runmin, f.values[i]);
    return ft - std::min(0.0, runmin);
}

// Finite-difference drift derivative of the Skorohod map:
// (Gamma[f + eps*iota](t) - Gamma[f](t)) / eps.
inline double drift_perturbation_derivative(const SampledPath& f, double t, double eps) {
    if (eps == 0.0) throw std::invalid_argument("drift_perturbation_derivative: eps must be nonzero");
    SampledPath tilted = f;
    for (std::size_t i = 0; i < f.times.size(); ++i) tilted.values[i] = f.values[i] + eps * f.times[i];
    return (reflect_value_at(tilted, t) - reflect_value_at(f, t)) / eps;
}

}  // namespace srptlab
