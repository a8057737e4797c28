#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "srptlab/distributions.hpp"
#include "srptlab/rng.hpp"
#include "srptlab/skorohod.hpp"

namespace srptlab {

// Limiting initial truncated-workload profile xi(a): nondecreasing,
// xi(0) = 0, finite xi(infinity).
struct LimitInitialProfile {
    enum class Kind { Zero, PiecewiseLinear, Scaled };

    Kind kind = Kind::Zero;
    std::vector<double> knots;   // PiecewiseLinear: ascending levels, starting above 0
    std::vector<double> values;  // same length; constant beyond the last knot
    double q_star = 0.0;         // Scaled: xi(a) = q* E[v* 1{v* <= a}]
    std::optional<ServiceDist> vstar_law;

    static LimitInitialProfile zero() { return {}; }

    static LimitInitialProfile piecewise_linear(std::vector<double> ks, std::vector<double> vals) {
        if (ks.size() != vals.size() || ks.empty())
            throw std::invalid_argument("piecewise_linear profile: size mismatch or empty");
        double prev_k = 0.0, prev_v = 0.0;
        for (std::size_t i = 0; i < ks.size(); ++i) {
            if (!(ks[i] > prev_k) || vals[i] < prev_v)
                throw std::invalid_argument("piecewise_linear profile: must be increasing in a and nondecreasing");
            prev_k = ks[i];
            prev_v = vals[i];
        }
        LimitInitialProfile p;
        p.kind = Kind::PiecewiseLinear;
        p.knots = std::move(ks);
        p.values = std::move(vals);
        return p;
    }

    static LimitInitialProfile scaled(double q_star, ServiceDist law) {
        LimitInitialProfile p;
        p.kind = Kind::Scaled;
        p.q_star = q_star;
        p.vstar_law = std::move(law);
        return p;
    }

    double at(double a) const {
        if (a <= 0.0) return 0.0;
        switch (kind) {
            case Kind::Zero:
                return 0.0;
            case Kind::PiecewiseLinear: {
                if (a >= knots.back()) return values.back();
                double k0 = 0.0, v0 = 0.0;
                for (std::size_t i = 0; i < knots.size(); ++i) {
                    if (a <= knots[i]) return v0 + (values[i] - v0) * (a - k0) / (knots[i] - k0);
                    k0 = knots[i];
                    v0 = values[i];
                }
                return values.back();
            }
            case Kind::Scaled:
                return q_star * (vstar_law->mean() - truncated_first_moment(*vstar_law, a));
        }
        return 0.0;
    }

    double at_infinity() const {
        switch (kind) {
            case Kind::Zero:
                return 0.0;
            case Kind::PiecewiseLinear:
                return values.back();
            case Kind::Scaled:
                return q_star * vstar_law->mean();
        }
        return 0.0;
    }

    // whether x^p (xi(inf) - xi(x)) -> 0 holds by construction (the tail
    // functionals assume it); true for profiles that reach xi(inf) at a
    // finite level
    bool has_decaying_tail() const { return kind != Kind::Scaled; }
};

struct LimitSpec {
    double kappa = 0.0;
    double lambda = 1.0;  // 1/E[v]
    double sigma = 1.0;   // diffusion std-dev
    double p = 2.0;       // tail index parameter
    LimitInitialProfile xi;

    LimitSpec(double kappa_in, double lambda_in, double sigma_in, double p_in,
              LimitInitialProfile xi_in = LimitInitialProfile::zero())
        : kappa(kappa_in), lambda(lambda_in), sigma(sigma_in), p(p_in), xi(std::move(xi_in)) {
        if (!(sigma > 0.0)) throw std::invalid_argument("LimitSpec: sigma must be > 0");
        if (!(p > 1.0)) throw std::invalid_argument("LimitSpec: p must be > 1");
        if (!(lambda > 0.0)) throw std::invalid_argument("LimitSpec: lambda must be > 0");
    }
};

// Reflected random field W_a = Gamma[xi(a) + sigma B + (kappa - lambda/a^p) iota]
// over a level grid plus the infinity level, all paths driven by one
// Brownian sample.
struct RandomField {
    LimitSpec spec;
    double dt = 0.0;
    std::vector<double> times;       // uniform grid 0..T
    std::vector<double> levels;      // ascending, finite
    std::vector<double> brownian;    // B at grid times
    std::vector<std::vector<double>> W;  // levels.size()+1 rows; last row is level infinity
    std::vector<std::vector<double>> X;  // matching netputs

    std::size_t time_index(double t) const {
        const double pos = t / dt;
        const auto i = static_cast<std::size_t>(std::llround(pos));
        if (i >= times.size() || std::fabs(times[i] - t) > 1e-9 * (1.0 + std::fabs(t)))
            throw std::out_of_range("RandomField: t is not on the time grid");
        return i;
    }

    std::size_t level_index(double a) const {
        auto it = std::lower_bound(levels.begin(), levels.end(), a);
        if (it == levels.end() || std::fabs(*it - a) > 1e-12 * (1.0 + std::fabs(a)))
            throw std::out_of_range("RandomField: a is not on the level grid");
        return static_cast<std::size_t>(it - levels.begin());
    }

    const std::vector<double>& w_at_level(std::size_t j) const { return W[j]; }
    const std::vector<double>& w_infinity() const { return W.back(); }

    SampledPath w_infinity_path() const { return SampledPath(times, W.back(), SampledPath::Interp::Linear); }
};

// Geometric default grid a_j = 2^{-6} * 2^{(j-1)/4} up to 2^6.
inline std::vector<double> default_level_grid(double a1 = 0.015625, double aK = 64.0, double ratio_log2 = 0.25) {
    std::vector<double> levels;
    const double lg1 = std::log2(a1), lgK = std::log2(aK);
    const int n = static_cast<int>(std::round((lgK - lg1) / ratio_log2));
    for (int j = 0; j <= n; ++j) levels.push_back(std::exp2(lg1 + ratio_log2 * j));
    return levels;
}

inline RandomField sample_field(const LimitSpec& spec, double T, double dt, std::vector<double> levels,
                                std::uint64_t seed) {
    if (!(dt > 0.0) || !(T > 0.0)) throw std::invalid_argument("sample_field: need T, dt > 0");
    for (std::size_t i = 0; i < levels.size(); ++i)
        if (!(levels[i] > 0.0) || (i > 0 && !(levels[i] > levels[i - 1])))
            throw std::invalid_argument("sample_field: levels must be positive ascending");

    const auto n = static_cast<std::size_t>(std::ceil(T / dt - 1e-12));
    RandomField field{spec, dt, {}, std::move(levels), {}, {}, {}};
    field.times.resize(n + 1);
    field.brownian.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) field.times[i] = dt * static_cast<double>(i);

    CounterRng rng(seed);
    const double sqdt = std::sqrt(dt);
    field.brownian[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) field.brownian[i] = field.brownian[i - 1] + sqdt * rng.next_normal();

    const std::size_t K = field.levels.size();
    field.X.assign(K + 1, std::vector<double>(n + 1));
    field.W.assign(K + 1, std::vector<double>(n + 1));
    for (std::size_t j = 0; j <= K; ++j) {
        const bool inf_level = (j == K);
        const double a = inf_level ? std::numeric_limits<double>::infinity() : field.levels[j];
        const double x0 = inf_level ? spec.xi.at_infinity() : spec.xi.at(a);
        const double drift = inf_level ? spec.kappa : spec.kappa - spec.lambda / std::pow(a, spec.p);
        auto& X = field.X[j];
        for (std::size_t i = 0; i <= n; ++i)
            X[i] = x0 + spec.sigma * field.brownian[i] + drift * field.times[i];
        reflect_values(X, field.W[j]);
    }
    return field;
}

struct BracketedValue {
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

// Q(t) = int_0^inf x^{-2} W_x(t) dx: trapezoid over the interior of the
// level grid, a [W_aK/aK, W_inf/aK] bracket for the tail and a
// [0, W_a1/a1] bracket for the head; the estimate is the interior plus
// bracket midpoints.
inline BracketedValue limit_queue_length(const RandomField& field, double t) {
    const std::size_t i = field.time_index(t);
    const std::size_t K = field.levels.size();
    double interior = 0.0;
    for (std::size_t j = 0; j + 1 < K; ++j) {
        const double xa = field.levels[j], xb = field.levels[j + 1];
        const double ha = field.W[j][i] / (xa * xa), hb = field.W[j + 1][i] / (xb * xb);
        interior += 0.5 * (ha + hb) * (xb - xa);
    }
    const double aK = field.levels.back(), a1 = field.levels.front();
    const double tail_lo = field.W[K - 1][i] / aK, tail_hi = field.W[K][i] / aK;
    const double head_hi = field.W[0][i] / a1;
    BracketedValue out;
    out.lower = interior + tail_lo;
    out.upper = interior + tail_hi + head_hi;
    out.estimate = interior + 0.5 * (tail_lo + tail_hi) + 0.5 * head_hi;
    return out;
}

// Limit-measure mass of [a, b]:
//   int_a^b x^{-2} W_x(t) dx + W_b(t)/b - W_a(t)/a,
// with the integral by trapezoid over the level grid. a and b must be grid
// levels so that adjacent masses telescope exactly.
inline double limit_measure(const RandomField& field, double t, double a, double b) {
    if (!(0.0 < a && a < b)) throw std::invalid_argument("limit_measure: need 0 < a < b");
    const std::size_t i = field.time_index(t);
    const std::size_t ja = field.level_index(a), jb = field.level_index(b);
    double integral = 0.0;
    for (std::size_t j = ja; j < jb; ++j) {
        const double xa = field.levels[j], xb = field.levels[j + 1];
        const double ha = field.W[j][i] / (xa * xa), hb = field.W[j + 1][i] / (xb * xb);
        integral += 0.5 * (ha + hb) * (xb - xa);
    }
    return integral + field.W[jb][i] / b - field.W[ja][i] / a;
}

// Z_f(t) = int (f(x)/x^2 - f'(x)/x) W_x(t) dx + (lim f/x) W_inf(t). The
// integrand is -(f/x)', so the head/tail pieces use the same midpoint
// scheme as limit_queue_length expressed through g = f/x; for f = chi it
// vanishes identically and Z_chi = W_inf exactly.
template <class F, class DF>
std::vector<double> limit_Zf_path(const RandomField& field, F&& f, DF&& df, double lim_f_over_x) {
    const std::size_t K = field.levels.size();
    const std::size_t n = field.times.size();
    const double a1 = field.levels.front(), aK = field.levels.back();
    const double g1 = f(a1) / a1, gK = f(aK) / aK;
    std::vector<double> integrand(K);
    for (std::size_t j = 0; j < K; ++j) {
        const double x = field.levels[j];
        integrand[j] = f(x) / (x * x) - df(x) / x;
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double interior = 0.0;
        for (std::size_t j = 0; j + 1 < K; ++j)
            interior += 0.5 * (integrand[j] * field.W[j][i] + integrand[j + 1] * field.W[j + 1][i]) *
                        (field.levels[j + 1] - field.levels[j]);
        const double tail = 0.5 * (field.W[K - 1][i] + field.W[K][i]) * (gK - lim_f_over_x);
        const double head = 0.5 * field.W[0][i] * (g1 - lim_f_over_x);
        out[i] = interior + tail + head + lim_f_over_x * field.W[K][i];
    }
    return out;
}

inline std::vector<double> limit_Zf(const RandomField& field, const std::function<double(double)>& f,
                                    const std::function<double(double)>& df, double lim_f_over_x) {
    return limit_Zf_path(field, [&](double x) { return f(x); }, [&](double x) { return df(x); },
                         lim_f_over_x);
}

struct TailRatios {
    double work_tail_ratio = 0.0;
    double mass_tail_ratio = 0.0;
    double w_prime = 0.0;
};

namespace detail_field {

// For xi = 0 the reflected value at level x is
//   W_x(t) = X_inf(t) - u t - min_i (X_inf(t_i) - t_i u),   u = lambda x^{-p},
// so as a function of u it is governed by the lower envelope of finitely
// many lines. On each envelope piece W_x = A - lambda (t - t*) x^{-p}, which
// integrates against x^{-2} in closed form: the tail mass
//   int_a^inf x^{-2} W_x dx - W_a / a
// comes out exactly, with no quadrature step at all.
struct EnvelopeLine {
    double c;      // X_inf(t_i)
    double tstar;  // t_i
};

inline std::vector<EnvelopeLine> lower_envelope(const std::vector<double>& x_inf,
                                                const std::vector<double>& times, std::size_t n_idx) {
    std::vector<EnvelopeLine> hull;
    hull.reserve(64);
    for (std::size_t i = 0; i <= n_idx; ++i) {
        const EnvelopeLine cand{x_inf[i], times[i]};
        // slopes -t_i strictly decrease with i
        while (hull.size() >= 2) {
            const EnvelopeLine& l1 = hull[hull.size() - 2];
            const EnvelopeLine& l2 = hull[hull.size() - 1];
            // l2 never attains the minimum if it is above the l1-cand crossing
            if ((l2.c - l1.c) * (cand.tstar - l1.tstar) >= (cand.c - l1.c) * (l2.tstar - l1.tstar))
                hull.pop_back();
            else
                break;
        }
        if (hull.size() == 1 && cand.c <= hull.back().c)
            hull.pop_back();  // steeper and already lower at u = 0
        hull.push_back(cand);
    }
    return hull;
}

inline double exact_tail_mass(const RandomField& field, std::size_t n_idx, double a) {
    const double p = field.spec.p, lambda = field.spec.lambda;
    const auto& x_inf = field.X.back();
    const double G = x_inf[n_idx];
    const double t = field.times[n_idx];
    const auto hull = lower_envelope(x_inf, field.times, n_idx);

    // active piece boundaries in u: hull[k] is lowest on [u_k, u_{k+1}]
    std::vector<double> breaks(hull.size() + 1, 0.0);
    for (std::size_t k = 0; k + 1 < hull.size(); ++k)
        breaks[k + 1] = (hull[k + 1].c - hull[k].c) / (hull[k + 1].tstar - hull[k].tstar);
    breaks.back() = std::numeric_limits<double>::infinity();

    const double u_a = lambda * std::pow(a, -p);
    double integral = 0.0;  // int_a^inf x^{-2} W_x dx
    double w_a = 0.0;
    for (std::size_t k = 0; k < hull.size(); ++k) {
        const double ul = breaks[k], uh = std::min(breaks[k + 1], u_a);
        if (ul >= u_a) break;
        if (uh <= ul) continue;
        // u in [ul, uh] maps to x in [x(uh), x(ul)], x(0) = infinity
        const double xl = std::pow(lambda / uh, 1.0 / p);
        const double A = G - hull[k].c;
        const double drift_w = lambda * (t - hull[k].tstar);
        if (ul == 0.0) {
            integral += A / xl - drift_w * std::pow(xl, -(p + 1.0)) / (p + 1.0);
        } else {
            const double xh = std::pow(lambda / ul, 1.0 / p);
            integral += A * (1.0 / xl - 1.0 / xh) -
                        drift_w * (std::pow(xl, -(p + 1.0)) - std::pow(xh, -(p + 1.0))) / (p + 1.0);
        }
        if (uh == u_a) w_a = A - drift_w * std::pow(a, -p);
    }
    return integral - w_a / a;
}

}  // namespace detail_field

// Tail functionals at level a (a grid level):
//   work:  (a^p/lambda) (W_inf - W_a),
//   mass:  ((p+1) a^{p+1} / (p lambda)) * Ztilde(t)[a, inf),
// compared against the busy-period derivative W'_inf(t). For xi = 0 the
// tail-mass level integral is evaluated exactly through the envelope
// representation above; for other decaying profiles it falls back to the
// trapezoid over the level grid with the constant-W_a part subtracted
// analytically and the bracket midpoint beyond the grid.
inline TailRatios tail_ratios(const RandomField& field, double t, double a) {
    if (!field.spec.xi.has_decaying_tail())
        throw std::invalid_argument("tail_ratios: initial profile must have a decaying tail");
    const std::size_t i = field.time_index(t);
    const std::size_t ja = field.level_index(a);
    const std::size_t K = field.levels.size();
    const double p = field.spec.p, lambda = field.spec.lambda;
    const double w_inf = field.W[K][i], w_a = field.W[ja][i];

    TailRatios out;
    out.work_tail_ratio = std::pow(a, p) / lambda * (w_inf - w_a);

    double tail_mass;
    if (field.spec.xi.kind == LimitInitialProfile::Kind::Zero) {
        tail_mass = detail_field::exact_tail_mass(field, i, a);
    } else {
        const double aK = field.levels.back();
        double integral = 0.0;
        for (std::size_t j = ja; j + 1 < K; ++j) {
            const double xa = field.levels[j], xb = field.levels[j + 1];
            const double ha = (field.W[j][i] - w_a) / (xa * xa), hb = (field.W[j + 1][i] - w_a) / (xb * xb);
            integral += 0.5 * (ha + hb) * (xb - xa);
        }
        integral += w_a * (1.0 / a - 1.0 / aK);
        integral += 0.5 * (field.W[K - 1][i] + w_inf) / aK;
        tail_mass = integral - w_a / a;
    }
    out.mass_tail_ratio = (p + 1.0) * std::pow(a, p + 1.0) / (p * lambda) * tail_mass;

    SampledPath w_path(field.times, field.W[K], SampledPath::Interp::Linear);
    out.w_prime = last_zero_derivative(w_path, t, 0.0);
    return out;
}

// sup_{t<=T} |Q^{(p)}(t) - W_inf^{(p)}(t)| for each p, all fields driven by
// the same Brownian sample (same seed, same grid). sigmas[k] pairs with
// p_list[k].
inline std::vector<double> collapse_gap(std::span<const double> p_list, std::span<const double> sigmas,
                                        double kappa, double lambda, const LimitInitialProfile& xi, double T,
                                        double dt, std::vector<double> levels, std::uint64_t seed) {
    if (p_list.size() != sigmas.size()) throw std::invalid_argument("collapse_gap: p/sigma size mismatch");
    std::vector<double> gaps;
    gaps.reserve(p_list.size());
    for (std::size_t k = 0; k < p_list.size(); ++k) {
        if (!(p_list[k] >= 2.0)) throw std::invalid_argument("collapse_gap: p must be >= 2");
        LimitSpec spec(kappa, lambda, sigmas[k], p_list[k], xi);
        RandomField field = sample_field(spec, T, dt, levels, seed);
        double gap = 0.0;
        for (std::size_t i = 0; i < field.times.size(); ++i) {
            const double q = limit_queue_length(field, field.times[i]).estimate;
            gap = std::max(gap, std::fabs(q - field.W.back()[i]));
        }
        gaps.push_back(gap);
    }
    return gaps;
}

}  // namespace srptlab
