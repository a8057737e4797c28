#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "srptlab/rng.hpp"

namespace srptlab {

// Processing-time distributions with regularly varying tails (plus empirical
// samples for distribution-free checks).
//
// ParetoTypeI(m, p): CCDF min(m^{p+1} x^{-(p+1)}, 1), support [m, inf), p > 1.
// Lomax(lambda, p):  CCDF (1 + lambda*x/p)^{-(p+1)}, support [0, inf), p >= 2.
// Both have tail index -(p+1), mean and second moment finite.
class ServiceDist {
  public:
    enum class Kind { ParetoTypeI, Lomax, Empirical };

    static ServiceDist pareto(double m, double p) {
        if (!(m > 0.0)) throw std::invalid_argument("pareto: scale m must be > 0");
        if (!(p > 1.0)) throw std::invalid_argument("pareto: index p must be > 1");
        ServiceDist d;
        d.kind_ = Kind::ParetoTypeI;
        d.a_ = m;
        d.p_ = p;
        d.mean_ = m * (p + 1.0) / p;
        d.second_moment_ = (p + 1.0) * m * m / (p - 1.0);
        return d;
    }

    static ServiceDist lomax(double lambda, double p) {
        if (!(lambda > 0.0)) throw std::invalid_argument("lomax: rate must be > 0");
        if (!(p >= 2.0)) throw std::invalid_argument("lomax: index p must be >= 2");
        ServiceDist d;
        d.kind_ = Kind::Lomax;
        d.a_ = lambda;
        d.p_ = p;
        d.mean_ = 1.0 / lambda;
        d.second_moment_ = 2.0 * p / (lambda * lambda * (p - 1.0));
        return d;
    }

    static ServiceDist empirical(std::vector<double> sample) {
        if (sample.empty()) throw std::invalid_argument("empirical: sample must be nonempty");
        std::sort(sample.begin(), sample.end());
        if (!(sample.front() > 0.0)) throw std::invalid_argument("empirical: sample values must be > 0");
        ServiceDist d;
        d.kind_ = Kind::Empirical;
        d.sample_ = std::move(sample);
        double s1 = 0.0, s2 = 0.0;
        for (double v : d.sample_) {
            s1 += v;
            s2 += v * v;
        }
        const double n = static_cast<double>(d.sample_.size());
        d.mean_ = s1 / n;
        d.second_moment_ = s2 / n;
        return d;
    }

    Kind kind() const { return kind_; }
    double mean() const { return mean_; }
    double second_moment() const { return second_moment_; }
    double variance() const { return second_moment_ - mean_ * mean_; }
    double tail_index_p() const {
        if (kind_ == Kind::Empirical) throw std::logic_error("empirical distribution has no tail index");
        return p_;
    }
    double scale_m() const { return a_; }
    const std::vector<double>& sample() const { return sample_; }

    // CCDF of a processing time.
    double ccdf(double x) const {
        if (x < 0.0) return 1.0;
        switch (kind_) {
            case Kind::ParetoTypeI:
                return x <= a_ ? 1.0 : std::pow(a_ / x, p_ + 1.0);
            case Kind::Lomax:
                return std::pow(1.0 + a_ * x / p_, -(p_ + 1.0));
            case Kind::Empirical: {
                auto it = std::upper_bound(sample_.begin(), sample_.end(), x);
                return static_cast<double>(sample_.end() - it) / static_cast<double>(sample_.size());
            }
        }
        return 0.0;
    }

  private:
    ServiceDist() = default;
    Kind kind_ = Kind::ParetoTypeI;
    double a_ = 1.0;  // m for Pareto, lambda for Lomax
    double p_ = 2.0;
    double mean_ = 0.0;
    double second_moment_ = 0.0;
    std::vector<double> sample_;
};

// Quantile of the CCDF: returns x with P(v > x) = u, u in (0,1].
inline double inverse_cdf_sample(const ServiceDist& dist, double u) {
    if (!(u > 0.0 && u <= 1.0)) throw std::domain_error("inverse_cdf_sample: u must lie in (0,1]");
    switch (dist.kind()) {
        case ServiceDist::Kind::ParetoTypeI:
            return dist.scale_m() * std::pow(u, -1.0 / (dist.tail_index_p() + 1.0));
        case ServiceDist::Kind::Lomax:
            return (dist.tail_index_p() / dist.scale_m()) *
                   (std::pow(u, -1.0 / (dist.tail_index_p() + 1.0)) - 1.0);
        case ServiceDist::Kind::Empirical: {
            // order statistic: u near 1 selects the smallest value
            const auto& s = dist.sample();
            const std::size_t n = s.size();
            std::size_t idx = static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - u)));
            if (idx >= n) idx = n - 1;
            return s[idx];
        }
    }
    throw std::logic_error("inverse_cdf_sample: unknown kind");
}

inline double draw_service(const ServiceDist& dist, CounterRng& rng) {
    return inverse_cdf_sample(dist, rng.next_unit());
}

// Truncated first moment E[v 1{v > x}], the reciprocal of the scaling
// function S. Closed form for Pareto and Lomax, exact finite sum for
// empirical samples.
inline double truncated_first_moment(const ServiceDist& dist, double x) {
    if (!(x >= 0.0)) throw std::domain_error("truncated_first_moment: x must be >= 0");
    switch (dist.kind()) {
        case ServiceDist::Kind::ParetoTypeI: {
            const double m = dist.scale_m(), p = dist.tail_index_p();
            if (x < m) return dist.mean();
            return (p + 1.0) * std::pow(m, p + 1.0) / (p * std::pow(x, p));
        }
        case ServiceDist::Kind::Lomax: {
            const double lam = dist.scale_m(), p = dist.tail_index_p();
            const double b = 1.0 + lam * x / p;
            return std::pow(b, -p) / lam + x * std::pow(b, -(p + 1.0));
        }
        case ServiceDist::Kind::Empirical: {
            const auto& s = dist.sample();
            auto it = std::upper_bound(s.begin(), s.end(), x);
            double acc = 0.0;
            for (; it != s.end(); ++it) acc += *it;
            return acc / static_cast<double>(s.size());
        }
    }
    throw std::logic_error("truncated_first_moment: unknown kind");
}

// S(x) = 1 / E[v 1{v > x}]; positive, nondecreasing, S(0) = 1/E[v].
inline double scaling_function(const ServiceDist& dist, double x) {
    const double t = truncated_first_moment(dist, x);
    if (t <= 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / t;
}

// c^r = S^{-1}(r). Pareto has the closed form (c_p r)^{1/p} with
// c_p = m^{p+1}(p+1)/p; anything smooth falls back to bisection on the
// monotone S; empirical supports are scanned directly.
inline double scale_parameter(const ServiceDist& dist, double r) {
    const double s0 = 1.0 / dist.mean();
    if (!(r > s0))
        throw std::invalid_argument("scale_parameter: r must exceed S(0) = 1/E[v] = " + std::to_string(s0));
    switch (dist.kind()) {
        case ServiceDist::Kind::ParetoTypeI: {
            const double m = dist.scale_m(), p = dist.tail_index_p();
            const double cp = std::pow(m, p + 1.0) * (p + 1.0) / p;
            return std::pow(cp * r, 1.0 / p);
        }
        case ServiceDist::Kind::Lomax: {
            // bisection on [0, hi], doubling hi until S(hi) > r
            double lo = 0.0, hi = 1.0;
            while (scaling_function(dist, hi) <= r) hi *= 2.0;
            for (int i = 0; i < 200; ++i) {
                const double mid = 0.5 * (lo + hi);
                if (scaling_function(dist, mid) > r)
                    hi = mid;
                else
                    lo = mid;
                if (hi - lo <= 1e-12 * hi) break;
            }
            return 0.5 * (lo + hi);
        }
        case ServiceDist::Kind::Empirical: {
            // S is a right-continuous step; S^{-1}(r) = inf{u : S(u) > r} is
            // attained at a support point.
            const auto& s = dist.sample();
            for (double v : s) {
                if (scaling_function(dist, v) > r) return v;
            }
            return s.back();
        }
    }
    throw std::logic_error("scale_parameter: unknown kind");
}

// lambda^r = (1 + kappa/r)/E[v], making r(lambda^r E[v] - 1) = kappa exact.
inline double heavy_traffic_arrival_rate(const ServiceDist& dist, double r, double kappa) {
    const double rate = (1.0 + kappa / r) / dist.mean();
    if (!(rate > 0.0)) throw std::invalid_argument("heavy_traffic_arrival_rate: nonpositive rate");
    return rate;
}

// sigma^2 = lambda Var(v) + lambda sigma_A^2 with lambda = 1/E[v].
inline double diffusion_variance(const ServiceDist& dist, double sigma_A) {
    if (!(sigma_A >= 0.0)) throw std::domain_error("diffusion_variance: sigma_A must be >= 0");
    const double lambda = 1.0 / dist.mean();
    return lambda * dist.variance() + lambda * sigma_A * sigma_A;
}

// Inter-arrival shape, normalized to unit mean; actual gaps are shape/rate.
struct InterArrival {
    enum class Kind { Exponential, Deterministic, ShiftedUniform };
    Kind kind = Kind::Exponential;
    double lo = 0.0, hi = 2.0;  // ShiftedUniform pre-normalization bounds

    static InterArrival exponential() { return {Kind::Exponential, 0.0, 0.0}; }
    static InterArrival deterministic() { return {Kind::Deterministic, 0.0, 0.0}; }
    static InterArrival shifted_uniform(double lo, double hi) {
        if (!(0.0 <= lo && lo < hi)) throw std::invalid_argument("shifted_uniform: need 0 <= lo < hi");
        return {Kind::ShiftedUniform, lo, hi};
    }

    // one gap with mean 1/rate
    double draw(CounterRng& rng, double rate) const {
        switch (kind) {
            case Kind::Exponential:
                return rng.next_exponential(rate);
            case Kind::Deterministic:
                return 1.0 / rate;
            case Kind::ShiftedUniform: {
                const double mean0 = 0.5 * (lo + hi);
                const double x = lo + (hi - lo) * rng.next_open();
                return x / (mean0 * rate);
            }
        }
        return 1.0 / rate;
    }

    // standard deviation of a gap when the rate is `rate`
    double sigma(double rate) const {
        switch (kind) {
            case Kind::Exponential:
                return 1.0 / rate;
            case Kind::Deterministic:
                return 0.0;
            case Kind::ShiftedUniform: {
                const double mean0 = 0.5 * (lo + hi);
                return (hi - lo) / (std::sqrt(12.0) * mean0 * rate);
            }
        }
        return 0.0;
    }
};

// Delayed renewal arrival process spec. The initial delay defaults to one
// ordinary inter-arrival draw, which keeps its first two moments within the
// bounds the heavy-traffic conditions place on the delay.
struct ArrivalSpec {
    InterArrival gap = InterArrival::exponential();
    InterArrival initial_delay = InterArrival::exponential();

    static ArrivalSpec poisson() { return {InterArrival::exponential(), InterArrival::exponential()}; }
    static ArrivalSpec deterministic() { return {InterArrival::deterministic(), InterArrival::deterministic()}; }

    double sigma_A(double rate) const { return gap.sigma(rate); }
};

// Heavy-traffic parameters for one system in the sequence:
// r(lambda_r E[v] - 1) = kappa exactly and S(c_r) = r.
struct HeavyTrafficParams {
    double kappa = 0.0;
    double r = 0.0;
    double lambda_r = 0.0;
    double c_r = 0.0;

    HeavyTrafficParams(const ServiceDist& dist, double r_in, double kappa_in)
        : kappa(kappa_in),
          r(r_in),
          lambda_r(heavy_traffic_arrival_rate(dist, r_in, kappa_in)),
          c_r(scale_parameter(dist, r_in)) {
        if (!(r > 1.0)) throw std::invalid_argument("HeavyTrafficParams: r must be > 1");
    }
};

}  // namespace srptlab
