#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace srptlab {

// SplitMix64 finalizer. Used both as a bit mixer for deriving stream seeds
// and as the core of the counter-based generator below.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t stream_id) {
    return mix64(master + 0x9E3779B97F4A7C15ULL * (stream_id + 1));
}

// Counter-based generator: draw i of stream s is a pure function of (s, i),
// so the same (seed, grid) reproduces a path bit-exactly no matter how many
// other streams were consumed in between.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64() { return mix64(seed_ + 0x9E3779B97F4A7C15ULL * (++counter_)); }

    // uniform on (0,1]
    double next_unit() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    // uniform on (0,1)
    double next_open() {
        double u;
        do {
            u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        } while (u == 0.0);
        return u;
    }

    double next_normal();
    double next_exponential(double rate) { return -std::log(next_unit()) / rate; }
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }
    long next_poisson(double mean);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

  private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

// Inverse standard normal CDF, Wichura's algorithm AS 241 (double precision).
inline double inverse_normal_cdf(double u) {
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("inverse_normal_cdf: u outside (0,1)");
    const double q = u - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
                    45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
                  133.14166789178437745) * r + 3.387132872796366608) /
               (((((((5226.495278852545703 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
                    21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
                  42.313330701600911252) * r + 1.0);
    }
    double r = (q < 0.0) ? u : 1.0 - u;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
                   1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
                 4.6303378461565452959) * r + 1.42343711074968357734) /
              (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
                   0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
                 2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
                   0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
                 5.4637849111641143699) * r + 6.6579046435011037772) /
              (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
                   7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
                 0.59983220655588793769) * r + 1.0);
    }
    return (q < 0.0) ? -val : val;
}

inline double CounterRng::next_normal() { return inverse_normal_cdf(next_open()); }

// Exact Poisson sampling by inversion; large means are split into chunks so
// the inversion loop never needs exp() of a large negative argument.
inline long CounterRng::next_poisson(double mean) {
    if (!(mean >= 0.0)) throw std::domain_error("next_poisson: mean must be >= 0");
    long total = 0;
    while (mean > 25.0) {
        double chunk = 25.0;
        double p = std::exp(-chunk);
        double c = p;
        double u = next_open();
        long k = 0;
        while (u > c && k < 400) {
            ++k;
            p *= chunk / static_cast<double>(k);
            c += p;
        }
        total += k;
        mean -= chunk;
    }
    if (mean > 0.0) {
        double p = std::exp(-mean);
        double c = p;
        double u = next_open();
        long k = 0;
        while (u > c && k < 400) {
            ++k;
            p *= mean / static_cast<double>(k);
            c += p;
        }
        total += k;
    }
    return total;
}

}  // namespace srptlab
