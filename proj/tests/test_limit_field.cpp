#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "srptlab/limit_field.hpp"
#include "srptlab/stats.hpp"

using namespace srptlab;

namespace {

RandomField constant_field(double c, std::vector<double> levels, int n_times = 11, double dt = 0.1) {
    RandomField f{LimitSpec(0.0, 1.0, 1.0, 2.0), dt, {}, std::move(levels), {}, {}, {}};
    f.times.resize(static_cast<std::size_t>(n_times));
    for (int i = 0; i < n_times; ++i) f.times[static_cast<std::size_t>(i)] = dt * i;
    f.brownian.assign(f.times.size(), 0.0);
    f.W.assign(f.levels.size() + 1, std::vector<double>(f.times.size(), c));
    f.X = f.W;
    return f;
}

}  // namespace

TEST_CASE("sampled field: start values, monotone levels, one driver") {
    const LimitSpec spec(0.0, 2.0 / 3.0, std::sqrt(2.0), 2.0);
    const auto levels = default_level_grid();
    const RandomField field = sample_field(spec, 1.0, 1e-3, levels, 77);
    REQUIRE(field.times.size() == 1001);
    REQUIRE(field.W.size() == levels.size() + 1);

    for (std::size_t j = 0; j < field.W.size(); ++j) CHECK(field.W[j][0] == 0.0);

    for (std::size_t i = 0; i < field.times.size(); i += 37) {
        for (std::size_t j = 0; j + 1 < field.W.size(); ++j) {
            CHECK(field.W[j][i] <= field.W[j + 1][i] + 1e-12);
            CHECK(field.W[j][i] >= 0.0);
        }
    }

    // single-driver synchronization: X_b - X_a is deterministic
    const std::size_t ja = field.level_index(0.5), jb = field.level_index(2.0);
    const double da = spec.lambda / std::pow(0.5, spec.p), db = spec.lambda / std::pow(2.0, spec.p);
    for (std::size_t i = 0; i < field.times.size(); i += 101) {
        const double expected = (da - db) * field.times[i];
        CHECK(field.X[jb][i] - field.X[ja][i] == Catch::Approx(expected).margin(1e-12));
    }

    // identical seeds reproduce the Brownian sample bit for bit
    const RandomField again = sample_field(spec, 1.0, 1e-3, levels, 77);
    CHECK(std::equal(field.brownian.begin(), field.brownian.end(), again.brownian.begin()));
}

TEST_CASE("limit queue length: trivial and constant-field cases") {
    const std::vector<double> levels = default_level_grid(0.25, 16.0, 0.125);
    const auto zero = constant_field(0.0, levels);
    const auto q0 = limit_queue_length(zero, 0.0);
    CHECK(q0.estimate == 0.0);
    CHECK(q0.lower == 0.0);
    CHECK(q0.upper == 0.0);

    const double c = 0.8;
    const auto cf = constant_field(c, levels);
    const auto q = limit_queue_length(cf, 0.5);
    const double a1 = levels.front(), aK = levels.back();
    const double interior = q.lower - c / aK;  // subtract the tail bracket's lower edge
    // trapezoid on a 2^(1/8) geometric grid overshoots x^-2 by ~0.4%
    CHECK(interior == Catch::Approx(c * (1.0 / a1 - 1.0 / aK)).epsilon(6e-3));
    CHECK(q.upper - q.lower == Catch::Approx(c / a1));  // head width; tail bracket is tight here
    CHECK(q.estimate == Catch::Approx(0.5 * (q.lower + q.upper)));
}

TEST_CASE("limit queue length: dyadic extension of the level span shrinks the bracket") {
    // halving a1 and doubling aK at a fixed step: the brackets shrink and
    // the estimate moves by no more than the superseded bracket, up to the
    // fixed-step quadrature slack on the newly covered octaves
    const LimitSpec spec(0.0, 2.0 / 3.0, std::sqrt(2.0), 2.0);
    for (std::uint64_t seed : {3, 4, 5}) {
        double prev_width = std::numeric_limits<double>::infinity();
        double prev_estimate = 0.0;
        bool first = true;
        for (double span : {16.0, 32.0, 64.0}) {
            const auto levels = default_level_grid(1.0 / span, span, 0.125);
            const RandomField field = sample_field(spec, 1.0, 1e-3, levels, seed);
            const auto q = limit_queue_length(field, 1.0);
            const double width = q.upper - q.lower;
            CHECK(width < prev_width);
            if (!first)
                CHECK(std::fabs(q.estimate - prev_estimate) <= prev_width + 5e-3 * (1.0 + std::fabs(q.estimate)));
            prev_width = width;
            prev_estimate = q.estimate;
            first = false;
        }
    }
}

TEST_CASE("limit measure: additivity, zero start, total consistency") {
    const LimitSpec spec(0.0, 2.0 / 3.0, std::sqrt(2.0), 2.0);
    const auto levels = default_level_grid();
    const RandomField field = sample_field(spec, 1.0, 1e-3, levels, 5);

    const double m_ab = limit_measure(field, 1.0, 0.25, 1.0);
    const double m_bc = limit_measure(field, 1.0, 1.0, 4.0);
    const double m_ac = limit_measure(field, 1.0, 0.25, 4.0);
    CHECK(m_ab + m_bc == Catch::Approx(m_ac).margin(1e-12));
    CHECK(m_ab >= -1e-12);

    CHECK(limit_measure(field, 0.0, 0.25, 4.0) == 0.0);
    CHECK_THROWS_AS(limit_measure(field, 1.0, 0.3, 4.0), std::out_of_range);   // off-grid level
    CHECK_THROWS_AS(limit_measure(field, 1.0, 4.0, 1.0), std::invalid_argument);

    // total mass over the grid span + brackets agrees with Q within the bracket width
    const auto q = limit_queue_length(field, 1.0);
    const double a1 = levels.front(), aK = levels.back();
    const double total = limit_measure(field, 1.0, a1, aK) + field.W[field.level_index(a1)][1000] / a1;
    CHECK(total >= q.lower - (q.upper - q.lower) - 1e-9);
    CHECK(total <= q.upper + 1e-9);
}

TEST_CASE("Z_f reductions") {
    const LimitSpec spec(0.5, 2.0 / 3.0, std::sqrt(2.0), 2.0);
    const auto levels = default_level_grid();
    const RandomField field = sample_field(spec, 0.5, 1e-3, levels, 9);

    // f = chi: integrand vanishes, Z_chi = W_inf exactly
    const auto z_chi = limit_Zf(field, [](double x) { return x; }, [](double) { return 1.0; }, 1.0);
    for (std::size_t i = 0; i < field.times.size(); i += 97)
        CHECK(z_chi[i] == Catch::Approx(field.W.back()[i]).margin(1e-12));

    // f = 1: reduces to the queue-length estimate
    const auto z_one = limit_Zf(field, [](double) { return 1.0; }, [](double) { return 0.0; }, 0.0);
    for (std::size_t i = 0; i < field.times.size(); i += 97)
        CHECK(z_one[i] == Catch::Approx(limit_queue_length(field, field.times[i]).estimate).margin(1e-12));
}

TEST_CASE("Z_f hand quadrature on a three-level field") {
    auto field = constant_field(0.0, {1.0, 2.0, 4.0}, 2, 1.0);
    field.W[0][1] = 0.3;
    field.W[1][1] = 0.5;
    field.W[2][1] = 0.8;
    field.W[3][1] = 1.0;
    // f = x^2 for x <= 2 and 0 beyond: integrand f/x^2 - f'/x = -1 at levels 1, 2 and 0 at 4
    const auto zf = limit_Zf(
        field, [](double x) { return x <= 2.0 ? x * x : 0.0; },
        [](double x) { return x <= 2.0 ? 2.0 * x : 0.0; }, 0.0);
    // interior: 0.5(-0.3 - 0.5)(1) + 0.5(-0.5 + 0)(2) = -0.9
    // tail: 0.5(0.8 + 1.0)(g(4) - 0) = 0; head: 0.5(0.3)(g(1) - 0) = 0.15
    CHECK(zf[1] == Catch::Approx(-0.75).margin(1e-14));
    CHECK(zf[0] == 0.0);
}

TEST_CASE("exact tail mass from the envelope representation: hand oracle") {
    // three-knot field, sigma = lambda = 1, kappa = 0, xi = 0:
    // B = (0, -1, -0.5) gives X_inf = (0, -1, -0.5); the line envelope in
    // u = x^{-2} is (-1 - 0.5u) on [0,1] and (-0.5 - u) beyond; at a = 2:
    //   W_2(1) = 0.375,
    //   int_2^inf x^{-2} W_x dx = 0.5/2 - 0.5 * 2^{-3}/3 = 11/48,
    //   tail mass = 11/48 - 0.375/2 = 1/24,
    //   mass ratio = (3*8/2) * (1/24) = 1/2 = W'_inf(1) exactly.
    RandomField f{LimitSpec(0.0, 1.0, 1.0, 2.0), 0.5, {0.0, 0.5, 1.0}, {2.0}, {0.0, -1.0, -0.5}, {}, {}};
    f.X.assign(2, std::vector<double>(3));
    f.W.assign(2, std::vector<double>(3));
    for (std::size_t i = 0; i < 3; ++i) {
        f.X[1][i] = f.brownian[i];                        // level infinity
        f.X[0][i] = f.brownian[i] - 0.25 * f.times[i];    // level a = 2
    }
    reflect_values(f.X[0], f.W[0]);
    reflect_values(f.X[1], f.W[1]);
    CHECK(f.W[0][2] == Catch::Approx(0.375));

    const auto tr = tail_ratios(f, 1.0, 2.0);
    CHECK(tr.mass_tail_ratio == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(tr.work_tail_ratio == Catch::Approx(4.0 * (0.5 - 0.375)).epsilon(1e-12));
    CHECK(tr.w_prime == Catch::Approx(0.5));
}

TEST_CASE("tail ratios: identities at one level") {
    const LimitSpec spec(0.0, 2.0 / 3.0, std::sqrt(2.0), 2.0);
    const auto levels = default_level_grid();
    const RandomField field = sample_field(spec, 1.0, 1e-3, levels, 13);
    const double a = 4.0;
    const auto tr = tail_ratios(field, 1.0, a);

    const std::size_t i = field.time_index(1.0), ja = field.level_index(a);
    const double work_tail = field.W.back()[i] - field.W[ja][i];
    CHECK(tr.work_tail_ratio == Catch::Approx(std::pow(a, 2.0) / spec.lambda * work_tail).margin(1e-12));
    CHECK(tr.w_prime >= 0.0);
    CHECK(tr.w_prime <= 1.0);

    // w_prime = t when W_inf is positive on (0, t] and W_inf(0) = 0
    RandomField pos = field;
    for (std::size_t k = 1; k < pos.W.back().size(); ++k) pos.W.back()[k] = 1.0 + 0.1 * static_cast<double>(k % 7);
    const SampledPath wp(pos.times, pos.W.back(), SampledPath::Interp::Linear);
    CHECK(last_zero_derivative(wp, 1.0) == Catch::Approx(1.0));

    // profiles without a decaying tail are rejected
    LimitSpec scaled_spec(0.0, 2.0 / 3.0, std::sqrt(2.0), 2.0,
                          LimitInitialProfile::scaled(1.0, ServiceDist::pareto(1.0, 2.0)));
    const RandomField f2 = sample_field(scaled_spec, 0.01, 1e-3, {1.0, 2.0}, 1);
    CHECK_THROWS_AS(tail_ratios(f2, 0.01, 1.0), std::invalid_argument);
}

TEST_CASE("initial profiles") {
    const auto zero = LimitInitialProfile::zero();
    CHECK(zero.at(3.0) == 0.0);
    CHECK(zero.at_infinity() == 0.0);
    CHECK(zero.has_decaying_tail());

    const auto pl = LimitInitialProfile::piecewise_linear({1.0, 2.0}, {0.5, 0.8});
    CHECK(pl.at(0.0) == 0.0);
    CHECK(pl.at(0.5) == Catch::Approx(0.25));
    CHECK(pl.at(1.5) == Catch::Approx(0.65));
    CHECK(pl.at(10.0) == Catch::Approx(0.8));
    CHECK(pl.at_infinity() == Catch::Approx(0.8));

    const auto sc = LimitInitialProfile::scaled(2.0, ServiceDist::pareto(1.0, 2.0));
    CHECK(sc.at_infinity() == Catch::Approx(2.0 * 1.5));
    CHECK(sc.at(1.0) == Catch::Approx(2.0 * (1.5 - 1.5)).margin(1e-12));  // whole tail above 1
    CHECK(sc.at(2.0) == Catch::Approx(2.0 * (1.5 - 0.375)));
    CHECK_FALSE(sc.has_decaying_tail());

    // a field with a nonzero profile starts at xi
    LimitSpec spec(0.0, 1.0, 1.0, 2.0, pl);
    const RandomField f = sample_field(spec, 0.01, 1e-3, {0.5, 1.5}, 2);
    CHECK(f.W[0][0] == Catch::Approx(0.25));
    CHECK(f.W[1][0] == Catch::Approx(0.65));
    CHECK(f.W[2][0] == Catch::Approx(0.8));
}

TEST_CASE("collapse proof bound: middle window mass is controlled by sup W_inf") {
    const LimitSpec spec(0.0, 1.0, 2.0, 2.0);
    const double eps = 0.25;
    const auto levels = default_level_grid(1.0 - eps, 1.0, 0.25 / 16.0);
    const RandomField field = sample_field(spec, 1.0, 1e-3, levels, 21);
    double sup_w = 0.0;
    for (double w : field.W.back()) sup_w = std::max(sup_w, w);
    for (std::size_t i = 0; i < field.times.size(); i += 250) {
        if (field.times[i] == 0.0) continue;
        const double t = field.times[i];
        // interior trapezoid of x^{-2} W_x over [1-eps, 1]
        double integral = 0.0;
        for (std::size_t j = 0; j + 1 < field.levels.size(); ++j) {
            const double xa = field.levels[j], xb = field.levels[j + 1];
            integral += 0.5 * (field.W[j][i] / (xa * xa) + field.W[j + 1][i] / (xb * xb)) * (xb - xa);
        }
        CHECK(integral <= eps / (1.0 - eps) * sup_w + 1e-9);
    }
}

TEST_CASE("collapse gap is zero at t = 0 and the runner shares one driver") {
    const std::vector<double> p_list = {2.0, 4.0};
    const std::vector<double> sigmas = {2.0, std::sqrt(5.0 / 3.0 + 1.0)};
    const auto gaps = collapse_gap(p_list, sigmas, 0.0, 1.0, LimitInitialProfile::zero(), 0.25, 1e-3,
                                   default_level_grid(), 3);
    REQUIRE(gaps.size() == 2);
    for (double g : gaps) CHECK(g >= 0.0);
    CHECK_THROWS_AS(collapse_gap(std::vector<double>{1.5}, std::vector<double>{1.0}, 0.0, 1.0,
                                 LimitInitialProfile::zero(), 0.25, 1e-3, default_level_grid(), 3),
                    std::invalid_argument);
}

// run explicitly with tests/test_limit_field "[slow]" to revalidate the
// closed-form marginal against a fine-grid simulation
TEST_CASE("reflected marginal at dt=1e-4 stays within the closed-form law", "[.][slow]") {
    const double sigma = std::sqrt(2.0), t = 1.0;
    const LimitSpec spec(0.0, 2.0 / 3.0, sigma, 2.0);
    const int n = 10000;
    std::vector<double> draws(n);
    for (int i = 0; i < n; ++i) {
        const RandomField f =
            sample_field(spec, t, 1e-4, {2.0}, derive_stream_seed(2718, static_cast<std::uint64_t>(i)));
        draws[static_cast<std::size_t>(i)] = f.W[0].back();
    }
    const double mu = -spec.lambda / 4.0;
    const double ks =
        ks_statistic(draws, [&](double w) { return reflected_bm_marginal_cdf(std::max(w, 0.0), t, mu, sigma); });
    CHECK(ks < 0.03);
}

TEST_CASE("reflected marginal matches the closed-form law (small budget)") {
    const double sigma = std::sqrt(2.0), t = 1.0, a = 2.0;
    const LimitSpec spec(0.0, 2.0 / 3.0, sigma, 2.0);
    const double mu = spec.kappa - spec.lambda / std::pow(a, spec.p);
    const int n = 2000;
    std::vector<double> draws(n);
    for (int i = 0; i < n; ++i) {
        const RandomField f = sample_field(spec, t, 1e-3, {a}, derive_stream_seed(314, static_cast<std::uint64_t>(i)));
        draws[static_cast<std::size_t>(i)] = f.W[0].back();
    }
    const double ks =
        ks_statistic(draws, [&](double w) { return reflected_bm_marginal_cdf(std::max(w, 0.0), t, mu, sigma); });
    CHECK(ks < 0.1);
}
