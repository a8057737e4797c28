#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "srptlab/distributions.hpp"
#include "srptlab/rng.hpp"
#include "test_oracles.hpp"

using namespace srptlab;

namespace {
const ServiceDist kPareto12 = ServiceDist::pareto(1.0, 2.0);
}

TEST_CASE("pareto moments match quadrature oracle") {
    const auto ccdf = [](double t) { return kPareto12.ccdf(t); };
    CHECK(kPareto12.mean() == Catch::Approx(oracle::tail_mean_by_quadrature(ccdf, 0.0, 3e6)).epsilon(1e-9));
    CHECK(kPareto12.second_moment() ==
          Catch::Approx(oracle::second_moment_by_quadrature(ccdf, 3e7)).epsilon(1e-6));
    CHECK(kPareto12.mean() == 1.5);
    CHECK(kPareto12.second_moment() == 3.0);
    CHECK(kPareto12.variance() == Catch::Approx(0.75));
}

TEST_CASE("lomax moments match quadrature oracle and the closed forms") {
    const auto d = ServiceDist::lomax(1.0, 3.0);
    const auto ccdf = [&](double t) { return d.ccdf(t); };
    CHECK(d.mean() == Catch::Approx(1.0));
    CHECK(d.mean() == Catch::Approx(oracle::tail_mean_by_quadrature(ccdf, 0.0, 2e5)).epsilon(1e-8));
    CHECK(d.second_moment() == Catch::Approx(oracle::second_moment_by_quadrature(ccdf, 2e6)).epsilon(1e-5));
    CHECK(d.variance() == Catch::Approx((3.0 + 1.0) / (3.0 - 1.0)));  // (p+1)/((p-1) lambda^2)
    CHECK_THROWS_AS(ServiceDist::lomax(1.0, 1.5), std::invalid_argument);
}

TEST_CASE("inverse cdf sampling") {
    CHECK(inverse_cdf_sample(kPareto12, 1.0) == Catch::Approx(1.0));
    CHECK(inverse_cdf_sample(kPareto12, 0.125) == Catch::Approx(2.0));
    CHECK(inverse_cdf_sample(kPareto12, 1e-3) == Catch::Approx(10.0));
    CHECK_THROWS_AS(inverse_cdf_sample(kPareto12, 0.0), std::domain_error);
    CHECK_THROWS_AS(inverse_cdf_sample(kPareto12, 1.5), std::domain_error);

    const auto lomax = ServiceDist::lomax(2.0, 4.0);
    for (double u : {0.03, 0.2, 0.77, 1.0})
        CHECK(lomax.ccdf(inverse_cdf_sample(lomax, u)) == Catch::Approx(u).epsilon(1e-12));
}

TEST_CASE("truncated first moment: oracle-derived values") {
    const auto ccdf = [](double t) { return kPareto12.ccdf(t); };
    const double at2 = oracle::tail_mean_by_quadrature(ccdf, 2.0, 3e6);
    const double at1 = oracle::tail_mean_by_quadrature(ccdf, 1.0, 3e6);
    CHECK(at2 == Catch::Approx(0.375).epsilon(1e-9));
    CHECK(at1 == Catch::Approx(1.5).epsilon(1e-9));
    CHECK(truncated_first_moment(kPareto12, 2.0) == Catch::Approx(0.375));
    CHECK(truncated_first_moment(kPareto12, 1.0) == Catch::Approx(1.5));
    CHECK(truncated_first_moment(kPareto12, 0.5) == Catch::Approx(1.5));  // below support

    const auto lomax = ServiceDist::lomax(0.5, 2.5);
    const auto lccdf = [&](double t) { return lomax.ccdf(t); };
    for (double x : {0.0, 0.3, 1.7, 9.0})
        CHECK(truncated_first_moment(lomax, x) ==
              Catch::Approx(oracle::tail_mean_by_quadrature(lccdf, x, 4e6)).epsilon(1e-7));
}

TEST_CASE("scale parameter: closed form, bisection oracle, round trip") {
    CHECK(scale_parameter(kPareto12, 100.0) == Catch::Approx(std::sqrt(150.0)).epsilon(1e-13));
    // bisection oracle on S(x) = 2 x^2 / 3
    const double by_bisection =
        oracle::invert_monotone([](double x) { return scaling_function(kPareto12, x); }, 6.0, 1.0, 100.0);
    CHECK(by_bisection == Catch::Approx(3.0).epsilon(1e-10));
    CHECK(scale_parameter(kPareto12, 6.0) == Catch::Approx(3.0).epsilon(1e-12));
    for (double r : {2.0, 10.0, 1234.5})
        CHECK(scaling_function(kPareto12, scale_parameter(kPareto12, r)) == Catch::Approx(r).epsilon(1e-12));

    const auto lomax = ServiceDist::lomax(1.5, 2.0);
    for (double r : {2.0, 20.0, 2000.0})
        CHECK(scaling_function(lomax, scale_parameter(lomax, r)) == Catch::Approx(r).epsilon(1e-9));

    CHECK_THROWS_AS(scale_parameter(kPareto12, 0.5), std::invalid_argument);  // r <= S(0) = 2/3
}

TEST_CASE("empirical distribution: exact tail sums and support scan") {
    const auto d = ServiceDist::empirical({1.0, 2.0, 2.0, 5.0});
    CHECK(d.mean() == Catch::Approx(2.5));
    CHECK(truncated_first_moment(d, 1.0) == Catch::Approx((2.0 + 2.0 + 5.0) / 4.0));
    CHECK(truncated_first_moment(d, 2.0) == Catch::Approx(5.0 / 4.0));
    CHECK(truncated_first_moment(d, 5.0) == 0.0);
    // S steps through 0.4, 4/9, 0.8 at the support points and is infinite
    // past the largest one, so S^{-1}(1) lands on that largest point
    const double cr = scale_parameter(d, 1.0);
    CHECK(scaling_function(d, cr) > 1.0);
    CHECK(cr == 5.0);
    // sampling puts mass 1/4 on each observation (sd = 1.5)
    CounterRng rng(3);
    double mean = 0.0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) mean += draw_service(d, rng);
    mean /= n;
    CHECK(mean == Catch::Approx(2.5).margin(3.0 * 1.5 / std::sqrt(static_cast<double>(n))));
}

TEST_CASE("heavy traffic arrival rate and the exact identity") {
    CHECK(heavy_traffic_arrival_rate(kPareto12, 50.0, 0.0) == Catch::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(heavy_traffic_arrival_rate(kPareto12, 100.0, 1.0) == Catch::Approx(1.01 / 1.5).epsilon(1e-14));
    for (double r : {10.0, 100.0, 1e4})
        for (double kappa : {-2.0, 0.0, 3.5}) {
            const double rate = heavy_traffic_arrival_rate(kPareto12, r, kappa);
            CHECK(r * (rate * kPareto12.mean() - 1.0) == Catch::Approx(kappa).margin(1e-14 * (1.0 + std::fabs(kappa))));
        }
    CHECK_THROWS_AS(heavy_traffic_arrival_rate(kPareto12, 2.0, -3.0), std::invalid_argument);
}

TEST_CASE("diffusion variance from moment oracle") {
    // E v^2 = 3, Var = 0.75, lambda = 2/3
    CHECK(diffusion_variance(kPareto12, 1.5) == Catch::Approx(2.0).epsilon(1e-14));
    CHECK(diffusion_variance(kPareto12, 0.0) == Catch::Approx(0.5).epsilon(1e-14));
    const auto degenerate = ServiceDist::empirical({2.0, 2.0});
    CHECK(diffusion_variance(degenerate, 0.0) == 0.0);
    CHECK_THROWS_AS(diffusion_variance(kPareto12, -1.0), std::domain_error);
}

TEST_CASE("karamata ratio is exact for pareto") {
    for (double r : {10.0, 100.0, 1e3, 1e4, 1e6}) {
        const double cr = scale_parameter(kPareto12, r);
        for (double a : {0.25, 0.5, 1.0, 2.0, 8.0}) {
            if (a * cr < kPareto12.scale_m()) continue;
            const double ratio =
                truncated_first_moment(kPareto12, a * cr) / truncated_first_moment(kPareto12, cr);
            CHECK(ratio == Catch::Approx(std::pow(a, -2.0)).epsilon(1e-12));
        }
    }
}

TEST_CASE("growth bracket and decay of c^r / r") {
    const double p = 2.0, eps = 0.1;
    for (double r : {1e3, 1e4, 1e5, 1e6}) {
        const double cr = scale_parameter(kPareto12, r);
        CHECK(cr > std::pow((p + 1.0) * r / p, 1.0 / (p + eps)));
        CHECK(cr < std::pow((p + 1.0) * r / p, 1.0 / (p - eps)));
    }
    double prev = std::numeric_limits<double>::infinity();
    for (double r = 10.0; r <= 1e7; r *= 10.0) {
        const double ratio = scale_parameter(kPareto12, r) / r;
        CHECK(ratio < prev);
        prev = ratio;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("sampling moment check: 1e6 draws within 3 standard errors") {
    CounterRng rng(42);
    const int n = 1000000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += draw_service(kPareto12, rng);
    const double se = std::sqrt(kPareto12.variance() / static_cast<double>(n));
    CHECK(sum / n == Catch::Approx(kPareto12.mean()).margin(3.0 * se));
}

TEST_CASE("arrival specs: gap scaling and sigma_A") {
    CounterRng rng(1);
    const double rate = 2.0 / 3.0;
    CHECK(ArrivalSpec::poisson().sigma_A(rate) == Catch::Approx(1.5));
    CHECK(ArrivalSpec::deterministic().sigma_A(rate) == 0.0);
    const auto uni = InterArrival::shifted_uniform(1.0, 3.0);
    CHECK(uni.sigma(1.0) == Catch::Approx((3.0 - 1.0) / (std::sqrt(12.0) * 2.0)));
    double acc = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) acc += uni.draw(rng, rate);
    CHECK(acc / n == Catch::Approx(1.0 / rate).epsilon(0.01));
    CHECK(InterArrival::deterministic().draw(rng, rate) == Catch::Approx(1.5));
}

TEST_CASE("heavy traffic params bundle") {
    const HeavyTrafficParams ht(kPareto12, 100.0, 0.0);
    CHECK(ht.lambda_r == Catch::Approx(2.0 / 3.0));
    CHECK(ht.c_r == Catch::Approx(std::sqrt(150.0)));
    CHECK(ht.r * (ht.lambda_r * kPareto12.mean() - 1.0) == Catch::Approx(0.0).margin(1e-14));
}
