#include "branchode/lifetime.hpp"
#include "branchode/quadrature.hpp"
#include "branchode/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace branchode;

namespace {

// one-sample Kolmogorov-Smirnov statistic against the cdf 1 - tail
double ks_statistic(std::vector<double> draws, const LifetimeDensity& d) {
    std::sort(draws.begin(), draws.end());
    const double n = static_cast<double>(draws.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < draws.size(); ++i) {
        const double cdf = 1.0 - tail_at(d, draws[i]);
        worst = std::max(worst, std::fabs(cdf - static_cast<double>(i) / n));
        worst = std::max(worst, std::fabs(static_cast<double>(i + 1) / n - cdf));
    }
    return worst;
}

} // namespace

TEST_CASE("exponential density and tail closed forms") {
    const LifetimeDensity d = LifetimeDensity::exponential(1.0);
    CHECK(density_at(d, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(tail_at(d, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(tail_at(d, 0.0) == 1.0);

    const LifetimeDensity d3 = LifetimeDensity::exponential(3.0);
    CHECK(density_at(d3, 0.5) == doctest::Approx(3.0 * std::exp(-1.5)).epsilon(1e-15));
    CHECK(tail_at(d3, 0.5) == doctest::Approx(std::exp(-1.5)).epsilon(1e-15));
}

TEST_CASE("exponential rate must be positive") {
    CHECK_THROWS_AS(LifetimeDensity::exponential(0.0), std::invalid_argument);
    CHECK_THROWS_AS(LifetimeDensity::exponential(-1.0), std::invalid_argument);
}

TEST_CASE("gamma-half tail equals erfc(sqrt t) and integrates the density") {
    const LifetimeDensity d = LifetimeDensity::gamma_half();
    CHECK(tail_at(d, 0.0) == 1.0);
    for (double t : {0.1, 1.0, 4.0}) {
        CHECK(tail_at(d, t) == doctest::Approx(std::erfc(std::sqrt(t))).epsilon(1e-12));
        const double mass =
            integrate([&](double u) { return density_at(d, u); }, t, t + 50.0, 1e-13);
        CHECK(tail_at(d, t) == doctest::Approx(mass).epsilon(1e-10));
    }
    // tail is nonincreasing
    double prev = tail_at(d, 0.0);
    for (double t = 0.05; t < 6.0; t += 0.05) {
        const double cur = tail_at(d, t);
        CHECK(cur <= prev);
        prev = cur;
    }
}

TEST_CASE("gamma-half density blows up at zero: domain error") {
    const LifetimeDensity d = LifetimeDensity::gamma_half();
    CHECK_THROWS_AS(density_at(d, 0.0), std::domain_error);
    CHECK(density_at(d, 1e-12) > 0.0);
}

TEST_CASE("exponential draws have the right mean") {
    const LifetimeDensity d = LifetimeDensity::exponential(1.0);
    Rng rng(101);
    const int n = 1000000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += sample_lifetime(d, rng);
    CHECK(std::fabs(s / n - 1.0) < 0.004);
}

TEST_CASE("gamma-half draws have mean 1/2 and are strictly positive") {
    const LifetimeDensity d = LifetimeDensity::gamma_half();
    Rng rng(202);
    const int n = 1000000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = sample_lifetime(d, rng);
        REQUIRE(x > 0.0);
        s += x;
    }
    CHECK(std::fabs(s / n - 0.5) < 0.003);
}

TEST_CASE("draws pass a Kolmogorov-Smirnov test at the 1% level") {
    const int n = 100000;
    const double critical = 1.628 / std::sqrt(static_cast<double>(n));
    for (const LifetimeDensity d :
         {LifetimeDensity::exponential(1.0), LifetimeDensity::exponential(2.5),
          LifetimeDensity::gamma_half()}) {
        Rng rng(303);
        std::vector<double> draws(n);
        for (double& x : draws) x = sample_lifetime(d, rng);
        CHECK(ks_statistic(std::move(draws), d) < critical);
    }
}
