#include "branchode/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace branchode;

TEST_CASE("same seed gives the same stream") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("for_sample streams are keyed by index, not by grouping") {
    Rng a = Rng::for_sample(7, 123);
    Rng b = Rng::for_sample(7, 123);
    CHECK(a.next_u64() == b.next_u64());
    Rng c = Rng::for_sample(7, 124);
    // distinct indices must not collide on the first word
    CHECK(Rng::for_sample(7, 123).next_u64() != c.next_u64());
}

TEST_CASE("mix_seed separates salts") {
    CHECK(mix_seed(1, 0) != mix_seed(1, 1));
    CHECK(mix_seed(1, 0) != mix_seed(2, 0));
}

TEST_CASE("uniform lies in [0,1) and uniform_pos in (0,1]") {
    Rng r(3);
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double v = r.uniform_pos();
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("uniform moments") {
    Rng r(11);
    const int n = 1000000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        s += u;
        s2 += u * u;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
    CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("normal moments") {
    Rng r(13);
    const int n = 1000000;
    double s = 0.0, s2 = 0.0, s4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        s += z;
        s2 += z * z;
        s4 += z * z * z * z;
    }
    CHECK(std::fabs(s / n) < 0.005);
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.01));
    CHECK(s4 / n == doctest::Approx(3.0).epsilon(0.03));
}
