#ifndef BRANCHODE_LIFETIME_HPP
#define BRANCHODE_LIFETIME_HPP

#include "branchode/rng.hpp"

#include <stdexcept>

namespace branchode {

// Branch lifetime distribution. Two densities are supported:
//   Exponential(rate):  rho(t) = rate*exp(-rate*t),   tail(t) = exp(-rate*t)
//   GammaHalf:          rho(t) = t^{-1/2} e^{-t} / sqrt(pi),
//                       tail(t) = erfc(sqrt(t))
// Both have rho > 0 on (0, inf) and nonincreasing rho, which the validity
// diagnostics assume.
struct LifetimeDensity {
    enum class Kind { Exponential, GammaHalf };

    Kind kind = Kind::Exponential;
    double rate = 1.0; // Exponential only

    static LifetimeDensity exponential(double rate) {
        if (rate <= 0.0) throw std::invalid_argument("exponential rate must be positive");
        return {Kind::Exponential, rate};
    }

    static LifetimeDensity gamma_half() { return {Kind::GammaHalf, 1.0}; }
};

// rho(t) for t > 0. The gamma-half density diverges at 0, so querying it at
// exactly 0 is a domain error.
double density_at(const LifetimeDensity& d, double t);

// tail(t) = integral of rho over [t, inf), for t >= 0. tail(0) == 1.
double tail_at(const LifetimeDensity& d, double t);

// One lifetime draw. Exponential by inverse transform; gamma-half as Z^2/2
// for a standard normal Z (a draw of exactly 0 is rejected so the density is
// always finite at the returned point).
double sample_lifetime(const LifetimeDensity& d, Rng& rng);

} // namespace branchode

#endif // BRANCHODE_LIFETIME_HPP
