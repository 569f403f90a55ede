#include "branchode/lifetime.hpp"

#include <cmath>

namespace branchode {

namespace {
// 1/sqrt(pi)
constexpr double kInvSqrtPi = 0.56418958354775628695;
} // namespace

double density_at(const LifetimeDensity& d, double t) {
    switch (d.kind) {
        case LifetimeDensity::Kind::Exponential:
            if (t < 0.0) throw std::domain_error("density_at: t must be >= 0");
            return d.rate * std::exp(-d.rate * t);
        case LifetimeDensity::Kind::GammaHalf:
            if (t <= 0.0) throw std::domain_error("gamma-half density needs t > 0");
            return kInvSqrtPi * std::exp(-t) / std::sqrt(t);
    }
    return 0.0;
}

double tail_at(const LifetimeDensity& d, double t) {
    if (t < 0.0) throw std::domain_error("tail_at: t must be >= 0");
    switch (d.kind) {
        case LifetimeDensity::Kind::Exponential:
            return std::exp(-d.rate * t);
        case LifetimeDensity::Kind::GammaHalf:
            return std::erfc(std::sqrt(t));
    }
    return 0.0;
}

double sample_lifetime(const LifetimeDensity& d, Rng& rng) {
    switch (d.kind) {
        case LifetimeDensity::Kind::Exponential:
            return -std::log(rng.uniform_pos()) / d.rate;
        case LifetimeDensity::Kind::GammaHalf:
            for (;;) {
                const double z = rng.normal();
                const double tau = 0.5 * z * z;
                if (tau > 0.0) return tau;
            }
    }
    return 0.0;
}

} // namespace branchode
