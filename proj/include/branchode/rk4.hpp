#ifndef BRANCHODE_RK4_HPP
#define BRANCHODE_RK4_HPP

#include "branchode/expr.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace branchode {

// Classical fourth-order one-step integration of the autonomous system from
// (t0, y0) to t with fixed step h (the final step is shortened to land on t
// exactly). Serves as an independent reference; accuracy is O(h^4).
inline std::vector<double> rk4_solve(const RhsSystem& sys, double t, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("rk4_solve: step must be positive");
    if (t < sys.t0) throw std::invalid_argument("rk4_solve: t precedes the initial time");

    const std::size_t d = static_cast<std::size_t>(sys.dim);
    auto rhs = [&](const std::vector<double>& state) {
        std::vector<double> out(d);
        for (std::size_t i = 0; i < d; ++i) out[i] = evaluate(sys.components[i], state);
        return out;
    };

    std::vector<double> y = sys.y0;
    std::vector<double> stage(d);
    double s = sys.t0;
    while (s < t) {
        const double step = std::min(h, t - s);
        const std::vector<double> k1 = rhs(y);
        for (std::size_t i = 0; i < d; ++i) stage[i] = y[i] + 0.5 * step * k1[i];
        const std::vector<double> k2 = rhs(stage);
        for (std::size_t i = 0; i < d; ++i) stage[i] = y[i] + 0.5 * step * k2[i];
        const std::vector<double> k3 = rhs(stage);
        for (std::size_t i = 0; i < d; ++i) stage[i] = y[i] + step * k3[i];
        const std::vector<double> k4 = rhs(stage);
        for (std::size_t i = 0; i < d; ++i)
            y[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        s += step;
    }
    return y;
}

} // namespace branchode

#endif // BRANCHODE_RK4_HPP
