#ifndef BRANCHODE_QUADRATURE_HPP
#define BRANCHODE_QUADRATURE_HPP

#include <cmath>
#include <functional>

namespace branchode {

namespace detail {

inline double simpson(const std::function<double(double)>& f,
                      double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f,
                                   double a, double fa, double b, double fb,
                                   double fm, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(f, a, fa, m, fm, flm);
    const double right = simpson(f, m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1)
         + adaptive_simpson_rec(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

} // namespace detail

// Adaptive Simpson on [a, b] with absolute tolerance tol.
inline double integrate(const std::function<double(double)>& f,
                        double a, double b, double tol = 1e-12, int max_depth = 50) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = detail::simpson(f, a, fa, b, fb, fm);
    return detail::adaptive_simpson_rec(f, a, fa, b, fb, fm, whole, tol, max_depth);
}

// Bisection root finder for a continuous f with f(lo), f(hi) of opposite sign.
inline double bisect(const std::function<double(double)>& f,
                     double lo, double hi, double tol = 1e-14, int max_iter = 200) {
    double flo = f(lo);
    for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = f(mid);
        if ((flo <= 0.0) == (fmid <= 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace branchode

#endif // BRANCHODE_QUADRATURE_HPP
