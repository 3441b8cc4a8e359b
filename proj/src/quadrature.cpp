#include "rbnlab/quadrature.hpp"

#include <cmath>

namespace rbnlab {

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                    double fm, double fb, double whole, double tol, int depth, int max_depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double err = left + right - whole;
    if (depth >= max_depth || std::abs(err) <= 15.0 * tol)
        return left + right + err / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, max_depth) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, max_depth);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, whole, tol, 0, max_depth);
}

} // namespace rbnlab
