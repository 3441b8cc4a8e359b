#ifndef RBNLAB_QUADRATURE_HPP
#define RBNLAB_QUADRATURE_HPP

#include <functional>

namespace rbnlab {

// Adaptive Simpson on [a,b] with absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int max_depth = 48);

} // namespace rbnlab

#endif
