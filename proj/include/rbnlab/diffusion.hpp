#ifndef RBNLAB_DIFFUSION_HPP
#define RBNLAB_DIFFUSION_HPP

#include <cstddef>
#include <functional>
#include <vector>

namespace rbnlab {

// Family sigma_k(x) = a_k * s(x) with sum_k a_k^2 = 1, so the aggregate
// Sigma^2(x) = sum_k sigma_k(x)^2 = s(x)^2 and the Hilbert-Schmidt norm of the
// multiplication operator is carried entirely by the scalar profile s.
struct DiffusionCoefficient {
    std::size_t K_noise = 1;
    std::vector<double> weights;           // a_k, k = 0..K_noise-1
    std::function<double(double)> profile; // s(x)
    double p = 2.0;                        // declared integrability exponent of Sigma^2
    double lp_norm_sigma_sq = 0.0;         // ||Sigma^2||_{L^p(R)} by quadrature; inf if no decay
    double gamma = 0.0;                    // singularity exponent of Sigma^2 (reporting only)
    double cap = 0.0;                      // singularity cap M (reporting only)
    bool smooth = false;                   // profile is C^inf (no singular split points)

    double sigma_sq(double x) const {
        const double s = profile(x);
        return s * s;
    }
    double sigma_k(std::size_t k, double x) const { return weights[k] * profile(x); }

    // a_k proportional to (1+k^2)^{-1}, normalized to sum of squares 1
    static std::vector<double> default_weights(std::size_t K_noise);
    // Sigma^2(x) = min(|x|^{-gamma}, cap) * exp(-x^2)
    static DiffusionCoefficient singular(std::size_t K_noise, double gamma, double cap = 1e3,
                                         double p = 2.0);
    // Sigma^2(x) = scale^2 * exp(-x^2), bounded and C^inf
    static DiffusionCoefficient smooth_bounded(std::size_t K_noise, double scale, double p = 2.0);
    // s(x) = c identically; not integrable, lp_norm reported as +inf
    static DiffusionCoefficient constant(std::size_t K_noise, double c);
    static DiffusionCoefficient custom(std::vector<double> weights,
                                       std::function<double(double)> profile, double p,
                                       double gamma = 0.0);
};

// sigma_{k,eps} = (sigma_k * rho^eps) phi_eps = a_k * s_eps with
// s_eps = (s * rho^eps) phi_eps: rho a normalized C^inf bump supported on [-1,1],
// rho^eps(x) = rho(x/eps)/eps, and phi_eps a C^inf cutoff == 1 on [-1/eps, 1/eps],
// == 0 outside [-(1/eps+1), 1/eps+1]. s_eps is tabulated on a grid of spacing
// <= eps/8 and evaluated by linear interpolation (exactly 0 outside the support).
struct MollifiedDiffusion {
    DiffusionCoefficient parent;
    double epsilon = 0.0;
    double x_lo = 0.0, dx = 0.0;
    std::vector<double> table;     // s_eps at x_lo + i*dx
    double c_eps = 0.0;            // sup |s_eps|; sup Sigma_eps^2 = c_eps^2
    double C_eps = 0.0;            // Lipschitz constant of s_eps (= HS-Lipschitz of sigma_eps)
    double lp_norm_sigma_sq = 0.0; // ||Sigma_eps^2||_{L^p} from the table

    double profile_eps(double x) const; // linear interpolation; 0 outside the table
    double sigma_sq(double x) const {
        const double s = profile_eps(x);
        return s * s;
    }
    double sigma_k(std::size_t k, double x) const { return parent.weights[k] * profile_eps(x); }
};

MollifiedDiffusion mollify(const DiffusionCoefficient& sigma, double epsilon);

// ||Sigma^2_{eps,eps'}||_{L^p} with Sigma^2_{eps,eps'}(x) = sum_k (sigma_{k,eps} - sigma_{k,eps'})^2
// = (s_eps(x) - s_eps'(x))^2, integrated over the union of the two supports.
double lp_distance_sigma_sq(const MollifiedDiffusion& a, const MollifiedDiffusion& b, double p);

// normalized C^inf bump rho (support [-1,1]) used by mollify; exposed for tests
double mollifier_bump(double x);

} // namespace rbnlab

#endif
