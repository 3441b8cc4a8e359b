#ifndef RBNLAB_OCCUPATION_HPP
#define RBNLAB_OCCUPATION_HPP

#include <functional>
#include <span>
#include <vector>

#include "rbnlab/sample_path.hpp"

namespace rbnlab {

struct SpatialGrid {
    double x_min = -1.0;
    double x_max = 1.0;
    std::size_t n_bins = 2;

    double dx() const { return (x_max - x_min) / static_cast<double>(n_bins); }
    double center(std::size_t i) const { return x_min + (static_cast<double>(i) + 0.5) * dx(); }
    // bin of x; throws when x falls outside [x_min, x_max) (insufficient padding)
    std::size_t bin_index(double x) const;

    // grid spanning the path range plus padding
    static SpatialGrid covering(const SamplePath& path, std::size_t n_bins, double pad);
};

struct Smoothing {
    enum class Mode { histogram, kernel } mode = Mode::histogram;
    double bandwidth = 0.0; // Gaussian bandwidth; derivative-bearing uses default 2*dx

    static Smoothing histogram() { return {Mode::histogram, 0.0}; }
    static Smoothing kernel(double bw) { return {Mode::kernel, bw}; }
};

// mass per bin: dt * #{j in [0, t_index) : w_{t_j} in bin} (left-endpoint time quadrature)
std::vector<double> occupation_measure(const SamplePath& path, const SpatialGrid& grid,
                                       std::size_t t_index);

struct LocalTimeSlice {
    SpatialGrid grid;
    double t = 0.0;
    std::vector<double> values; // L_t(x_i), time per space
};

LocalTimeSlice local_time(const SamplePath& path, const SpatialGrid& grid, std::size_t t_index,
                          const Smoothing& smoothing = Smoothing::histogram());

struct LocalTimeField {
    SpatialGrid grid;
    std::vector<double> times;
    std::vector<std::vector<double>> values; // values[j][i] = L_{t_j}(x_i)
};

LocalTimeField local_time_field(const SamplePath& path, const SpatialGrid& grid,
                                std::span<const std::size_t> t_indices,
                                const Smoothing& smoothing = Smoothing::histogram());

struct AveragedField {
    SpatialGrid grid;
    double s = 0.0, t = 0.0;
    std::vector<double> values; // (T^{-w}_{s,t} f)(x_i)
};

enum class AveragingMethod { quadrature, convolution };

// T^{-w}_{s,t} f two independent ways: direct time quadrature
// dt*sum_{s<=j<t} f(x_i - w_{t_j}), or convolution with the histogram local time
// (f * L_{s,t})(x_i). The two agree within the histogram discretization error.
AveragedField averaged_field(const SamplePath& path, const std::function<double(double)>& f,
                             std::size_t s_index, std::size_t t_index, const SpatialGrid& grid,
                             AveragingMethod method);

// occupation-times formula: dt*sum_j f(w_{t_j})  vs  sum_i f(x_i) L_t(x_i) dx
struct OccupationFormulaCheck {
    double direct = 0.0;
    double via_local_time = 0.0;
    double rel_error = 0.0;
};

OccupationFormulaCheck occupation_formula_check(const SamplePath& path,
                                                const std::function<double(double)>& f,
                                                const SpatialGrid& grid, std::size_t t_index);

// lambda_max = 1/(2H) - 1/min(p,2); gamma_max(lambda) = 1 - (lambda + 1/2) H.
// Both bounds are open: callers must stay strictly inside.
struct RegularityExponents {
    double hurst = 0.0;
    double p = 0.0;
    double lambda_max = 0.0;
    double gamma_max(double lambda) const { return 1.0 - (lambda + 0.5) * hurst; }
};

RegularityExponents regularity_exponents(double H, double p);

// admissible iff H < H_bound = (1/2)(1 + 1/min(p,4/3))^{-1} and
// 1/2 < gamma0 < gamma0_bound = 1 - (4 + 1/min(p/4, 1/3))^{-1}
struct AssumptionCheck {
    bool admissible = false;
    double H_bound = 0.0;
    double gamma0_bound = 0.0;
};

AssumptionCheck assumption_check(double H, double p, double gamma0);

// W^{1,p'} norm of a (smoothed) local-time slice via finite differences.
double w1p_norm(const LocalTimeSlice& slice, double p_prime);

struct RegularityCheckOptions {
    std::size_t n_bins = 512;
    int level_min = 3;
    int level_max = 10; // dyadic (s,t) mesh depth; needs path n_steps divisible by 2^level_max
    double pad = 0.5;
    double kernel_bandwidth_factor = 2.0; // bandwidth = factor * dx for the C1 leg
    std::size_t gradient_stencil = 1;     // C1 leg differences span 2*stencil*dx
};

// Multiscale Holder estimates of sup_x |T^{-w}_{s,t} f| / |t-s|^gamma0 and the
// C1 analogue (centered differences of the kernel-smoothed field) over adjacent
// dyadic pairs at each scale; stability = successive-refinement ratios in [0.5,2].
// The fitted log2-slope across scales is reported as the divergence detector:
// a positive slope ~ (gamma - gamma_true) signals an exponent outside the region.
struct RegularityCheckReport {
    double p = 0.0, gamma0 = 0.0, gamma1 = 0.0;
    std::vector<int> levels;
    // medians over the seed set, per level
    std::vector<double> c0_constants;
    std::vector<double> c1_constants;
    double c0_slope = 0.0, c1_slope = 0.0; // fitted log2 C_l vs l
    bool c0_ratios_stable = false, c1_ratios_stable = false;
    double f_lp_norm = 0.0; // L^p norm of f (quadrature), the precondition f in L^p
};

RegularityCheckReport averaged_field_regularity_check(std::span<const SamplePath> paths,
                                                      const std::function<double(double)>& f,
                                                      double p, double gamma0, double gamma1,
                                                      const RegularityCheckOptions& opts = {});

} // namespace rbnlab

#endif
