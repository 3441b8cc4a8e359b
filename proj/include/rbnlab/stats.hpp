#ifndef RBNLAB_STATS_HPP
#define RBNLAB_STATS_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace rbnlab {

// Monte Carlo summary: estimate, sample SD, standard error of the mean.
struct McEstimate {
    double value = 0.0;
    double sd = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

McEstimate mc_summary(std::span<const double> samples);

// Standard normal CDF via erf.
inline double normal_cdf(double z) { return 0.5 * (1.0 + std::erf(z / std::sqrt(2.0))); }

// Chi-square goodness-of-fit statistic for samples against N(mu, sigma^2),
// using n_bins equiprobable bins through the probability integral transform.
// Degrees of freedom = n_bins - 1.
double chi_square_normal_stat(std::span<const double> samples, double mu, double sigma, int n_bins);

// Least-squares slope of y against x.
double ls_slope(std::span<const double> x, std::span<const double> y);

} // namespace rbnlab

#endif
