#include "rbnlab/stats.hpp"

#include <algorithm>
#include <stdexcept>

namespace rbnlab {

McEstimate mc_summary(std::span<const double> samples) {
    McEstimate out;
    out.n = samples.size();
    if (out.n == 0) return out;
    double sum = 0.0;
    for (double v : samples) sum += v;
    out.value = sum / static_cast<double>(out.n);
    if (out.n < 2) return out;
    double ss = 0.0;
    for (double v : samples) {
        double d = v - out.value;
        ss += d * d;
    }
    out.sd = std::sqrt(ss / static_cast<double>(out.n - 1));
    out.se = out.sd / std::sqrt(static_cast<double>(out.n));
    return out;
}

double chi_square_normal_stat(std::span<const double> samples, double mu, double sigma, int n_bins) {
    if (n_bins < 2) throw std::invalid_argument("chi_square_normal_stat: n_bins < 2");
    if (sigma <= 0.0) throw std::invalid_argument("chi_square_normal_stat: sigma <= 0");
    std::vector<std::size_t> counts(static_cast<std::size_t>(n_bins), 0);
    for (double v : samples) {
        double u = normal_cdf((v - mu) / sigma);
        int b = static_cast<int>(u * n_bins);
        b = std::clamp(b, 0, n_bins - 1);
        counts[static_cast<std::size_t>(b)]++;
    }
    const double expected = static_cast<double>(samples.size()) / n_bins;
    double stat = 0.0;
    for (std::size_t c : counts) {
        double d = static_cast<double>(c) - expected;
        stat += d * d / expected;
    }
    return stat;
}

double ls_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("ls_slope: need two equal-length series");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("ls_slope: degenerate abscissae");
    return (n * sxy - sx * sy) / denom;
}

} // namespace rbnlab
