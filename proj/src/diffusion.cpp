#include "rbnlab/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rbnlab/quadrature.hpp"

namespace rbnlab {

namespace {

constexpr double kLpWindow = 16.0; // envelope e^{-x^2} is below 1e-100 here

// C^inf step: 0 at t<=0, 1 at t>=1
double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

double cutoff_phi(double x, double epsilon) {
    const double inner = 1.0 / epsilon;
    const double ax = std::abs(x);
    if (ax <= inner) return 1.0;
    if (ax >= inner + 1.0) return 0.0;
    return smooth_step(1.0 - (ax - inner));
}

// integral of |g| over [lo, hi] with geometric refinement toward 0, where the
// singular profiles concentrate their variation
double integrate_geometric(const std::function<double(double)>& g, double lo, double hi) {
    std::vector<double> cuts{lo, hi};
    for (double x = 1e-8; x < std::max(std::abs(lo), std::abs(hi)); x *= 2.0) {
        if (x > lo && x < hi) cuts.push_back(x);
        if (-x > lo && -x < hi) cuts.push_back(-x);
    }
    if (0.0 > lo && 0.0 < hi) cuts.push_back(0.0);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        total += adaptive_simpson(g, cuts[i], cuts[i + 1], 1e-10);
    return total;
}

double lp_norm_of(const std::function<double(double)>& sigma_sq, double p) {
    auto integrand = [&](double x) { return std::pow(std::abs(sigma_sq(x)), p); };
    return std::pow(integrate_geometric(integrand, -kLpWindow, kLpWindow), 1.0 / p);
}

// composite Simpson over a uniformly tabulated function
double simpson_table(const std::vector<double>& f, double dx) {
    if (f.size() < 3) return 0.0;
    const std::size_t n = (f.size() - 1) & ~std::size_t{1}; // even interval count
    double acc = f[0] + f[n];
    for (std::size_t i = 1; i < n; ++i) acc += f[i] * (i % 2 == 1 ? 4.0 : 2.0);
    double total = acc * dx / 3.0;
    if (n + 1 < f.size()) total += 0.5 * dx * (f[n] + f[n + 1]); // trapezoid remainder
    return total;
}

} // namespace

double mollifier_bump(double x) {
    if (std::abs(x) >= 1.0) return 0.0;
    static const double norm = adaptive_simpson(
        [](double y) {
            const double d = 1.0 - y * y;
            return d > 0.0 ? std::exp(-1.0 / d) : 0.0;
        },
        -1.0, 1.0, 1e-12);
    const double d = 1.0 - x * x;
    return std::exp(-1.0 / d) / norm;
}

std::vector<double> DiffusionCoefficient::default_weights(std::size_t K_noise) {
    if (K_noise == 0)
        throw std::invalid_argument("DiffusionCoefficient: K_noise must be at least 1");
    std::vector<double> w(K_noise);
    double sum_sq = 0.0;
    for (std::size_t k = 0; k < K_noise; ++k) {
        w[k] = 1.0 / (1.0 + static_cast<double>(k) * static_cast<double>(k));
        sum_sq += w[k] * w[k];
    }
    const double inv = 1.0 / std::sqrt(sum_sq);
    for (double& a : w) a *= inv;
    return w;
}

DiffusionCoefficient DiffusionCoefficient::singular(std::size_t K_noise, double gamma, double cap,
                                                    double p) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("DiffusionCoefficient::singular: gamma outside (0,1)");
    if (!(cap > 0.0)) throw std::invalid_argument("DiffusionCoefficient::singular: cap <= 0");
    DiffusionCoefficient d;
    d.K_noise = K_noise;
    d.weights = default_weights(K_noise);
    d.gamma = gamma;
    d.cap = cap;
    d.p = p;
    d.smooth = false;
    d.profile = [gamma, cap](double x) {
        const double sigma_sq = std::min(std::pow(std::abs(x), -gamma), cap) * std::exp(-x * x);
        return std::sqrt(sigma_sq);
    };
    d.lp_norm_sigma_sq = lp_norm_of([&d](double x) { return d.sigma_sq(x); }, p);
    return d;
}

DiffusionCoefficient DiffusionCoefficient::smooth_bounded(std::size_t K_noise, double scale,
                                                          double p) {
    DiffusionCoefficient d;
    d.K_noise = K_noise;
    d.weights = default_weights(K_noise);
    d.p = p;
    d.smooth = true;
    d.cap = scale * scale;
    d.profile = [scale](double x) { return scale * std::exp(-0.5 * x * x); };
    d.lp_norm_sigma_sq = lp_norm_of([&d](double x) { return d.sigma_sq(x); }, p);
    return d;
}

DiffusionCoefficient DiffusionCoefficient::constant(std::size_t K_noise, double c) {
    DiffusionCoefficient d;
    d.K_noise = K_noise;
    d.weights = default_weights(K_noise);
    d.smooth = true;
    d.cap = c * c;
    d.profile = [c](double) { return c; };
    d.lp_norm_sigma_sq = std::numeric_limits<double>::infinity(); // no decay at infinity
    return d;
}

DiffusionCoefficient DiffusionCoefficient::custom(std::vector<double> weights,
                                                  std::function<double(double)> profile, double p,
                                                  double gamma) {
    if (weights.empty()) throw std::invalid_argument("DiffusionCoefficient::custom: no weights");
    double sum_sq = 0.0;
    for (double a : weights) sum_sq += a * a;
    if (std::abs(sum_sq - 1.0) > 1e-8)
        throw std::invalid_argument("DiffusionCoefficient::custom: weights must satisfy "
                                    "sum of squares = 1");
    DiffusionCoefficient d;
    d.K_noise = weights.size();
    d.weights = std::move(weights);
    d.profile = std::move(profile);
    d.p = p;
    d.gamma = gamma;
    d.lp_norm_sigma_sq = lp_norm_of([&d](double x) { return d.sigma_sq(x); }, p);
    return d;
}

double MollifiedDiffusion::profile_eps(double x) const {
    if (x < x_lo) return 0.0;
    const double pos = (x - x_lo) / dx;
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= table.size()) return 0.0;
    const double frac = pos - static_cast<double>(i);
    return table[i] + frac * (table[i + 1] - table[i]);
}

MollifiedDiffusion mollify(const DiffusionCoefficient& sigma, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("mollify: epsilon must be positive");
    MollifiedDiffusion m;
    m.parent = sigma;
    m.epsilon = epsilon;

    const double support = 1.0 / epsilon + 1.0; // cutoff support half-width
    m.dx = epsilon / 8.0;
    m.x_lo = -(support + m.dx);
    const auto n_pts = static_cast<std::size_t>(std::ceil(2.0 * (support + m.dx) / m.dx)) + 1;
    m.table.resize(n_pts);

    // y-locations inside the bump support where the integrand s(x - eps*y) has a
    // kink: the singularity x - eps*y = 0 and the cap corners +-cap^{-1/gamma}
    const bool has_corner = !sigma.smooth && sigma.gamma > 0.0 && sigma.cap > 0.0;
    const double corner = has_corner ? std::pow(sigma.cap, -1.0 / sigma.gamma) : 0.0;

    for (std::size_t i = 0; i < n_pts; ++i) {
        const double x = m.x_lo + static_cast<double>(i) * m.dx;
        const double phi = cutoff_phi(x, epsilon);
        if (phi == 0.0) {
            m.table[i] = 0.0;
            continue;
        }
        auto integrand = [&](double y) { return sigma.profile(x - epsilon * y) * mollifier_bump(y); };
        std::vector<double> cuts{-1.0, 1.0};
        if (!sigma.smooth) {
            for (double pt : {x / epsilon, (x - corner) / epsilon, (x + corner) / epsilon})
                if (pt > -1.0 && pt < 1.0) cuts.push_back(pt);
        }
        std::sort(cuts.begin(), cuts.end());
        double conv = 0.0;
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c)
            conv += adaptive_simpson(integrand, cuts[c], cuts[c + 1], 1e-9);
        m.table[i] = conv * phi;
    }

    m.c_eps = 0.0;
    m.C_eps = 0.0;
    for (std::size_t i = 0; i < n_pts; ++i) {
        m.c_eps = std::max(m.c_eps, std::abs(m.table[i]));
        if (i + 1 < n_pts)
            m.C_eps = std::max(m.C_eps, std::abs(m.table[i + 1] - m.table[i]) / m.dx);
    }

    std::vector<double> integrand(n_pts);
    for (std::size_t i = 0; i < n_pts; ++i)
        integrand[i] = std::pow(m.table[i] * m.table[i], sigma.p);
    m.lp_norm_sigma_sq = std::pow(simpson_table(integrand, m.dx), 1.0 / sigma.p);
    return m;
}

double lp_distance_sigma_sq(const MollifiedDiffusion& a, const MollifiedDiffusion& b, double p) {
    const double dx = std::min(a.dx, b.dx);
    const double lo = std::min(a.x_lo, b.x_lo);
    const double hi = std::max(a.x_lo + static_cast<double>(a.table.size() - 1) * a.dx,
                               b.x_lo + static_cast<double>(b.table.size() - 1) * b.dx);
    const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / dx)) + 1;
    std::vector<double> integrand(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = lo + static_cast<double>(i) * dx;
        const double d = a.profile_eps(x) - b.profile_eps(x);
        integrand[i] = std::pow(d * d, p);
    }
    return std::pow(simpson_table(integrand, dx), 1.0 / p);
}

} // namespace rbnlab
