#include "rbnlab/occupation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rbnlab/quadrature.hpp"
#include "rbnlab/stats.hpp"

namespace rbnlab {

namespace {

void check_time_index(const SamplePath& path, std::size_t t_index, const char* where) {
    if (t_index > path.n_steps)
        throw std::invalid_argument(std::string(where) + ": t_index " + std::to_string(t_index) +
                                    " exceeds n_steps " + std::to_string(path.n_steps));
}

// discrete Gaussian taps, normalized to unit sum so smoothing conserves mass
std::vector<double> kernel_taps(double bandwidth, double dx) {
    if (!(bandwidth > 0.0)) throw std::invalid_argument("kernel smoothing requires bandwidth > 0");
    const auto half = static_cast<std::size_t>(std::ceil(5.0 * bandwidth / dx));
    std::vector<double> taps(2 * half + 1);
    double sum = 0.0;
    for (std::size_t d = 0; d < taps.size(); ++d) {
        const double x = (static_cast<double>(d) - static_cast<double>(half)) * dx;
        taps[d] = std::exp(-0.5 * (x / bandwidth) * (x / bandwidth));
        sum += taps[d];
    }
    for (double& t : taps) t /= sum;
    return taps;
}

std::vector<double> smooth(const std::vector<double>& v, const std::vector<double>& taps) {
    const std::size_t half = taps.size() / 2;
    std::vector<double> out(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
        double acc = 0.0;
        for (std::size_t d = 0; d < taps.size(); ++d) {
            const auto j = static_cast<std::ptrdiff_t>(i) + static_cast<std::ptrdiff_t>(d) -
                           static_cast<std::ptrdiff_t>(half);
            if (j >= 0 && j < static_cast<std::ptrdiff_t>(v.size()))
                acc += taps[d] * v[static_cast<std::size_t>(j)];
        }
        out[i] = acc;
    }
    return out;
}

std::vector<double> apply_smoothing(const std::vector<double>& histogram, const SpatialGrid& grid,
                                    const Smoothing& smoothing) {
    if (smoothing.mode == Smoothing::Mode::histogram) return histogram;
    const double bw = smoothing.bandwidth > 0.0 ? smoothing.bandwidth : 2.0 * grid.dx();
    return smooth(histogram, kernel_taps(bw, grid.dx()));
}

double checked_f(const std::function<double(double)>& f, double arg, const char* where) {
    const double v = f(arg);
    if (!std::isfinite(v))
        throw std::domain_error(std::string(where) + ": f(" + std::to_string(arg) +
                                ") is not finite");
    return v;
}

// Bin averages (1/dx) int_{o-dx/2}^{o+dx/2} f at arbitrary offsets o, via a
// cumulative table at spacing dx/64. Averaging (the projection onto piecewise
// constants) keeps integrable singularities of f finite where point sampling
// would not.
struct CumulativeProfile {
    double lo = 0.0;
    double h = 0.0;
    std::vector<double> cum; // cum[m] = int_lo^{lo + m h} f

    CumulativeProfile(const std::function<double(double)>& f, double a, double b, double dx) {
        lo = a;
        h = dx / 64.0;
        const auto n_cells = static_cast<std::size_t>(std::ceil((b - a) / h)) + 1;
        cum.assign(n_cells + 1, 0.0);
        for (std::size_t m = 0; m < n_cells; ++m) {
            const double l = lo + h * static_cast<double>(m);
            cum[m + 1] = cum[m] + adaptive_simpson(f, l, l + h, 1e-11);
        }
    }

    double at(double x) const { // linear interpolation, clamped
        const double s = (x - lo) / h;
        if (s <= 0.0) return cum.front();
        const auto m = static_cast<std::size_t>(s);
        if (m + 1 >= cum.size()) return cum.back();
        const double frac = s - static_cast<double>(m);
        return cum[m] + frac * (cum[m + 1] - cum[m]);
    }

    double bin_average(double o, double dx) const {
        return (at(o + 0.5 * dx) - at(o - 0.5 * dx)) / dx;
    }
};

} // namespace

std::size_t SpatialGrid::bin_index(double x) const {
    if (!(x >= x_min) || !(x < x_max))
        throw std::out_of_range("SpatialGrid: value " + std::to_string(x) +
                                " outside [" + std::to_string(x_min) + ", " +
                                std::to_string(x_max) + "); widen the grid padding");
    auto i = static_cast<std::size_t>((x - x_min) / dx());
    return std::min(i, n_bins - 1);
}

SpatialGrid SpatialGrid::covering(const SamplePath& path, std::size_t n_bins, double pad) {
    if (n_bins < 2) throw std::invalid_argument("SpatialGrid: need at least 2 bins");
    const auto [lo, hi] = std::minmax_element(path.values.begin(), path.values.end());
    return {*lo - pad, *hi + pad, n_bins};
}

std::vector<double> occupation_measure(const SamplePath& path, const SpatialGrid& grid,
                                       std::size_t t_index) {
    check_time_index(path, t_index, "occupation_measure");
    std::vector<double> mu(grid.n_bins, 0.0);
    const double dt = path.dt();
    for (std::size_t j = 0; j < t_index; ++j) mu[grid.bin_index(path.values[j])] += dt;
    return mu;
}

LocalTimeSlice local_time(const SamplePath& path, const SpatialGrid& grid, std::size_t t_index,
                          const Smoothing& smoothing) {
    auto mu = occupation_measure(path, grid, t_index);
    const double inv_dx = 1.0 / grid.dx();
    for (double& v : mu) v *= inv_dx; // density of the occupation measure
    return {grid, path.time(t_index), apply_smoothing(mu, grid, smoothing)};
}

LocalTimeField local_time_field(const SamplePath& path, const SpatialGrid& grid,
                                std::span<const std::size_t> t_indices,
                                const Smoothing& smoothing) {
    LocalTimeField field{grid, {}, {}};
    if (t_indices.empty()) return field;
    for (std::size_t k = 1; k < t_indices.size(); ++k)
        if (t_indices[k] < t_indices[k - 1])
            throw std::invalid_argument("local_time_field: t_indices must be non-decreasing");
    check_time_index(path, t_indices.back(), "local_time_field");

    std::vector<double> running(grid.n_bins, 0.0);
    const double weight = path.dt() / grid.dx();
    std::size_t j = 0;
    for (const std::size_t ti : t_indices) {
        for (; j < ti; ++j) running[grid.bin_index(path.values[j])] += weight;
        field.times.push_back(path.time(ti));
        field.values.push_back(apply_smoothing(running, grid, smoothing));
    }
    return field;
}

AveragedField averaged_field(const SamplePath& path, const std::function<double(double)>& f,
                             std::size_t s_index, std::size_t t_index, const SpatialGrid& grid,
                             AveragingMethod method) {
    if (s_index > t_index) throw std::invalid_argument("averaged_field: s_index > t_index");
    check_time_index(path, t_index, "averaged_field");

    AveragedField out{grid, path.time(s_index), path.time(t_index),
                      std::vector<double>(grid.n_bins, 0.0)};
    if (method == AveragingMethod::quadrature) {
        const double dt = path.dt();
        for (std::size_t j = s_index; j < t_index; ++j) {
            const double w = path.values[j];
            for (std::size_t i = 0; i < grid.n_bins; ++i)
                out.values[i] += dt * checked_f(f, grid.center(i) - w, "averaged_field");
        }
    } else {
        // (f * L_{s,t})(x_i) with the histogram local time of the window [s,t).
        // The density is piecewise constant, so the exact convolution weights
        // are bin averages of f over each offset; this keeps integrable
        // singularities of f finite instead of point-sampling them.
        std::vector<double> occ(grid.n_bins, 0.0);
        const double dt = path.dt();
        for (std::size_t j = s_index; j < t_index; ++j)
            occ[grid.bin_index(path.values[j])] += dt;
        const double dx = grid.dx();
        const std::ptrdiff_t nb = static_cast<std::ptrdiff_t>(grid.n_bins);
        std::vector<double> avg(2 * grid.n_bins - 1);
        for (std::ptrdiff_t d = -(nb - 1); d <= nb - 1; ++d) {
            const double o = static_cast<double>(d) * dx;
            avg[static_cast<std::size_t>(d + nb - 1)] =
                adaptive_simpson([&f](double y) { return checked_f(f, y, "averaged_field"); },
                                 o - 0.5 * dx, o + 0.5 * dx, 1e-10) /
                dx;
        }
        for (std::ptrdiff_t i = 0; i < nb; ++i) {
            double acc = 0.0;
            for (std::ptrdiff_t b = 0; b < nb; ++b) {
                if (occ[static_cast<std::size_t>(b)] == 0.0) continue;
                acc += avg[static_cast<std::size_t>(i - b + nb - 1)] *
                       occ[static_cast<std::size_t>(b)];
            }
            out.values[static_cast<std::size_t>(i)] = acc;
        }
    }
    return out;
}

OccupationFormulaCheck occupation_formula_check(const SamplePath& path,
                                                const std::function<double(double)>& f,
                                                const SpatialGrid& grid, std::size_t t_index) {
    check_time_index(path, t_index, "occupation_formula_check");
    OccupationFormulaCheck chk;
    const double dt = path.dt();
    for (std::size_t j = 0; j < t_index; ++j)
        chk.direct += dt * checked_f(f, path.values[j], "occupation_formula_check");
    const auto lt = local_time(path, grid, t_index, Smoothing::histogram());
    for (std::size_t i = 0; i < grid.n_bins; ++i)
        chk.via_local_time += checked_f(f, grid.center(i), "occupation_formula_check") *
                              lt.values[i] * grid.dx();
    const double scale = std::max(std::abs(chk.direct), 1e-300);
    chk.rel_error = std::abs(chk.direct - chk.via_local_time) / scale;
    return chk;
}

RegularityExponents regularity_exponents(double H, double p) {
    if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("regularity_exponents: H outside (0,1)");
    if (!(p > 0.0)) throw std::invalid_argument("regularity_exponents: p must be positive");
    RegularityExponents r;
    r.hurst = H;
    r.p = p;
    r.lambda_max = 1.0 / (2.0 * H) - 1.0 / std::min(p, 2.0);
    return r;
}

AssumptionCheck assumption_check(double H, double p, double gamma0) {
    AssumptionCheck chk;
    chk.H_bound = 0.5 / (1.0 + 1.0 / std::min(p, 4.0 / 3.0));
    chk.gamma0_bound = 1.0 - 1.0 / (4.0 + 1.0 / std::min(p / 4.0, 1.0 / 3.0));
    chk.admissible = (H < chk.H_bound) && (gamma0 > 0.5) && (gamma0 < chk.gamma0_bound);
    return chk;
}

double w1p_norm(const LocalTimeSlice& slice, double p_prime) {
    if (!(p_prime >= 1.0)) throw std::invalid_argument("w1p_norm: p' must be >= 1");
    const double dx = slice.grid.dx();
    const auto& v = slice.values;
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        acc += std::pow(std::abs(v[i]), p_prime) * dx;
        // centered differences inside, one-sided at the edges
        double d;
        if (i == 0)
            d = (v[1] - v[0]) / dx;
        else if (i + 1 == v.size())
            d = (v[i] - v[i - 1]) / dx;
        else
            d = (v[i + 1] - v[i - 1]) / (2.0 * dx);
        acc += std::pow(std::abs(d), p_prime) * dx;
    }
    return std::pow(acc, 1.0 / p_prime);
}

namespace {

// per-scale constants sup over all windows of length Delta (sliding over the
// snapshot mesh, not just the dyadic tiling: the sup over 2^l disjoint windows
// saturates too slowly with l and its drift would mask small exponent margins)
// of sup_x |field_{t+Delta} - field_t| / Delta^gamma
std::vector<double> scale_constants(const std::vector<std::vector<double>>& snapshots,
                                    double horizon, int level_min, int level_max, double gamma,
                                    std::size_t gradient_stencil, double dx) {
    const std::size_t n_snap = snapshots.size() - 1; // 2^level_max intervals
    const std::size_t s = gradient_stencil;          // 0: sup norm, else difference span 2 s dx
    std::vector<double> constants;
    for (int level = level_min; level <= level_max; ++level) {
        const std::size_t blocks = std::size_t{1} << level;
        const std::size_t len = n_snap / blocks;
        const double delta = horizon / static_cast<double>(blocks);
        double worst = 0.0;
        for (std::size_t start = 0; start + len <= n_snap; ++start) {
            const auto& lo = snapshots[start];
            const auto& hi = snapshots[start + len];
            double sup = 0.0;
            if (s > 0) {
                for (std::size_t i = s; i + s < lo.size(); ++i) {
                    const double d = ((hi[i + s] - lo[i + s]) - (hi[i - s] - lo[i - s])) /
                                     (2.0 * static_cast<double>(s) * dx);
                    sup = std::max(sup, std::abs(d));
                }
            } else {
                for (std::size_t i = 0; i < lo.size(); ++i)
                    sup = std::max(sup, std::abs(hi[i] - lo[i]));
            }
            worst = std::max(worst, sup);
        }
        constants.push_back(worst / std::pow(delta, gamma));
    }
    return constants;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

bool ratios_within(const std::vector<double>& c, double lo, double hi) {
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
        if (c[i] <= 0.0) return false;
        const double r = c[i + 1] / c[i];
        if (!(r >= lo && r <= hi)) return false;
    }
    return true;
}

} // namespace

RegularityCheckReport averaged_field_regularity_check(std::span<const SamplePath> paths,
                                                      const std::function<double(double)>& f,
                                                      double p, double gamma0, double gamma1,
                                                      const RegularityCheckOptions& opts) {
    if (paths.empty())
        throw std::invalid_argument("averaged_field_regularity_check: empty path set");
    if (opts.level_min < 1 || opts.level_max < opts.level_min)
        throw std::invalid_argument("averaged_field_regularity_check: bad level range");
    const std::size_t n_snap = std::size_t{1} << opts.level_max;

    RegularityCheckReport rep;
    rep.p = p;
    rep.gamma0 = gamma0;
    rep.gamma1 = gamma1;
    for (int l = opts.level_min; l <= opts.level_max; ++l) rep.levels.push_back(l);

    std::vector<std::vector<double>> c0_all(rep.levels.size()), c1_all(rep.levels.size());
    for (const auto& path : paths) {
        if (path.n_steps % n_snap != 0)
            throw std::invalid_argument(
                "averaged_field_regularity_check: n_steps must be divisible by 2^level_max");
        const std::size_t stride = path.n_steps / n_snap;
        const auto grid = SpatialGrid::covering(path, opts.n_bins, opts.pad);
        const double dx = grid.dx();
        const double dt = path.dt();

        // cumulative T^{-w}_{0,t} f on the grid, snapshotted at every dyadic time;
        // f enters through its bin averages so the estimator is the projection of
        // the exact field onto piecewise constants (point values of a merely
        // integrable f would inject spurious fine-scale spikes)
        const auto [w_lo, w_hi] =
            std::minmax_element(path.values.begin(), path.values.end());
        const CumulativeProfile prof(
            [&](double y) { return checked_f(f, y, "averaged_field_regularity_check"); },
            grid.x_min - *w_hi - dx, grid.x_max - *w_lo + dx, dx);
        std::vector<std::vector<double>> snapshots;
        snapshots.reserve(n_snap + 1);
        std::vector<double> acc(grid.n_bins, 0.0);
        snapshots.push_back(acc);
        for (std::size_t j = 0; j < path.n_steps; ++j) {
            const double w = path.values[j];
            for (std::size_t i = 0; i < grid.n_bins; ++i)
                acc[i] += dt * prof.bin_average(grid.center(i) - w, dx);
            if ((j + 1) % stride == 0) snapshots.push_back(acc);
        }

        const auto c0 = scale_constants(snapshots, path.horizon, opts.level_min, opts.level_max,
                                        gamma0, 0, dx);
        // smooth once (convolution commutes with the time increments), then take gradients
        const double bw = opts.kernel_bandwidth_factor * dx;
        const auto taps = kernel_taps(bw, dx);
        for (auto& s : snapshots) s = smooth(s, taps);
        const auto c1 = scale_constants(snapshots, path.horizon, opts.level_min, opts.level_max,
                                        gamma1, std::max<std::size_t>(1, opts.gradient_stencil),
                                        dx);
        for (std::size_t l = 0; l < rep.levels.size(); ++l) {
            c0_all[l].push_back(c0[l]);
            c1_all[l].push_back(c1[l]);
        }
    }

    std::vector<double> xs;
    for (std::size_t l = 0; l < rep.levels.size(); ++l) {
        rep.c0_constants.push_back(median(c0_all[l]));
        rep.c1_constants.push_back(median(c1_all[l]));
        xs.push_back(static_cast<double>(rep.levels[l]));
    }
    auto log2_of = [](const std::vector<double>& v) {
        std::vector<double> out;
        for (double x : v) out.push_back(std::log2(std::max(x, 1e-300)));
        return out;
    };
    rep.c0_slope = ls_slope(xs, log2_of(rep.c0_constants));
    rep.c1_slope = ls_slope(xs, log2_of(rep.c1_constants));
    rep.c0_ratios_stable = ratios_within(rep.c0_constants, 0.5, 2.0);
    rep.c1_ratios_stable = ratios_within(rep.c1_constants, 0.5, 2.0);

    // precondition: f integrates to a finite L^p norm on the window the paths explore
    double radius = 1.0;
    for (const auto& path : paths)
        for (double v : path.values) radius = std::max(radius, std::abs(v) + opts.pad);
    auto integrand = [&](double x) { return std::pow(std::abs(f(x)), p); };
    rep.f_lp_norm = std::pow(adaptive_simpson(integrand, -radius, 0.0, 1e-9) +
                                 adaptive_simpson(integrand, 0.0, radius, 1e-9),
                             1.0 / p);
    return rep;
}

} // namespace rbnlab
