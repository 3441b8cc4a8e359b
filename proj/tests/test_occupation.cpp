#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "rbnlab/occupation.hpp"
#include "rbnlab/sample_path.hpp"

using namespace rbnlab;

namespace {

SamplePath manual_path(std::vector<double> values, double T) {
    SamplePath p;
    p.horizon = T;
    p.n_steps = values.size() - 1;
    p.hurst = 0.5;
    p.seed = 0;
    p.values = std::move(values);
    return p;
}

SamplePath linear_path(std::size_t n, double T) {
    std::vector<double> v(n + 1);
    for (std::size_t j = 0; j <= n; ++j) v[j] = T * static_cast<double>(j) / n;
    return manual_path(std::move(v), T);
}

} // namespace

TEST_CASE("grid bins are half-open and covering pads the range") {
    SpatialGrid g{-1.0, 1.0, 4};
    CHECK(g.dx() == doctest::Approx(0.5));
    CHECK(g.bin_index(-1.0) == 0);
    CHECK(g.bin_index(-0.50001) == 0);
    CHECK(g.bin_index(0.0) == 2);
    CHECK(g.bin_index(0.9999) == 3);
    CHECK_THROWS(g.bin_index(1.0));
    CHECK_THROWS(g.bin_index(-1.0001));

    const auto p = manual_path({0.0, 0.5, -0.25, 1.0}, 1.0);
    const auto cov = SpatialGrid::covering(p, 8, 0.5);
    CHECK(cov.x_min == doctest::Approx(-0.75));
    CHECK(cov.x_max == doctest::Approx(1.5));
}

TEST_CASE("occupation measure of a frozen path is a point mass") {
    const auto p = manual_path(std::vector<double>(65, 0.0), 1.0);
    SpatialGrid g{-1.0, 1.0, 16};
    const auto mu = occupation_measure(p, g, 64);
    CHECK(std::accumulate(mu.begin(), mu.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mu[g.bin_index(0.0)] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("local time of a linear path is uniform") {
    // w_r = r on [0,1]: L_1 = 1 on (0,1)
    const auto p = linear_path(1 << 12, 1.0);
    SpatialGrid g{-0.5, 1.5, 100};
    const auto lt = local_time(p, g, p.n_steps);
    for (std::size_t i = 0; i < g.n_bins; ++i) {
        const double x = g.center(i);
        if (x > 0.05 && x < 0.95) CHECK(lt.values[i] == doctest::Approx(1.0).epsilon(0.02));
        if (x < -0.05 || x > 1.05) CHECK(lt.values[i] == 0.0);
    }
    double mass = 0.0;
    for (double v : lt.values) mass += v * g.dx();
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kernel smoothing preserves local-time mass") {
    const auto p = generate_fbm(1 << 12, 1.0, 0.3, 11, {false, 0});
    const auto g = SpatialGrid::covering(p, 256, 0.5);
    const auto smooth = local_time(p, g, p.n_steps, Smoothing::kernel(2.0 * g.dx()));
    double mass = 0.0;
    for (double v : smooth.values) mass += v * g.dx();
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("local-time field is monotone in time and validates indices") {
    const auto p = generate_fbm(1 << 10, 1.0, 0.4, 3, {false, 0});
    const auto g = SpatialGrid::covering(p, 128, 0.5);
    const std::vector<std::size_t> idx{256, 512, 768, 1024};
    const auto field = local_time_field(p, g, idx, Smoothing::histogram());
    REQUIRE(field.values.size() == 4);
    for (std::size_t j = 0; j + 1 < 4; ++j)
        for (std::size_t i = 0; i < g.n_bins; ++i)
            CHECK(field.values[j + 1][i] >= field.values[j][i]);
    const std::vector<std::size_t> bad{512, 256};
    CHECK_THROWS(local_time_field(p, g, bad, Smoothing::histogram()));
    CHECK_THROWS(local_time(p, g, p.n_steps + 1));
}

TEST_CASE("occupation-times formula for a linear path has an exact oracle") {
    const auto p = linear_path(1 << 14, 1.0);
    SpatialGrid g{-0.5, 1.5, 512};
    const auto chk =
        occupation_formula_check(p, [](double x) { return std::cos(x); }, g, p.n_steps);
    // int_0^1 cos(r) dr = sin(1); the left Riemann direct route carries O(dt)
    CHECK(chk.direct == doctest::Approx(std::sin(1.0)).epsilon(1e-4));
    CHECK(chk.rel_error < 1e-3);
}

TEST_CASE("occupation-times formula on fBm paths") {
    for (double H : {0.2, 0.5}) {
        const auto p = generate_fbm(1 << 14, 1.0, H, 321, {false, 0});
        const auto g = SpatialGrid::covering(p, 512, 0.5);
        for (const auto& f : std::vector<std::function<double(double)>>{
                 [](double) { return 1.0; },
                 [](double x) { return std::cos(x); },
                 [](double x) { return std::exp(-x * x); }}) {
            const auto chk = occupation_formula_check(p, f, g, p.n_steps);
            CHECK(chk.rel_error < 1e-3);
        }
    }
}

TEST_CASE("averaged field of a frozen path is the test function") {
    const auto p = manual_path(std::vector<double>(129, 0.0), 1.0);
    SpatialGrid g{-2.0, 2.0, 128};
    auto f = [](double x) { return std::exp(-x * x); };
    const auto quad = averaged_field(p, f, 0, 128, g, AveragingMethod::quadrature);
    const auto conv = averaged_field(p, f, 0, 128, g, AveragingMethod::convolution);
    for (std::size_t i = 0; i < g.n_bins; ++i) {
        // T^{-w} f (x) = t f(x - 0); conv sees w binned at the cell center
        CHECK(quad.values[i] == doctest::Approx(f(g.center(i))).epsilon(1e-12));
        CHECK(conv.values[i] == doctest::Approx(f(g.center(i))).epsilon(0.01));
    }
}

TEST_CASE("quadrature and convolution averaged fields agree on fBm paths") {
    const auto p = generate_fbm(1 << 13, 1.0, 0.25, 17, {false, 0});
    const auto g = SpatialGrid::covering(p, 512, 1.0);
    auto f = [](double x) { return std::cos(2.0 * x); };
    const auto quad = averaged_field(p, f, 0, p.n_steps, g, AveragingMethod::quadrature);
    const auto conv = averaged_field(p, f, 0, p.n_steps, g, AveragingMethod::convolution);
    double sup = 0.0;
    for (std::size_t i = 0; i < g.n_bins; ++i)
        sup = std::max(sup, std::abs(quad.values[i] - conv.values[i]));
    CHECK(sup <= 5.0 * std::sqrt(g.dx()));
    // windows add up: [0, n/2) + [n/2, n) = [0, n)
    const auto a = averaged_field(p, f, 0, p.n_steps / 2, g, AveragingMethod::quadrature);
    const auto b =
        averaged_field(p, f, p.n_steps / 2, p.n_steps, g, AveragingMethod::quadrature);
    for (std::size_t i = 0; i < g.n_bins; i += 37)
        CHECK(a.values[i] + b.values[i] == doctest::Approx(quad.values[i]).epsilon(1e-12));
}

TEST_CASE("exponent arithmetic and admissibility bounds are exact") {
    const auto e1 = regularity_exponents(0.25, 2.0);
    CHECK(e1.lambda_max == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(e1.gamma_max(0.0) == doctest::Approx(0.875).epsilon(1e-15));
    CHECK(e1.gamma_max(1.0) == doctest::Approx(0.625).epsilon(1e-15));
    const auto e2 = regularity_exponents(0.1, 1.0);
    CHECK(e2.lambda_max == doctest::Approx(4.0).epsilon(1e-15));
    CHECK_THROWS(regularity_exponents(0.0, 2.0));
    CHECK_THROWS(regularity_exponents(0.5, 0.0));

    const auto a1 = assumption_check(0.2, 1.0, 0.8);
    CHECK(a1.H_bound == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(a1.gamma0_bound == doctest::Approx(0.875).epsilon(1e-15));
    CHECK(a1.admissible);
    const auto a2 = assumption_check(0.2, 4.0, 0.8);
    CHECK(a2.H_bound == doctest::Approx(2.0 / 7.0).epsilon(1e-15));
    CHECK(a2.gamma0_bound == doctest::Approx(6.0 / 7.0).epsilon(1e-15));
    CHECK(a2.admissible);
    CHECK_FALSE(assumption_check(0.25, 1.0, 0.8).admissible);  // H at the bound: excluded
    CHECK_FALSE(assumption_check(0.2, 1.0, 0.875).admissible); // gamma0 at the bound
    CHECK_FALSE(assumption_check(0.2, 1.0, 0.5).admissible);   // gamma0 <= 1/2
}

TEST_CASE("W^{1,p'} norm against a polynomial slice") {
    SpatialGrid g{-1.0, 1.0, 2000};
    LocalTimeSlice slice{g, 1.0, {}};
    slice.values.resize(g.n_bins);
    for (std::size_t i = 0; i < g.n_bins; ++i) slice.values[i] = g.center(i) * g.center(i);
    // ||x^2||_2^2 = int_{-1}^{1} x^4 = 2/5, ||2x||_2^2 = 8/3 (centered diffs exact on x^2)
    const double expect = std::pow(2.0 / 5.0 + 8.0 / 3.0, 0.5);
    CHECK(w1p_norm(slice, 2.0) == doctest::Approx(expect).epsilon(1e-2));
}

TEST_CASE("averaged-field multiscale constants are stable inside the region") {
    // H = 0.2, p = 2: gamma_max(0) = 0.9, gamma_max(1) = 0.7; stay inside by 0.04
    std::vector<SamplePath> paths;
    for (std::size_t i = 0; i < 6; ++i)
        paths.push_back(generate_fbm(1 << 12, 1.0, 0.2, 555, {false, i}));
    auto f = [](double x) { return std::min(std::pow(std::abs(x), -0.49), 1e6); };
    RegularityCheckOptions opts;
    opts.n_bins = 256;
    opts.level_max = 9;
    const auto rep = averaged_field_regularity_check(paths, f, 2.0, 0.86, 0.66, opts);
    CHECK(rep.f_lp_norm > 0.0);
    REQUIRE(rep.c0_constants.size() == rep.levels.size());
    CHECK(rep.c0_ratios_stable);
    CHECK(rep.c1_ratios_stable);
    CHECK(std::abs(rep.c0_slope) < 0.25);
}

TEST_CASE("exponents beyond the region make the constants grow across scales") {
    std::vector<SamplePath> paths;
    for (std::size_t i = 0; i < 6; ++i)
        paths.push_back(generate_fbm(1 << 12, 1.0, 0.2, 555, {false, i}));
    auto f = [](double x) { return std::min(std::pow(std::abs(x), -0.49), 1e6); };
    RegularityCheckOptions opts;
    opts.n_bins = 256;
    opts.level_max = 9;
    const auto rep = averaged_field_regularity_check(paths, f, 2.0, 0.98, 0.66, opts);
    CHECK(rep.c0_slope > 0.025);
}
