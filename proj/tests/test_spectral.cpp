#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <vector>

#include "rbnlab/fft.hpp"
#include "rbnlab/spectral.hpp"

using namespace rbnlab;

namespace {
constexpr double kPi = 3.141592653589793238463;

std::vector<double> sample_grid(std::size_t M, const std::function<double(double)>& g) {
    std::vector<double> v(M);
    for (std::size_t i = 0; i < M; ++i) v[i] = g(2.0 * kPi * static_cast<double>(i) / M);
    return v;
}
} // namespace

TEST_CASE("fft inverts itself and preserves energy") {
    for (std::size_t n : {8u, 12u, 27u, 64u}) { // radix-2 and Bluestein sizes
        std::vector<cdouble> v(n);
        for (std::size_t i = 0; i < n; ++i)
            v[i] = {std::cos(1.7 * i) + 0.3, std::sin(0.9 * i)};
        auto hat = fft_copy(v, false);
        double e_time = 0.0, e_freq = 0.0;
        for (const auto& z : v) e_time += std::norm(z);
        for (const auto& z : hat) e_freq += std::norm(z);
        CHECK(e_freq == doctest::Approx(n * e_time).epsilon(1e-12)); // Parseval
        auto back = fft_copy(hat, true); // unnormalized: returns n * v
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(back[i].real() / n == doctest::Approx(v[i].real()).epsilon(1e-12));
            CHECK(back[i].imag() / n == doctest::Approx(v[i].imag()).epsilon(1e-12));
        }
    }
}

TEST_CASE("grid/field round trip is exact below the cutoff") {
    const int K = 16;
    SpectralField u(K);
    u.coeff(0) = {0.7, 0.0};
    u.coeff(1) = {0.25, -0.4};
    u.coeff(5) = {-0.1, 0.02};
    u.fix_zero_mode();
    const auto grid = field_to_grid(u, 128);
    const auto v = grid_to_field(grid, K);
    for (int k = 0; k <= K; ++k) {
        CHECK(v.coeff(k).real() == doctest::Approx(u.coeff(k).real()).epsilon(1e-12));
        CHECK(v.coeff(k).imag() == doctest::Approx(u.coeff(k).imag()).epsilon(1e-12));
    }
}

TEST_CASE("cosine field has L2 norm sqrt(pi)") {
    // u = cos x -> ||u||^2 = pi on the 2pi torus
    const auto vals = sample_grid(256, [](double x) { return std::cos(x); });
    const auto u = grid_to_field(vals, 32);
    CHECK(l2_norm(u) == doctest::Approx(std::sqrt(kPi)).epsilon(1e-12));
    // Sobolev norm scales the k = 1 pair by (1 + k^2)^{s/2}
    const double s = 0.8;
    CHECK(sobolev_norm(u, s) ==
          doctest::Approx(std::sqrt(kPi) * std::pow(2.0, s / 2.0)).epsilon(1e-12));
}

TEST_CASE("heat semigroup damps mode k by exp(-k^2 t)") {
    const int K = 8;
    SpectralField u(K);
    u.coeff(2) = {1.0, -0.5};
    const auto v = heat_apply(u, 0.3);
    const double d = std::exp(-4.0 * 0.3);
    CHECK(v.coeff(2).real() == doctest::Approx(d * 1.0).epsilon(1e-14));
    CHECK(v.coeff(2).imag() == doctest::Approx(d * -0.5).epsilon(1e-14));
    CHECK(std::abs(v.coeff(3)) == 0.0);
}

TEST_CASE("semigroup maps real fields to real fields") {
    const auto vals = sample_grid(64, [](double x) { return std::exp(std::sin(x)); });
    auto u = grid_to_field(vals, 16);
    const auto v = heat_apply(u, 0.05);
    const auto back = field_to_grid(v, 64);
    for (double x : back) CHECK(std::isfinite(x));
    CHECK(v.coeff(0).imag() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("heat_diff_factor reproduces k^rho |e^{-k^2 t} - e^{-k^2 s}|") {
    const double s = 0.2, t = 0.35;
    for (int k : {0, 1, 3, 7}) {
        const double diff = std::abs(std::exp(-k * k * t) - std::exp(-k * k * s));
        CHECK(heat_diff_factor(k, 0.0, s, t) == doctest::Approx(diff).epsilon(1e-13));
        const double graded = std::pow(k, 1.5) * diff;
        CHECK(heat_diff_factor(k, 1.5, s, t) == doctest::Approx(graded).epsilon(1e-13));
    }
}

TEST_CASE("smoothing-estimate constant is stable under cutoff doubling") {
    std::vector<std::pair<double, double>> st;
    for (double s : {0.01, 0.05, 0.2})
        for (double gap : {0.01, 0.1}) st.emplace_back(s, s + gap);
    for (auto [rho, theta] : std::vector<std::pair<double, double>>{{0.0, 0.5}, {1.0, 0.25}}) {
        const auto rep = schauder_check(rho, theta, 256, st);
        CHECK(rep.constant > 0.0);
        CHECK(rep.k_stable);
        CHECK(rep.ratio == doctest::Approx(1.0).epsilon(0.1));
    }
}

TEST_CASE("coefficient files round trip bit for bit") {
    SpectralField u(5);
    u.coeff(0) = {1.125, 0.0};
    u.coeff(3) = {-0.7, 0.031};
    const char* path = "test-coeffs.bin";
    write_coefficients(path, u);
    const auto v = read_coefficients(path);
    REQUIRE(v.cutoff() == 5);
    for (int k = 0; k <= 5; ++k) CHECK(v.coeff(k) == u.coeff(k));
    std::remove(path);
}
