#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "rbnlab/diffusion.hpp"

using namespace rbnlab;

namespace {
constexpr double kPi = 3.141592653589793238463;

// plain composite Simpson, independent of the library quadrature
double simpson(const std::function<double(double)>& f, double a, double b, std::size_t n) {
    if (n % 2) ++n;
    const double h = (b - a) / static_cast<double>(n);
    double acc = f(a) + f(b);
    for (std::size_t i = 1; i < n; ++i) acc += f(a + h * i) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}
} // namespace

TEST_CASE("mode weights are square-normalized and ordered") {
    for (std::size_t K : {1u, 4u, 32u}) {
        const auto w = DiffusionCoefficient::default_weights(K);
        REQUIRE(w.size() == K);
        double ss = 0.0;
        for (double a : w) ss += a * a;
        CHECK(ss == doctest::Approx(1.0).epsilon(1e-14));
        for (std::size_t k = 0; k + 1 < K; ++k) CHECK(w[k] > w[k + 1]); // (1+k^2)^{-1} decay
    }
}

TEST_CASE("constant coefficient has flat aggregate and infinite L^p norm") {
    const auto sig = DiffusionCoefficient::constant(4, 0.7);
    CHECK(sig.sigma_sq(0.0) == doctest::Approx(0.49).epsilon(1e-15));
    CHECK(sig.sigma_sq(13.5) == doctest::Approx(0.49).epsilon(1e-15));
    CHECK(std::isinf(sig.lp_norm_sigma_sq));
    double ss = 0.0;
    for (std::size_t k = 0; k < 4; ++k) ss += sig.sigma_k(k, 2.0) * sig.sigma_k(k, 2.0);
    CHECK(ss == doctest::Approx(0.49).epsilon(1e-14)); // mode split carries the full aggregate
}

TEST_CASE("singular coefficient matches its closed form") {
    const double gamma = 0.4, cap = 1e3;
    const auto sig = DiffusionCoefficient::singular(8, gamma, cap, 2.0);
    CHECK(sig.sigma_sq(0.0) == doctest::Approx(cap).epsilon(1e-14));
    const double x = 2.0;
    CHECK(sig.sigma_sq(x) ==
          doctest::Approx(std::pow(x, -gamma) * std::exp(-x * x)).epsilon(1e-12));
    // cap corner: |x| = cap^{-1/gamma}
    const double corner = std::pow(cap, -1.0 / gamma);
    CHECK(sig.sigma_sq(corner * 0.5) == doctest::Approx(cap).epsilon(1e-10));
    CHECK(sig.sigma_sq(corner * 2.0) < cap);
}

TEST_CASE("L^p norm of the smooth profile against the Gaussian closed form") {
    // Sigma^2 = c^2 e^{-x^2}: ||Sigma^2||_p = c^2 (pi/p)^{1/(2p)}
    for (double p : {1.0, 2.0, 4.0}) {
        const auto sig = DiffusionCoefficient::smooth_bounded(4, 0.5, p);
        const double expect = 0.25 * std::pow(kPi / p, 0.5 / p);
        CHECK(sig.lp_norm_sigma_sq == doctest::Approx(expect).epsilon(1e-6));
    }
}

TEST_CASE("L^p norm of the singular profile against independent quadrature") {
    const double gamma = 0.4, cap = 1e3, p = 2.0;
    const auto sig = DiffusionCoefficient::singular(8, gamma, cap, p);
    auto integrand = [&](double x) {
        return std::pow(std::min(std::pow(std::abs(x), -gamma), cap) * std::exp(-x * x), p);
    };
    const double corner = std::pow(cap, -1.0 / gamma); // 1e-7.5: resolve the cap plateau
    double ip = simpson(integrand, corner, 1e-4, 400000) + simpson(integrand, 1e-4, 8.0, 400000) +
                cap * cap * corner; // plateau contributes cap^p * 2*corner / 2 per side
    const double expect = std::pow(2.0 * ip, 1.0 / p); // even integrand
    CHECK(sig.lp_norm_sigma_sq == doctest::Approx(expect).epsilon(1e-3));
}

TEST_CASE("mollifier bump is a normalized even C^inf kernel on [-1,1]") {
    CHECK(mollifier_bump(1.0) == 0.0);
    CHECK(mollifier_bump(-1.001) == 0.0);
    CHECK(mollifier_bump(0.3) == doctest::Approx(mollifier_bump(-0.3)).epsilon(1e-15));
    CHECK(mollifier_bump(0.0) > mollifier_bump(0.5));
    const double mass = simpson([](double x) { return mollifier_bump(x); }, -1.0, 1.0, 20000);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("mollification preserves constants inside the cutoff plateau") {
    const auto sig = DiffusionCoefficient::constant(4, 0.7);
    const auto mol = mollify(sig, 0.25);
    CHECK(mol.dx <= 0.25 / 8.0 + 1e-15);
    for (double x : {0.0, 1.0, -3.0, 1.0 / 0.25 - 0.3})
        CHECK(mol.profile_eps(x) == doctest::Approx(0.7).epsilon(1e-7));
    CHECK(mol.profile_eps(1.0 / 0.25 + 1.0) == 0.0); // outside the cutoff support
    CHECK(mol.profile_eps(100.0) == 0.0);
    CHECK(mol.c_eps == doctest::Approx(0.7).epsilon(1e-6));
}

TEST_CASE("mollifying a smooth profile is an O(eps^2) perturbation") {
    const auto sig = DiffusionCoefficient::smooth_bounded(4, 0.5, 2.0);
    const auto mol = mollify(sig, 0.05);
    for (double x : {0.0, 0.5, -1.2, 2.0})
        CHECK(std::abs(mol.profile_eps(x) - sig.profile(x)) < 1e-3);
}

TEST_CASE("mollified invariants: sup bound, Lipschitz bound, L^p budget") {
    for (const auto& sig : {DiffusionCoefficient::singular(8, 0.4, 1e3, 2.0),
                            DiffusionCoefficient::smooth_bounded(8, 0.5, 2.0)}) {
        for (double eps : {0.2, 0.05}) {
            const auto mol = mollify(sig, eps);
            // sup Sigma_eps^2 = c_eps^2 by construction; spot check the table bound
            for (double x : {-2.0, -0.017, 0.0, 0.4, 3.3})
                CHECK(mol.sigma_sq(x) <= mol.c_eps * mol.c_eps * (1.0 + 1e-12));
            // HS-Lipschitz constant bounds observed difference quotients
            const double h = mol.dx;
            for (double x : {-1.0, 0.0, 0.21, 2.0}) {
                const double q = std::abs(mol.profile_eps(x + h) - mol.profile_eps(x)) / h;
                CHECK(q <= mol.C_eps * (1.0 + 1e-9));
            }
            // mollification inflates the L^p norm by at most 5%
            CHECK(mol.lp_norm_sigma_sq <= 1.05 * sig.lp_norm_sigma_sq);
            CHECK(mol.lp_norm_sigma_sq > 0.0);
        }
    }
}

TEST_CASE("smaller eps keeps more of the singular mass") {
    const auto sig = DiffusionCoefficient::singular(8, 0.4, 1e3, 2.0);
    const auto a = mollify(sig, 0.2);
    const auto b = mollify(sig, 0.05);
    CHECK(b.c_eps > a.c_eps);        // sharper peak survives
    CHECK(b.C_eps > a.C_eps);        // at the price of a larger Lipschitz constant
}

TEST_CASE("L^p distance between mollification rungs shrinks down the ladder") {
    const auto sig = DiffusionCoefficient::smooth_bounded(8, 0.5, 2.0);
    const auto m1 = mollify(sig, 0.2);
    const auto m2 = mollify(sig, 0.1);
    const auto m3 = mollify(sig, 0.05);
    CHECK(lp_distance_sigma_sq(m1, m1, 2.0) == doctest::Approx(0.0).epsilon(1e-12));
    const double d12 = lp_distance_sigma_sq(m1, m2, 2.0);
    const double d23 = lp_distance_sigma_sq(m2, m3, 2.0);
    CHECK(d12 > 0.0);
    CHECK(d23 < d12);
    CHECK(d23 < 0.7 * d12); // >= 30% decrease for the smooth profile
}

TEST_CASE("factories validate their arguments") {
    CHECK_THROWS(DiffusionCoefficient::singular(0, 0.4));
    CHECK_THROWS(DiffusionCoefficient::singular(4, -0.1));
    CHECK_THROWS(DiffusionCoefficient::singular(4, 1.2)); // Sigma^2 must stay integrable
    CHECK_THROWS(DiffusionCoefficient::singular(4, 0.4, -1.0));
    CHECK_THROWS(mollify(DiffusionCoefficient::constant(2, 1.0), 0.0));
    CHECK_THROWS(mollify(DiffusionCoefficient::constant(2, 1.0), -0.5));
}
