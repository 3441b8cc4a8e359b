#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "rbnlab/sample_path.hpp"
#include "rbnlab/sewing.hpp"

using namespace rbnlab;

TEST_CASE("delta vanishes iff the germ is additive") {
    Germ additive = [](double s, double t) { return std::sin(t) - std::sin(s); };
    Germ riemann = [](double s, double t) { return s * (t - s); };
    CHECK(delta(additive, 0.1, 0.4, 0.9) == doctest::Approx(0.0).epsilon(1e-15));
    // delta of s(t-s) over (s,u,t) is (u-s)(t-u)
    CHECK(delta(riemann, 0.1, 0.4, 0.9) == doctest::Approx(-(0.4 - 0.1) * (0.9 - 0.4)));
}

TEST_CASE("additive germs are sewed exactly") {
    Germ g = [](double s, double t) { return t * t - s * s; };
    const auto sv = sew_value(g, 0.0, 1.0, {16, 1e-14, 3});
    CHECK(std::abs(sv.value - 1.0) <= 1e-12);
    CHECK(std::abs(sv.raw - 1.0) <= 1e-12);
}

TEST_CASE("left-endpoint germs sew to the Riemann integral") {
    Germ g = [](double s, double t) { return s * (t - s); };
    const auto sv = sew_value(g, 0.0, 1.0, {16, 1e-12, 3});
    CHECK(std::abs(sv.value - 0.5) <= 1e-8);

    Germ h = [](double s, double t) { return std::exp(s) * (t - s); };
    const auto sh = sew_value(h, 0.0, 1.0, {16, 1e-12, 3});
    CHECK(std::abs(sh.value - (std::exp(1.0) - 1.0)) <= 1e-8);

    Germ c = [](double s, double t) { return std::cos(s) * (t - s); };
    const auto sc = sew_value(c, 0.0, 1.0, {16, 1e-12, 3});
    CHECK(std::abs(sc.value - std::sin(1.0)) <= 1e-8);
}

TEST_CASE("gap decay rate of a first-order germ is about one level per refinement") {
    Germ g = [](double s, double t) { return s * (t - s); };
    const auto sv = sew_value(g, 0.0, 1.0, {14, 1e-15, 3});
    CHECK(sv.decay_rate == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("cumulative sewing is additive and matches endpoint sewing") {
    Germ g = [](double s, double t) { return std::cos(s) * (t - s); };
    const auto res = sew(g, 0.0, 1.0, {14, 1e-12, 3});
    REQUIRE(res.values.size() == res.times.size());
    CHECK(res.values.front() == 0.0);
    // grid values converge at the raw dyadic rate ~ C 2^{-L}
    CHECK(std::abs(res.values.back() - std::sin(1.0)) <= 1e-4);
    // additivity of increments is exact by construction
    const auto q = res.times.size() / 4;
    CHECK(res.increment(0, 2 * q) ==
          doctest::Approx(res.increment(0, q) + res.increment(q, 2 * q)).epsilon(1e-15));
    // interior values follow the primitive
    CHECK(std::abs(res.values[q] - std::sin(res.times[q])) <= 1e-4);
}

TEST_CASE("defect certificate bounds |IA - A| by the delta norm") {
    Germ g = [](double s, double t) { return s * (t - s); };
    const auto res = sew(g, 0.0, 1.0, {12, 1e-12, 3});
    // |delta A| = (u-s)(t-u) <= ((t-s)/2)^2: beta = 2 with norm 1/4
    const auto cert = defect_bound_check(res, g, 2.0, 0.25, 5);
    CHECK(cert.max_defect > 0.0);
    CHECK(cert.fitted_c <= 2.0); // sewing-lemma constant well under the 2/(2^{beta-1}-1) bound
    const auto norms = germ_norms(g, 0.0, 1.0, 1.0, 2.0, 6);
    CHECK(norms.norm_alpha == doctest::Approx(1.0).epsilon(0.05));
    CHECK(norms.norm_beta == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("Volterra sewing reproduces singular-kernel integrals") {
    // sum (t-u)^{-eta} (v-u) over refining partitions -> int_0^1 (1-r)^{-eta} dr
    Germ unit = [](double s, double t) { return t - s; };
    SewOptions opts;
    opts.max_level = 18;
    const auto a = volterra_sew(unit, 0.5, 0.0, 1.0, opts);
    CHECK(std::abs(a.value - 2.0) <= 1e-4);
    const auto b = volterra_sew(unit, 0.25, 0.0, 1.0, opts);
    CHECK(std::abs(b.value - 4.0 / 3.0) <= 1e-4);
    // weighted polynomial: int_0^1 (1-r)^{-1/2} r dr = B(2, 1/2) = 4/3
    Germ lin = [](double s, double t) { return s * (t - s); };
    const auto c = volterra_sew(lin, 0.5, 0.0, 1.0, opts);
    CHECK(std::abs(c.value - 4.0 / 3.0) <= 1e-4);
}

TEST_CASE("Volterra values are Holder in the upper limit") {
    Germ unit = [](double s, double t) { return t - s; };
    std::vector<double> ts{0.25, 0.5, 0.75, 1.0};
    // V_t = int_0^t (t-r)^{-1/2} dr = 2 sqrt(t): Holder-1/2 with constant 2
    const auto cert = volterra_holder(unit, 0.5, ts, 0.5, {14, 1e-10, 3});
    REQUIRE(cert.v_values.size() == ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i)
        CHECK(cert.v_values[i] == doctest::Approx(2.0 * std::sqrt(ts[i])).epsilon(2e-3));
    CHECK(cert.holder_constant <= 2.1);
    CHECK(cert.holder_exponent == 0.5);
}

TEST_CASE("sewing distances decrease along a convergent germ family") {
    Germ limit = [](double s, double t) { return std::cos(s) * (t - s); };
    std::vector<Germ> family;
    for (double e : {0.4, 0.2, 0.1, 0.05})
        family.push_back([e](double s, double t) { return std::cos(s + e) * (t - s); });
    const auto rep =
        sewing_stability_check(family, limit, 1.0, 2.0, 0.0, 1.0, 6, {12, 1e-12, 3});
    REQUIRE(rep.distances.size() == family.size());
    CHECK(rep.monotone);
    CHECK(rep.distances.back() < rep.distances.front());
    CHECK(rep.max_delta_norm < 10.0);
}

TEST_CASE("Young germ against a smooth fBm path matches the Stieltjes oracle") {
    const auto w = generate_fbm(1 << 12, 1.0, 0.8, 777, {false, 0});
    Germ g = [&w](double s, double t) {
        const auto i = static_cast<std::size_t>(std::llround(s / w.dt()));
        const auto j = static_cast<std::size_t>(std::llround(t / w.dt()));
        return w.values[i] * (w.values[j] - w.values[i]);
    };
    double trapezoid = 0.0;
    for (std::size_t j = 0; j < w.n_steps; ++j)
        trapezoid += 0.5 * (w.values[j] + w.values[j + 1]) * (w.values[j + 1] - w.values[j]);
    const auto sv = sew_value(g, 0.0, 1.0, {12, 1e-12, 3});
    CHECK(std::abs(sv.value - trapezoid) <= 1e-2 * std::abs(trapezoid));
}
