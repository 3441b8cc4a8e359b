#include "rbnlab/spectral.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "rbnlab/fft.hpp"

namespace rbnlab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
const double kSqrt2Pi = std::sqrt(kTwoPi);

static_assert(std::endian::native == std::endian::little,
              "coefficient dumps assume a little-endian host");
} // namespace

bool SpectralField::finite() const {
    for (const auto& c : coeff_)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
}

SpectralField heat_apply(const SpectralField& u, double t) {
    if (t < 0.0) throw std::invalid_argument("heat_apply: t < 0");
    SpectralField out = u;
    for (int k = 0; k <= out.cutoff(); ++k)
        out.coeff(k) *= std::exp(-static_cast<double>(k) * k * t);
    return out;
}

double sobolev_norm(const SpectralField& u, double alpha) {
    double sum = std::norm(u.coeff(0));
    for (int k = 1; k <= u.cutoff(); ++k) {
        double w = std::pow(1.0 + static_cast<double>(k) * k, alpha);
        sum += 2.0 * w * std::norm(u.coeff(k)); // k and -k
    }
    return std::sqrt(sum);
}

double l2_norm(const SpectralField& u) { return sobolev_norm(u, 0.0); }

std::vector<double> field_to_grid(const SpectralField& u, std::size_t M) {
    const int K = u.cutoff();
    if (M < 2 * static_cast<std::size_t>(K) + 1)
        throw std::invalid_argument("field_to_grid: M < 2K+1 (aliasing risk)");
    std::vector<cdouble> c(M, {0.0, 0.0});
    c[0] = {u.coeff(0).real(), 0.0};
    for (int k = 1; k <= K; ++k) {
        c[static_cast<std::size_t>(k)] = u.coeff(k);
        c[M - static_cast<std::size_t>(k)] = std::conj(u.coeff(k));
    }
    fft(c, true); // sum_k c_k e^{+2pi i km/M} = u(x_m) * sqrt(2pi)
    std::vector<double> out(M);
    for (std::size_t m = 0; m < M; ++m) out[m] = c[m].real() / kSqrt2Pi;
    return out;
}

SpectralField grid_to_field(std::span<const double> values, int K) {
    const std::size_t M = values.size();
    if (M < 2 * static_cast<std::size_t>(K) + 1)
        throw std::invalid_argument("grid_to_field: M < 2K+1 (aliasing risk)");
    std::vector<cdouble> c(M);
    for (std::size_t m = 0; m < M; ++m) c[m] = values[m];
    fft(c, false);
    SpectralField out(K);
    const double scale = kSqrt2Pi / static_cast<double>(M);
    for (int k = 0; k <= K; ++k) out.coeff(k) = scale * c[static_cast<std::size_t>(k)];
    out.fix_zero_mode();
    return out;
}

double heat_diff_factor(int k, double rho, double s, double t) {
    if (k == 0) return 0.0; // zero mode is annihilated by (-Delta)^{rho/2} differences
    const double k2 = static_cast<double>(k) * k;
    return std::pow(static_cast<double>(k), rho) * std::abs(std::exp(-k2 * t) - std::exp(-k2 * s));
}

namespace {

double schauder_sup(double rho, double theta, int K,
                    std::span<const std::pair<double, double>> st_grid) {
    double sup = 0.0;
    for (const auto& [s, t] : st_grid) {
        if (!(0.0 < s && s < t)) throw std::invalid_argument("schauder_check: need 0 < s < t");
        double best = 0.0;
        for (int k = 1; k <= K; ++k) {
            double v = heat_diff_factor(k, rho, s, t);
            if (v > best) best = v;
        }
        double q = best / (std::pow(t - s, theta) * std::pow(s, -(0.5 * rho + theta)));
        if (q > sup) sup = q;
    }
    return sup;
}

} // namespace

SchauderReport schauder_check(double rho, double theta, int K,
                              std::span<const std::pair<double, double>> st_grid) {
    if (0.5 * rho + theta < 0.0)
        throw std::invalid_argument("schauder_check: rho/2 + theta < 0");
    SchauderReport rep;
    rep.constant = schauder_sup(rho, theta, K, st_grid);
    rep.constant_2k = schauder_sup(rho, theta, 2 * K, st_grid);
    rep.ratio = rep.constant > 0.0 ? rep.constant_2k / rep.constant : 1.0;
    rep.k_stable = rep.ratio >= 0.9 && rep.ratio <= 1.1;
    return rep;
}

void write_coefficients(const std::string& path, const SpectralField& u) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_coefficients: cannot open " + path);
    auto put = [&](const std::complex<double>& c) {
        double re = c.real(), im = c.imag();
        out.write(reinterpret_cast<const char*>(&re), sizeof(double));
        out.write(reinterpret_cast<const char*>(&im), sizeof(double));
    };
    const int K = u.cutoff();
    for (int k = 0; k <= K; ++k) put(u.coeff(k));
    for (int k = 1; k <= K; ++k) put(std::conj(u.coeff(k)));
    out.close();

    nlohmann::json side;
    side["K"] = K;
    side["convention"] = "exp/sqrt(2pi)";
    std::ofstream sj(path + ".json");
    if (!sj) throw std::runtime_error("write_coefficients: cannot open " + path + ".json");
    sj << side.dump(2) << "\n";
}

SpectralField read_coefficients(const std::string& path) {
    std::ifstream sj(path + ".json");
    if (!sj) throw std::runtime_error("read_coefficients: missing sidecar " + path + ".json");
    nlohmann::json side = nlohmann::json::parse(sj);
    const int K = side.at("K").get<int>();
    if (side.at("convention").get<std::string>() != "exp/sqrt(2pi)")
        throw std::runtime_error("read_coefficients: unknown convention in sidecar");

    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_coefficients: cannot open " + path);
    SpectralField u(K);
    auto get = [&]() {
        double re = 0.0, im = 0.0;
        in.read(reinterpret_cast<char*>(&re), sizeof(double));
        in.read(reinterpret_cast<char*>(&im), sizeof(double));
        if (!in) throw std::runtime_error("read_coefficients: truncated dump " + path);
        return std::complex<double>(re, im);
    };
    for (int k = 0; k <= K; ++k) u.coeff(k) = get();
    return u;
}

} // namespace rbnlab
