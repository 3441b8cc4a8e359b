#include "rbnlab/sewing.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rbnlab {

namespace {

// Geometric-tail (Aitken) correction from the last three partial sums. Raw
// dyadic sums converge only like the gap sequence; when the gaps decay at a
// clean geometric rate r, the remaining tail is d*r/(1-r).
double extrapolate(const std::vector<double>& sums) {
    const std::size_t n = sums.size();
    if (n < 3) return sums.back();
    const double s2 = sums[n - 1];
    const double d1 = sums[n - 2] - sums[n - 3];
    const double d2 = s2 - sums[n - 2];
    const double floor_ = 1e-14 * (1.0 + std::abs(s2));
    if (std::abs(d1) <= floor_ || std::abs(d2) <= floor_) return s2; // converged exactly
    const double r = d2 / d1;
    if (std::abs(r) > 0.95 || std::abs(r) < 0.02) return s2; // not cleanly geometric
    return s2 + d2 * r / (1.0 - r);
}

SewValue run_levels(const std::function<double(int)>& level_sum, const SewOptions& opts) {
    SewValue out;
    double prev = 0.0;
    for (int L = 0; L <= opts.max_level; ++L) {
        double s = level_sum(L);
        out.partial_sums.push_back(s);
        out.level = L;
        if (L > 0) {
            double gap = std::abs(s - prev);
            out.gaps.push_back(gap);
            if (L >= opts.min_level && gap < opts.tol) {
                out.converged = true;
                prev = s;
                break;
            }
        }
        prev = s;
    }
    out.raw = prev;
    out.value = extrapolate(out.partial_sums);
    const std::size_t ng = out.gaps.size();
    if (ng >= 2 && out.gaps[ng - 2] > 0.0) {
        out.gap_ratio = out.gaps[ng - 1] / out.gaps[ng - 2];
        out.decay_rate = out.gap_ratio > 0.0 ? -std::log2(out.gap_ratio)
                                             : std::numeric_limits<double>::infinity();
    }
    return out;
}

void check_interval(double s, double t) {
    if (!(s <= t)) throw std::invalid_argument("sewing: need s <= t");
}

} // namespace

double delta(const Germ& germ, double s, double u, double t) {
    if (!(s <= u && u <= t)) throw std::invalid_argument("delta: need s <= u <= t");
    return germ(s, t) - germ(s, u) - germ(u, t);
}

GermNorms germ_norms(const Germ& germ, double s, double t, double alpha, double beta, int depth) {
    check_interval(s, t);
    if (depth < 2) throw std::invalid_argument("germ_norms: mesh depth < 2");
    const std::size_t n = (std::size_t{1} << depth) + 1;
    std::vector<double> pts(n);
    for (std::size_t i = 0; i < n; ++i)
        pts[i] = s + (t - s) * static_cast<double>(i) / static_cast<double>(n - 1);

    GermNorms out;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double span = pts[j] - pts[i];
            const double a = std::abs(germ(pts[i], pts[j])) / std::pow(span, alpha);
            if (a > out.norm_alpha) out.norm_alpha = a;
            const double denom_b = std::pow(span, beta);
            const double a_ij = germ(pts[i], pts[j]);
            for (std::size_t u = i + 1; u < j; ++u) {
                double d = std::abs(a_ij - germ(pts[i], pts[u]) - germ(pts[u], pts[j])) / denom_b;
                if (d > out.norm_beta) out.norm_beta = d;
            }
        }
    }
    return out;
}

SewValue sew_value(const Germ& germ, double s, double t, const SewOptions& opts) {
    check_interval(s, t);
    auto level_sum = [&](int L) {
        const std::size_t n = std::size_t{1} << L;
        const double h = (t - s) / static_cast<double>(n);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double u = s + static_cast<double>(i) * h;
            sum += germ(u, u + h);
        }
        return sum;
    };
    return run_levels(level_sum, opts);
}

SewingResult sew(const Germ& germ, double s, double t, const SewOptions& opts) {
    SewValue v = sew_value(germ, s, t, opts);
    SewingResult out;
    out.level = v.level;
    out.converged = v.converged;
    out.gaps = v.gaps;
    out.gap_ratio = v.gap_ratio;

    const std::size_t n = std::size_t{1} << v.level;
    const double h = (t - s) / static_cast<double>(n);
    out.times.resize(n + 1);
    out.values.resize(n + 1);
    out.times[0] = s;
    out.values[0] = 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double u = s + static_cast<double>(i) * h;
        acc += germ(u, u + h);
        out.times[i + 1] = u + h;
        out.values[i + 1] = acc;
    }
    return out;
}

DefectCertificate defect_bound_check(const SewingResult& sewn, const Germ& germ, double beta,
                                     double norm_beta, int subgrid_depth) {
    DefectCertificate cert;
    const std::size_t n = sewn.times.size() - 1;
    const std::size_t sub = std::size_t{1} << subgrid_depth;
    if (sub > n) throw std::invalid_argument("defect_bound_check: subgrid finer than sewing grid");
    const std::size_t stride = n / sub;
    for (std::size_t i = 0; i < sub; ++i) {
        for (std::size_t j = i + 1; j <= sub; ++j) {
            const std::size_t ii = i * stride, jj = j * stride;
            const double defect =
                std::abs(sewn.increment(ii, jj) - germ(sewn.times[ii], sewn.times[jj]));
            if (defect > cert.max_defect) cert.max_defect = defect;
            const double denom = norm_beta * std::pow(sewn.times[jj] - sewn.times[ii], beta);
            if (denom > 0.0) {
                double c = defect / denom;
                if (c > cert.fitted_c) cert.fitted_c = c;
            }
        }
    }
    return cert;
}

SewValue volterra_sew(const Germ& germ, double eta, double s, double t, const SewOptions& opts) {
    check_interval(s, t);
    if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("volterra_sew: eta outside (0,1)");
    auto level_sum = [&](int L) {
        const std::size_t n = std::size_t{1} << L;
        const double h = (t - s) / static_cast<double>(n);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double u = s + static_cast<double>(i) * h; // left endpoint; u < t so weight finite
            sum += std::pow(t - u, -eta) * germ(u, u + h);
        }
        return sum;
    };
    return run_levels(level_sum, opts);
}

VolterraCertificate volterra_holder(const Germ& germ, double eta, std::span<const double> ts,
                                    double exponent, const SewOptions& opts) {
    VolterraCertificate cert;
    cert.holder_exponent = exponent;
    for (double t : ts) {
        SewValue v = volterra_sew(germ, eta, 0.0, t, opts);
        cert.t_values.push_back(t);
        cert.v_values.push_back(v.value);
        cert.all_converged = cert.all_converged && v.converged;
    }
    for (std::size_t i = 0; i < cert.t_values.size(); ++i) {
        for (std::size_t j = i + 1; j < cert.t_values.size(); ++j) {
            double dt = std::abs(cert.t_values[j] - cert.t_values[i]);
            if (dt == 0.0) continue;
            double c = std::abs(cert.v_values[j] - cert.v_values[i]) / std::pow(dt, exponent);
            if (c > cert.holder_constant) cert.holder_constant = c;
        }
    }
    return cert;
}

StabilityReport sewing_stability_check(std::span<const Germ> germ_sequence, const Germ& limit_germ,
                                       double alpha, double beta, double s, double t, int depth,
                                       const SewOptions& opts) {
    StabilityReport rep;
    for (const Germ& gn : germ_sequence) {
        // sew the difference germ and take the dyadic-pair alpha-sup of its increments
        Germ diff = [&limit_germ, gn](double a, double b) { return limit_germ(a, b) - gn(a, b); };
        SewingResult sewn = sew(diff, s, t, opts);
        const std::size_t n = sewn.times.size() - 1;
        const std::size_t sub = std::min<std::size_t>(std::size_t{1} << depth, n);
        const std::size_t stride = n / sub;
        double dist = 0.0;
        for (std::size_t i = 0; i < sub; ++i) {
            for (std::size_t j = i + 1; j <= sub; ++j) {
                double span = sewn.times[j * stride] - sewn.times[i * stride];
                double v = std::abs(sewn.increment(i * stride, j * stride)) / std::pow(span, alpha);
                if (v > dist) dist = v;
            }
        }
        rep.distances.push_back(dist);
        GermNorms norms = germ_norms(gn, s, t, alpha, beta, std::min(depth, 6));
        rep.delta_norms.push_back(norms.norm_beta);
        if (norms.norm_beta > rep.max_delta_norm) rep.max_delta_norm = norms.norm_beta;
    }
    rep.monotone = true;
    for (std::size_t i = 0; i + 1 < rep.distances.size(); ++i)
        if (rep.distances[i + 1] > 1.1 * rep.distances[i] + 1e-15) rep.monotone = false;
    return rep;
}

} // namespace rbnlab
