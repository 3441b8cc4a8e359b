#ifndef RBNLAB_SEWING_HPP
#define RBNLAB_SEWING_HPP

#include <functional>
#include <span>
#include <vector>

namespace rbnlab {

// Two-parameter germ (s,t) -> A_{s,t}, s <= t. L^{m/2}(Omega)-valued germs are
// realized as per-sample scalar germs and sewed samplewise; the ensemble norm
// is taken afterwards.
using Germ = std::function<double(double, double)>;

// (delta A)_{s,u,t} = A_{s,t} - A_{s,u} - A_{u,t}.
double delta(const Germ& germ, double s, double u, double t);

struct GermNorms {
    double norm_alpha = 0.0; // sup |A_{s,t}| / (t-s)^alpha over dyadic pairs
    double norm_beta = 0.0;  // sup |delta A_{s,u,t}| / (t-s)^beta over dyadic triples
};

GermNorms germ_norms(const Germ& germ, double s, double t, double alpha, double beta, int depth);

struct SewOptions {
    int max_level = 20;
    double tol = 1e-10;
    int min_level = 3; // levels to run before testing the Cauchy gap
};

// Dyadic Riemann-sum limit over [s,t]. `raw` is the last partial sum S_L;
// `value` applies a geometric tail (Aitken) correction when the observed gap
// decay is cleanly geometric, since the raw sums converge only at the gap rate.
struct SewValue {
    double value = 0.0;
    double raw = 0.0;
    std::vector<double> partial_sums;
    std::vector<double> gaps; // |S_L - S_{L-1}|, signed stored separately below
    int level = 0;
    bool converged = false;
    double gap_ratio = 0.0; // last observed successive-gap ratio
    double decay_rate = 0.0; // -log2 |gap_ratio| (levels gained per refinement)
};

SewValue sew_value(const Germ& germ, double s, double t, const SewOptions& opts = {});

// Cumulative sewing (I A)_{s, times[j]} on the level-L dyadic grid of [s,t].
// values[0] = 0; additivity (I A)_{a,b} = value(b) - value(a) holds exactly.
struct SewingResult {
    std::vector<double> times;
    std::vector<double> values;
    int level = 0;
    bool converged = false;
    std::vector<double> gaps;
    double gap_ratio = 0.0;

    // (I A)_{times[i], times[j]}
    double increment(std::size_t i, std::size_t j) const { return values[j] - values[i]; }
};

SewingResult sew(const Germ& germ, double s, double t, const SewOptions& opts = {});

// Sewing-Lemma defect certificate: max over subgrid pairs of
// |(I A)_{s,t} - A_{s,t}| and the fitted constant c against norm_beta*(t-s)^beta.
struct DefectCertificate {
    double max_defect = 0.0;
    double fitted_c = 0.0;
};

DefectCertificate defect_bound_check(const SewingResult& sewn, const Germ& germ, double beta,
                                     double norm_beta, int subgrid_depth);

// Volterra sewing: dyadic limit of sum (t-u)^{-eta} A_{u,v} over [s,t], kernel
// weighted at the left endpoint of each subinterval (the last weight uses the
// final left endpoint u < t, hence is finite).
SewValue volterra_sew(const Germ& germ, double eta, double s, double t,
                      const SewOptions& opts = {});

// Certificate companion: values of t -> volterra_sew over [0,t] on a t-grid and
// the fitted Holder-in-t constant sup |V_t - V_{t'}| / |t-t'|^exponent.
struct VolterraCertificate {
    std::vector<double> t_values;
    std::vector<double> v_values;
    double holder_constant = 0.0;
    double holder_exponent = 0.0;
    bool all_converged = true;
};

VolterraCertificate volterra_holder(const Germ& germ, double eta, std::span<const double> ts,
                                    double exponent, const SewOptions& opts = {});

// Commuting limits and sewings: for a germ family A^n -> A with uniformly
// bounded delta-norms, the sewing distances ||I(A - A^n)||_alpha must decrease.
struct StabilityReport {
    std::vector<double> distances;
    std::vector<double> delta_norms;
    double max_delta_norm = 0.0;
    bool monotone = false; // nonincreasing within 10% noise tolerance
};

StabilityReport sewing_stability_check(std::span<const Germ> germ_sequence, const Germ& limit_germ,
                                       double alpha, double beta, double s, double t,
                                       int depth = 6, const SewOptions& opts = {});

} // namespace rbnlab

#endif
