#ifndef RBNLAB_HARNESS_HPP
#define RBNLAB_HARNESS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rbnlab {

// One experiment: a named suite plus every knob it can consume. Defaults are
// the admissible reference configuration (H=0.2, p=2, gamma=0.4, gamma0=0.8).
struct ExperimentConfig {
    std::string kind = "full-suite";

    // physical parameters
    double H = 0.2;
    double p = 2.0;
    double gamma = 0.4;   // singularity exponent of Sigma^2
    double gamma0 = 0.8;  // time-regularity exponent
    double gamma1 = 0.55; // spatial C^1 exponent (gamma0/2 + gamma1 > 1 in examples)
    double p_prime = 2.0; // Young-conjugate exponent for W^{1,p'} norms (explicit config)
    double eta = 0.3;     // Volterra kernel exponent
    double m = 8.0;       // moment order for sup-Sobolev bounds
    double T = 1.0;

    // diffusion coefficient
    std::string sigma_kind = "singular"; // singular | smooth | constant
    double sigma_cap = 1e3;
    double sigma_scale = 0.5; // level for smooth/constant profiles
    double u0_amp = 0.3;      // initial state: u0_amp on real mode 1 (cos x)

    // discretization
    std::size_t n_t = 1024; // power of two
    int K = 32;
    std::size_t K_noise = 32;
    std::size_t n_bins = 512;
    int levels = 10; // dyadic depth for sewing / regularity suites
    std::vector<double> eps_ladder = {0.2, 0.1, 0.05};

    // execution
    std::size_t n_samples = 1000;
    std::uint64_t seed = 12345;      // noise seed base
    std::uint64_t path_seed = 777;   // the quenched regularizing path
    std::string out_dir;             // empty: $RBNLAB_OUT or ./out
    bool override_inadmissible = false;
    int jobs = 1;

    static ExperimentConfig from_file(const std::string& path);
    void apply_key(const std::string& key, const std::string& value); // throws on unknown key
    void validate() const;                                            // throws naming the field
    std::string resolved_out_dir() const;
};

struct CheckResult {
    std::string name;
    bool pass = false;
    bool mandatory = true; // advisory checks are flagged, never failing
    double value = 0.0;
    double tolerance = 0.0;
    double se = 0.0; // Monte Carlo standard error when applicable
    std::string detail;
};

struct ExperimentReport {
    std::string kind;
    ExperimentConfig config;
    bool admissible = false;
    double H_bound = 0.0, gamma0_bound = 0.0;
    bool overridden = false;
    std::vector<CheckResult> checks;
    double wall_clock_sec = 0.0;
    std::size_t samples_used = 0;
    std::vector<std::string> artifacts;

    bool mandatory_pass() const;
};

// Executes the named suite, writes artifacts and a JSON report under the
// resolved output directory, and returns the report.
ExperimentReport run(const ExperimentConfig& config);

// One run per value along the axis, shared seed base; writes a combined CSV.
std::vector<ExperimentReport> sweep(const ExperimentConfig& base, const std::string& axis,
                                    std::span<const double> values);

std::string report_to_json(const ExperimentReport& report);
void print_report(const ExperimentReport& report); // one line per check, stdout

} // namespace rbnlab

#endif
