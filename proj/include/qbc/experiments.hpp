// experiments.hpp — Configuration-driven experiment runner. Each experiment
// reproduces one figure class as CSV series plus a key = value summary file;
// identical config and seed give byte-identical output.

#pragma once

#include "qbc/hilbert.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace qbc::experiments {

enum class Kind {
    single_charge,
    reset,
    eta_sweep,
    dissipation,
    collisions,
    validate_dispersive,
    appendix_checks,
};

const char* kind_name(Kind k);

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key = value configuration; every field has a documented default and
// unknown keys are rejected. Frequencies are in w_ig units, temperatures
// dimensionless, rates in lambda_eff units.
struct ExperimentConfig {
    Kind experiment{Kind::single_charge};

    double tbar{0.1};
    std::vector<double> tbar_list{0.05, 0.1};
    double chi{1.0};
    std::vector<double> chi_list{0.1, 1.0, 10.0};

    double omega_g{0.0};
    double omega_e{0.05};
    double omega_i{1.0};
    double delta{0.3};

    double delta_over_omega{50.0};
    std::vector<double> ratio_list{10.0, 30.0, 100.0};
    double delta_over_omega_lindblad{10.0};
    std::vector<double> gamma0_list{0.01, 0.05, 0.1};

    int n_added{1};
    double alpha{-1.0};   // < 0 means "match the n_added input energy"
    int eta_steps{41};
    int k_collisions{30};

    hilbert::Index cutoff_left{25};
    hilbert::Index cutoff_right{25};
    hilbert::Index cutoff_lindblad{12};
    hilbert::Index cutoff_full{6};

    int time_points{200};
    int time_points_lindblad{60};
    int time_points_validate{120};
    double lambda_t_max{3.14159265358979324};
    double lambda_t_max_lindblad{2.0};

    std::uint64_t seed{12345};

    void validate() const;
};

// Parse a config file (or raw text); errors carry the offending line number.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

struct RunResult {
    int exit_code{0};                 // 0 ok, 2 physics flag (truncation audit)
    std::vector<std::string> files;   // paths written, summary last
};

// Execute the configured experiment, writing one CSV per plot series plus
// summary.txt under out_dir.
RunResult run_experiment(const ExperimentConfig& config, const std::string& out_dir);

// Appendix-identity and invariant suite; prints one line per check and
// returns the number of failures.
int run_check_suite(std::uint64_t seed, std::ostream& log);

// Fixed-precision float formatting shared by all writers ("%.12g").
std::string format_double(double v);

} // namespace qbc::experiments
