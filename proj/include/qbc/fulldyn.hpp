// fulldyn.hpp — The untruncated-model Hamiltonian on the truncated product
// space: a three-level mediator in Lambda configuration, two oscillator modes
// coupled dispersively to its two arms, and a static two-parameter Stark
// drive. Evolving with it validates the block-analytic effective dynamics.

#pragma once

#include "qbc/effective.hpp"
#include "qbc/hilbert.hpp"

#include <vector>

namespace qbc::fulldyn {

using hilbert::DensityMatrix;
using hilbert::Index;
using hilbert::Matrix;
using hilbert::ProductSpace;

// Every frequency of the model in w_ig units. The mode frequencies are pinned
// to the Raman resonance condition w_L = w_ig - Delta, w_R = w_ie - Delta.
struct SystemSpec {
    double omega_g{0.0};
    double omega_e{0.05};
    double omega_i{1.0};
    double delta{0.3};      // common detuning of both arms
    double omega_l_coupling{0.03};
    double omega_r_coupling{0.03};
    int drive_M{0};
    int drive_N{-1};
    Index cutoff_left{6};
    Index cutoff_right{6};

    double omega_ig() const { return omega_i - omega_g; }
    double omega_ie() const { return omega_i - omega_e; }
    double omega_eg() const { return omega_e - omega_g; }
    double omega_left_mode() const { return omega_ig() - delta; }
    double omega_right_mode() const { return omega_ie() - delta; }

    ProductSpace space() const { return {cutoff_left, 3, cutoff_right}; }
    effective::EffectiveParams effective_params() const;
    void check() const;
};

// Assemble the total Hamiltonian (free levels + free modes + both rotating
// wave arm couplings + the (M, N) Stark drive) in the ProductSpace ordering.
Matrix build_full_hamiltonian(const SystemSpec& spec);

// Residual Hamiltonian in the co-rotating frame where each arm coupling is
// static: Delta sigma_ii + drive + interactions. Populations are identical in
// both frames; the frame's diagonal frequencies are given by
// rotating_frame_frequencies.
Matrix build_rotating_hamiltonian(const SystemSpec& spec);
Eigen::VectorXd rotating_frame_frequencies(const SystemSpec& spec);

// Total excitation operator n_L + n_R + sigma_ii; commutes with both arm
// couplings.
Matrix excitation_operator(const SystemSpec& spec);

// Cached eigendecomposition of the full Hamiltonian for repeated propagation.
class FullPropagator {
public:
    explicit FullPropagator(const SystemSpec& spec);
    DensityMatrix evolve(const DensityMatrix& rho, double t) const;
    const SystemSpec& spec() const { return spec_; }

private:
    SystemSpec spec_;
    Eigen::VectorXd evals_;
    Matrix evecs_;
};

// rho(t) = U rho U^dag with U = exp(-i H_T t). The evolution is generated in
// the lab frame; compared observables are populations, which agree with the
// interaction-picture effective dynamics.
DensityMatrix evolve_full(const DensityMatrix& rho, double t, const SystemSpec& spec);

// Per-time comparison of the full and effective predictions for the same
// initial state, on a shared grid of absolute times.
struct DispersiveResidual {
    double max_dev_p_g{0.0};
    double max_dev_p_e{0.0};
    double max_dev_n_left{0.0};
    double max_dev_n_right{0.0};
    double max_population_i{0.0};
    // Per grid point: {p_g, p_e} from both routes plus the level-i population.
    std::vector<double> p_e_full, p_e_eff, p_g_full, p_g_eff, p_i_full;
};

DispersiveResidual dispersive_residual(const SystemSpec& spec, const DensityMatrix& initial,
                                       const std::vector<double>& t_grid);

} // namespace qbc::fulldyn
