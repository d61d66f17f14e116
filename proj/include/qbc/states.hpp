// states.hpp — Preparation of the initial states used throughout: oscillator
// Gibbs states, N-photon-added thermal states, displaced thermal states,
// inefficient photon-addition mixtures, and thermal qutrits.
//
// Conventions: temperatures are dimensionless, T = k_B T_phys / (hbar w_ig);
// mode and transition frequencies are given in units of w_ig.

#pragma once

#include "qbc/hilbert.hpp"

namespace qbc::states {

using hilbert::Complex;
using hilbert::DensityMatrix;
using hilbert::Index;
using hilbert::Matrix;

// Thermal context of a single bosonic mode. Construction enforces that the
// truncated Gibbs tail beyond the cutoff is below 1e-8; every downstream
// closed-form claim depends on that.
struct ThermalSpec {
    double tbar{0.0};        // dimensionless temperature, >= 0
    double omega_bar{1.0};   // mode frequency in w_ig units, > 0
    Index cutoff{2};

    ThermalSpec(double t, double w, Index c);

    // Boltzmann factor exp(-omega_bar / tbar); 0 at tbar = 0.
    double boltzmann() const;
    // Single-mode Gibbs partition function Z_0 = 1 / (1 - q).
    double z0() const { return 1.0 / (1.0 - boltzmann()); }
    // Gibbs mean occupation <n> = Z_0 - 1.
    double thermal_occupation() const { return z0() - 1.0; }
};

// Partition data of the N-photon-added thermal state. z_n is built from the
// recursion Z_N = N Z_0 Z_{N-1} and must agree with the closed form
// N! Z_0^(N+1) to 1e-12 (enforced at construction).
struct PhotonAddition {
    Index n_added{0};
    double z0{1.0};
    double z_n{1.0};

    PhotonAddition(Index n, const ThermalSpec& spec);

    // Mean occupation <n>_N = (N+1) Z_0 - 1.
    double mean_occupation() const { return (static_cast<double>(n_added) + 1.0) * z0 - 1.0; }
};

// Diagonal Gibbs state p_n ~ exp(-n w / T), normalized on the truncated space.
DensityMatrix gibbs_oscillator(const ThermalSpec& spec);

// N-photon-added thermal state: a^dag^N rho_T a^N normalized. Zero population
// below Fock level N; p_k ~ C(k, N) q^(k-N) for k >= N.
DensityMatrix npats(Index n_added, const ThermalSpec& spec);

// Displacement-operator matrix D_nm(alpha) on a truncated space, computed from
// the finite triple-factorial sum with log-factorial accumulation. Throws a
// truncation-insufficient error unless all columns m <= cutoff/2 stay
// normalized within 1e-6.
Matrix displacement_matrix(Complex alpha, Index cutoff);

// Displaced thermal state D(alpha) rho_T D(alpha)^dag, renormalized after
// truncation. The renormalization factor must be within 1e-6 of 1 (else a
// truncation error is thrown); pass renorm_out to audit it.
DensityMatrix dts(Complex alpha, const ThermalSpec& spec, double* renorm_out = nullptr);

// Crop a single-mode state to a smaller truncation and renormalize; the
// discarded mass must stay below 1e-8.
DensityMatrix truncate_state(const DensityMatrix& rho, Index new_dim);

// Displaced thermal state prepared at a displacement-converged cutoff
// (>= 40) and cropped back to spec.cutoff. Charger-sized spaces are too small
// for the displacement column test at |alpha| ~ 1 even though the state
// itself carries negligible tail mass there.
DensityMatrix dts_prepared(Complex alpha, const ThermalSpec& spec);

// Displacement amplitude sqrt(N Z_0) that gives the displaced thermal state
// the same mean occupation as the N-photon-added one.
double alpha_opt(Index n_added, const ThermalSpec& spec);

// Convex mixture eta * SPATS + (1 - eta) * Gibbs modelling photon addition
// that succeeds with probability eta.
DensityMatrix inefficient_spats(double eta, const ThermalSpec& spec);

// 3x3 diagonal Gibbs state over the qutrit levels {g, e, i} with level
// frequencies in w_ig units. Requires omega_g < omega_e < omega_i.
DensityMatrix qutrit_thermal(double tbar, double omega_g, double omega_e, double omega_i);

// Two-level restriction of the thermal qutrit (level i truncated away and the
// {g, e} block renormalized); the fresh battery state of the collision chain.
DensityMatrix qubit_thermal(double tbar, double omega_g, double omega_e);

} // namespace qbc::states
