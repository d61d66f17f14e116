// observables.hpp — Scalar diagnostics: qubit internal energy, populations,
// purity, von Neumann entropy, mutual information, mean excitation numbers.

#pragma once

#include "qbc/hilbert.hpp"

namespace qbc::observables {

using hilbert::DensityMatrix;
using hilbert::Index;
using hilbert::Matrix;
using hilbert::ProductSpace;

// Snapshot of the energetically relevant scalars of a full L (x) qutrit (x) R
// state. U_q is in units of hbar*omega_eg and equals p_e - p_g; level i does
// not contribute to this convention.
struct EnergyReport {
    double u_q{0.0};
    double p_g{0.0};
    double p_e{0.0};
    double p_i{0.0};
    double n_left{0.0};
    double n_right{0.0};
};

// Internal energy of a 2- or 3-level state in hbar*omega_eg units: p_e - p_g.
double qubit_energy(const DensityMatrix& rho_q);

// -sum lambda_k ln lambda_k, natural log. Eigenvalues in (-1e-6, 0) are
// clamped to zero; anything below -1e-6 throws.
double von_neumann_entropy(const DensityMatrix& rho);

// I(A:B) = S(rho_A) + S(rho_B) - S(rho_AB) for a bipartite state with factor
// dimensions (dim_a, dim_b), first factor slowest.
double mutual_information(const DensityMatrix& rho_ab, Index dim_a, Index dim_b);

// Tr rho^2.
double purity(const DensityMatrix& rho);

// Mean excitation number <a^dag a> of a single-mode state.
double mean_excitation(const DensityMatrix& rho);

// Full report for a product-space state.
EnergyReport energy_report(const DensityMatrix& rho, const ProductSpace& space);

} // namespace qbc::observables
