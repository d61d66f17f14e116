// effective.hpp — Exact block-analytic evolution of the dispersive three-body
// Hamiltonian that couples the two oscillator modes through the {g, e}
// subspace of the mediator. The Hamiltonian is block diagonal in the doublets
// {|m, g, n>, |m-1, e, n+1>}, which makes the propagator a direct sum of 2x2
// analytic unitaries plus phases on the trivial eigenstates |0, g, n> and
// |m, e, 0>.
//
// All frequencies inside this module are carried in units of lambda_eff;
// conversions from physical couplings happen at the boundary.

#pragma once

#include "qbc/hilbert.hpp"

#include <utility>
#include <vector>

namespace qbc::effective {

using hilbert::Complex;
using hilbert::DensityMatrix;
using hilbert::Index;
using hilbert::Matrix;
using hilbert::ProductSpace;

// Parameters of the effective dynamics. chi = Omega_R / Omega_L and
// lambda_eff = Omega_L Omega_R / detuning are stored redundantly with the
// couplings; check() enforces the two identities to 1e-12.
struct EffectiveParams {
    double omega_L_coupling{1.0};
    double omega_R_coupling{1.0};
    double detuning{1.0};
    double chi{1.0};
    double lambda_eff{1.0};
    int drive_M{0};
    int drive_N{-1};

    static EffectiveParams from_couplings(double omega_l, double omega_r, double delta,
                                          int m, int n);
    // Build from (chi, lambda_eff) directly; the couplings are reconstructed
    // for a chosen detuning scale.
    static EffectiveParams from_ratio(double chi, double lambda, int m, int n,
                                      double delta = 1.0);

    // True when detuning >= 10 max(Omega_L, Omega_R).
    bool dispersive() const;
    void check() const;
};

struct QubitPopulations {
    double p_g{1.0};
    double p_e{0.0};
};

// Analytic data of one doublet at time t: detuning, Rabi frequency and the
// amplitude pair (A, B) with |A|^2 + |B|^2 = 1.
struct DoubletAmplitudes {
    Index m{1};
    Index n{0};
    double delta_mn{0.0};
    double omega_mn{0.0};
    Complex a{1.0, 0.0};
    Complex b{0.0, 0.0};
};

// Doublet detuning lambda_eff (chi^-1 (m - M) - chi (n - N)).
double doublet_detuning(Index m, Index n, const EffectiveParams& p);

// Doublet Rabi frequency sqrt(4 m (n+1) lambda^2 + delta_mn^2).
double doublet_rabi(Index m, Index n, const EffectiveParams& p);

// A_mn(t) = cos(W t/2) + i (D/W) sin(W t/2),
// B_mn(t) = i sqrt(W^2 - D^2)/W sin(W t/2).
DoubletAmplitudes amplitudes(Index m, Index n, double t, const EffectiveParams& p);

// pi / Omega_mn, the transfer-maximizing time of a single doublet.
double optimal_tau(Index m, Index n, const EffectiveParams& p);

// Non-trivial eigenvalue branches of the doublet (m, n) in lambda_eff units:
// g-branch (M - m)/chi, e-branch chi (N - n).
std::pair<double, double> selective_eigenvalues(Index m, Index n, const EffectiveParams& p);

// Precomputed block structure of the propagator on a given product space.
// Building it is O(dim); applying it to a density matrix is O(dim^2).
class EffectiveEvolver {
public:
    EffectiveEvolver(const ProductSpace& space, const EffectiveParams& p);

    // Exact unitary evolution for time t. Doublets get the analytic 2x2
    // propagator (including their mean-energy phase, so the result matches the
    // dense matrix exponential on the truncated space); trivial eigenstates
    // and truncation-edge states get pure phases. With a 3-level middle
    // factor, level-i populations and i-i coherences advance with the
    // dispersive Stark phases while any i <-> {g,e} coherences are dropped, as
    // the effective picture decouples them.
    DensityMatrix evolve(const DensityMatrix& rho, double t) const;

    const ProductSpace& space() const { return space_; }
    const EffectiveParams& params() const { return params_; }

private:
    ProductSpace space_;
    EffectiveParams params_;
    // Per flat basis state: partner index (or -1 for phase-only states),
    // doublet labels and static energy in lambda_eff units.
    struct BlockInfo {
        Index partner{-1};
        Index m{0};       // doublet label m (only valid when partner >= 0)
        Index n{0};       // doublet label n
        bool is_upper{false};   // true for the |m, g, n> member
        double energy{0.0};     // diagonal energy of phase-only states
    };
    std::vector<BlockInfo> blocks_;
};

// One-shot convenience wrapper around EffectiveEvolver.
DensityMatrix evolve_effective(const DensityMatrix& rho, const ProductSpace& space,
                               double t, const EffectiveParams& p);

// Internal-energy change of the qubit after time tau, in hbar*omega_eg units:
// 2 sum_{m>=1, n>=0} (pL_m pq_g pR_n - pL_{m-1} pq_e pR_{n+1}) |B_mn(tau)|^2.
// Populations outside the stored ranges are treated as zero.
double delta_U_q(const Eigen::VectorXd& p_left, const QubitPopulations& pq,
                 const Eigen::VectorXd& p_right, double tau, const EffectiveParams& p);

// Raw energy matrix S_mn = pL_m pq_g pR_n - pL_{m-1} pq_e pR_{n+1} on the
// truncated grid. Row r holds m = r + 1 (m >= 1), column c holds n = c.
Eigen::MatrixXd raw_energy_matrix(const Eigen::VectorXd& p_left, const QubitPopulations& pq,
                                  const Eigen::VectorXd& p_right);

} // namespace qbc::effective
