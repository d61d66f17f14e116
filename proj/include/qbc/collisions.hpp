// collisions.hpp — Sequential charging of a string of fresh thermal qubits by
// a persistent two-mode charger. Each collision joins the charger with one
// battery, evolves under the selective effective dynamics for an optimized
// flying time, and discards the battery.
//
// The battery is represented as a two-level system; level i only enters the
// full-dynamics and open-system validations.

#pragma once

#include "qbc/effective.hpp"
#include "qbc/hilbert.hpp"

#include <optional>
#include <vector>

namespace qbc::collisions {

using effective::EffectiveParams;
using effective::QubitPopulations;
using hilbert::Complex;
using hilbert::DensityMatrix;
using hilbert::Index;

// Joint two-mode state of the charger (battery traced out), stored on
// L (x) R with the left mode slowest.
struct ChargerState {
    DensityMatrix rho;
    Index n_left{0};
    Index n_right{0};

    ChargerState() = default;
    ChargerState(DensityMatrix state, Index nl, Index nr);

    // Joint matrix element p(m, m', n, n') = <m, n| rho |m', n'>.
    Complex joint(Index m, Index mp, Index n, Index np) const;
    // Diagonal populations of each marginal.
    Eigen::VectorXd left_populations() const;
    Eigen::VectorXd right_populations() const;

    static ChargerState product(const DensityMatrix& left, const DensityMatrix& right);
};

enum class ChiRegime { small, unit, large };

struct CollisionRecord {
    int k{0};
    int drive_M{0};
    int drive_N{-1};
    double tau{0.0};
    double p_g_final{0.0};
    double p_e_final{0.0};
    double delta_u{0.0};          // hbar*omega_eg units, in [-2, 2]
    double raw_energy_sum{0.0};   // sum of S_mn at the start of the collision
    double mutual_info{0.0};      // I(R:L) of the charger after the collision
};

struct ChainConfig {
    double drain_epsilon{1e-12};      // predicted-gain floor before termination
    double population_floor{1e-12};   // occupation threshold for the (M, N) scan
    int tau_grid_points{400};
    double tau_rel_tol{1e-4};         // golden-section refinement tolerance
    double tail_audit_tol{1e-6};      // allowed top-two Fock-level mass at the end
};

struct ChainResult {
    std::vector<CollisionRecord> records;
    ChargerState final_charger;
    std::vector<DensityMatrix> final_qubits;
    bool terminated_early{false};
    bool truncation_ok{true};
};

// Closed-form total raw energy available in the next collision:
// p_g (1 - p^L_00) - p_e (1 - p^R_00). Equals the sum over the S_mn table.
double raw_energy_sum_k(const ChargerState& charger, const QubitPopulations& pq);

// Per-doublet raw energy table of a (possibly correlated) charger, built from
// the diagonal of the joint distribution. Same layout as
// effective::raw_energy_matrix.
Eigen::MatrixXd raw_energy_table(const ChargerState& charger, const QubitPopulations& pq);

// Predicted battery energy gain of a collision of length tau, from the raw
// energy table and the doublet transfer probabilities. Exact for diagonal
// battery inputs because the joint (delta m, delta n) coherence grading is
// preserved by the block dynamics.
double predicted_delta_u(const Eigen::MatrixXd& s_table, double tau, const EffectiveParams& p);

// Flying time maximizing the energy gain: a 400-point scan of [0, 2 pi /
// Omega_min] over the populated doublets followed by golden-section
// refinement.
double optimal_collision_tau(const ChargerState& charger, const QubitPopulations& pq,
                             const EffectiveParams& p, const ChainConfig& cfg = {});

// Drive integers for the next collision. chi = 1 removes the drive, (0, -1);
// chi << 1 scans M over the populated left Fock range with N pinned to the
// rounded right-marginal occupation (symmetric for chi >> 1) and returns the
// family maximizing the predicted gain at its optimal flying time, ties going
// to the smaller |M| + |N|. Returns nullopt when nothing is populated or the
// best predicted gain is below the drain threshold.
std::optional<std::pair<int, int>> select_MN(const ChargerState& charger,
                                             const QubitPopulations& pq, double chi,
                                             ChiRegime regime, const ChainConfig& cfg = {});

// One collision at the (M, N) already fixed in p: joins charger and battery,
// evolves for the optimal flying time, and splits them again.
struct CollisionOutcome {
    ChargerState charger;
    DensityMatrix qubit;
    CollisionRecord record;
};
CollisionOutcome collide_one(const ChargerState& charger, const DensityMatrix& qubit,
                             const EffectiveParams& p, const ChainConfig& cfg = {});

// Full chain of up to K collisions with per-collision drive selection and
// flying-time calibration. Terminates early on a drained charger; that is
// recorded, not an error.
ChainResult run_chain(int k_collisions, const ChargerState& initial_charger,
                      const DensityMatrix& qubit_template, const EffectiveParams& p,
                      ChiRegime regime, const ChainConfig& cfg = {});

} // namespace qbc::collisions
