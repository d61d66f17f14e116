// lindblad.hpp — Markovian open dynamics: thermal dissipators on the {ig, ie,
// L, R} transitions integrated alongside the full Hamiltonian.
//
// The integrator steps in the co-rotating frame in which every arm coupling is
// static. All jump operators are eigenoperators of the frame Hamiltonian, so
// the dissipators are identical in both frames and the populations agree
// pointwise; returned states are rotated back to the lab frame.

#pragma once

#include "qbc/fulldyn.hpp"
#include "qbc/hilbert.hpp"

#include <functional>
#include <string>
#include <vector>

namespace qbc::lindblad {

using fulldyn::SystemSpec;
using hilbert::DensityMatrix;
using hilbert::Index;
using hilbert::Matrix;

// Thermal reservoir parameters. The bare rate is quoted in lambda_eff units
// (set gamma0_absolute for free-Hamiltonian studies where lambda_eff is not
// defined). The e <-> g channel is suppressed by selection rules and omitted
// unless explicitly enabled.
struct DissipationSpec {
    double gamma0{0.0};
    double tbar{0.0};
    bool gamma0_absolute{false};
    bool include_eg_channel{false};
};

// Bose-Einstein occupation (exp(omega/T) - 1)^-1; zero at T = 0.
double bose_einstein(double omega_bar, double tbar);

// One thermal dissipation channel: the lowering jump operator on the product
// space, its transition frequency and the up/down rates
// gamma+ = gamma0 nbar(omega), gamma- = gamma0 (nbar(omega) + 1).
struct ThermalChannel {
    std::string transition;
    double omega{0.0};
    Matrix lower;
    double rate_up{0.0};
    double rate_down{0.0};
};

std::vector<ThermalChannel> thermal_channels(const SystemSpec& spec,
                                             const DissipationSpec& diss);

// Right-hand side of the master equation in the lab frame:
// -i[H_T, rho] + sum_mu gamma+_mu D[l+_mu] + gamma-_mu D[l-_mu].
// The result is Hermitian and traceless.
Matrix lindblad_rhs(const DensityMatrix& rho, const SystemSpec& spec,
                    const DissipationSpec& diss);

struct IntegrateOptions {
    double step_hint{0.0};        // 0 = choose automatically
    double accuracy_factor{0.1};  // cap on step * spectral-radius of the stepped H
    double trace_drift_tol{1e-8}; // per-step bound; exceeding it triggers halving
    int max_halvings{6};
    double eig_floor{-1e-6};
    bool use_rotating_frame{true};
    bool check_positivity{true};  // audit min eigenvalue at trajectory checkpoints
};

// Observer form: cb(index, t, rho_lab) is invoked at every grid point without
// storing the trajectory. t_grid must be non-decreasing and start at >= 0.
void integrate_observed(const DensityMatrix& rho0, const std::vector<double>& t_grid,
                        const SystemSpec& spec, const DissipationSpec& diss,
                        const std::function<void(std::size_t, double, const DensityMatrix&)>& cb,
                        const IntegrateOptions& opts = {});

// Trajectory form: lab-frame states at every grid point. Trace drift beyond
// the bound raises an integrator-tolerance error after the halving retries;
// renormalization is never applied.
std::vector<DensityMatrix> integrate(const DensityMatrix& rho0,
                                     const std::vector<double>& t_grid, const SystemSpec& spec,
                                     const DissipationSpec& diss,
                                     const IntegrateOptions& opts = {});

} // namespace qbc::lindblad
