#include "qbc/fulldyn.hpp"

#include "qbc/observables.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace qbc::fulldyn {

using hilbert::Complex;
using hilbert::annihilation;
using hilbert::basis_op;
using hilbert::kron;

effective::EffectiveParams SystemSpec::effective_params() const {
    return effective::EffectiveParams::from_couplings(omega_l_coupling, omega_r_coupling,
                                                      delta, drive_M, drive_N);
}

void SystemSpec::check() const {
    if (!(omega_g < omega_e && omega_e < omega_i)) {
        throw std::invalid_argument("SystemSpec: level ordering must be w_g < w_e < w_i");
    }
    if (omega_l_coupling < 0.0 || omega_r_coupling < 0.0) {
        throw std::invalid_argument("SystemSpec: couplings must be >= 0");
    }
    if (delta <= 0.0) throw std::invalid_argument("SystemSpec: detuning must be > 0");
    if (omega_left_mode() <= 0.0 || omega_right_mode() <= 0.0) {
        throw std::invalid_argument("SystemSpec: detuning exceeds a transition frequency");
    }
    if (cutoff_left < 2 || cutoff_right < 2) {
        throw std::invalid_argument("SystemSpec: cutoffs must be >= 2");
    }
}

namespace {

// Lift single-factor operators into the product space, left slowest.
Matrix lift(const Matrix& left, const Matrix& qutrit, const Matrix& right) {
    return kron(left, kron(qutrit, right));
}

} // namespace

Matrix build_full_hamiltonian(const SystemSpec& spec) {
    spec.check();
    const Index nl = spec.cutoff_left;
    const Index nr = spec.cutoff_right;
    const Matrix il = Matrix::Identity(nl, nl);
    const Matrix ir = Matrix::Identity(nr, nr);
    const Matrix iq = Matrix::Identity(3, 3);
    const Matrix a_l = annihilation(nl);
    const Matrix a_r = annihilation(nr);

    Matrix h = Matrix::Zero(spec.space().dim(), spec.space().dim());
    // Free qutrit and free modes.
    Matrix h_qutrit = Matrix::Zero(3, 3);
    h_qutrit(0, 0) = spec.omega_g;
    h_qutrit(1, 1) = spec.omega_e;
    h_qutrit(2, 2) = spec.omega_i;
    h += lift(il, h_qutrit, ir);
    h += spec.omega_left_mode() * lift(a_l.adjoint() * a_l, iq, ir);
    h += spec.omega_right_mode() * lift(il, iq, a_r.adjoint() * a_r);

    // Arm couplings, rotating wave form: sigma_gi a_L^dag + h.c. and
    // sigma_ei a_R^dag + h.c.
    h += spec.omega_l_coupling *
         (lift(a_l.adjoint(), basis_op(3, 0, 2), ir) + lift(a_l, basis_op(3, 2, 0), ir));
    h += spec.omega_r_coupling *
         (lift(il, basis_op(3, 1, 2), a_r.adjoint()) + lift(il, basis_op(3, 2, 1), a_r));

    // Static (M, N) Stark drive on sigma_z = sigma_ee - sigma_gg.
    const double shift = spec.omega_r_coupling * spec.omega_r_coupling / spec.delta *
                             (spec.drive_N + 1.0) -
                         spec.omega_l_coupling * spec.omega_l_coupling / spec.delta * spec.drive_M;
    h += shift * lift(il, basis_op(3, 1, 1) - basis_op(3, 0, 0), ir);
    return h;
}

Eigen::VectorXd rotating_frame_frequencies(const SystemSpec& spec) {
    const auto space = spec.space();
    Eigen::VectorXd w(space.dim());
    for (Index a = 0; a < space.dim(); ++a) {
        const auto p = space.unflat(a);
        double level = spec.omega_g;
        if (p.j == 1) level = spec.omega_e;
        if (p.j == 2) level = spec.omega_i - spec.delta;   // shifted so the arms go static
        w(a) = level + p.m * spec.omega_left_mode() + p.n * spec.omega_right_mode();
    }
    return w;
}

Matrix build_rotating_hamiltonian(const SystemSpec& spec) {
    Matrix h = build_full_hamiltonian(spec);
    const Eigen::VectorXd w = rotating_frame_frequencies(spec);
    for (Index a = 0; a < h.rows(); ++a) h(a, a) -= w(a);
    return h;
}

Matrix excitation_operator(const SystemSpec& spec) {
    const auto space = spec.space();
    Matrix n = Matrix::Zero(space.dim(), space.dim());
    for (Index a = 0; a < space.dim(); ++a) {
        const auto p = space.unflat(a);
        n(a, a) = static_cast<double>(p.m + p.n) + (p.j == 2 ? 1.0 : 0.0);
    }
    return n;
}

FullPropagator::FullPropagator(const SystemSpec& spec) : spec_(spec) {
    const Matrix h = build_full_hamiltonian(spec);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("FullPropagator: eigendecomposition failed");
    }
    evals_ = es.eigenvalues();
    evecs_ = es.eigenvectors();
}

DensityMatrix FullPropagator::evolve(const DensityMatrix& rho, double t) const {
    if (rho.dim() != evecs_.rows()) {
        throw std::invalid_argument("FullPropagator: state dimension mismatch");
    }
    hilbert::Vector phases(evals_.size());
    for (Index k = 0; k < evals_.size(); ++k) phases(k) = std::polar(1.0, -evals_(k) * t);
    const Matrix u = evecs_ * phases.asDiagonal() * evecs_.adjoint();
    return DensityMatrix(u * rho.rho * u.adjoint());
}

DensityMatrix evolve_full(const DensityMatrix& rho, double t, const SystemSpec& spec) {
    return FullPropagator(spec).evolve(rho, t);
}

DispersiveResidual dispersive_residual(const SystemSpec& spec, const DensityMatrix& initial,
                                       const std::vector<double>& t_grid) {
    const auto space = spec.space();
    if (initial.dim() != space.dim()) {
        throw std::invalid_argument("dispersive_residual: state does not match spec space");
    }
    const FullPropagator full(spec);
    const effective::EffectiveEvolver eff(space, spec.effective_params());

    DispersiveResidual res;
    for (double t : t_grid) {
        const auto rep_full = observables::energy_report(full.evolve(initial, t), space);
        const auto rep_eff = observables::energy_report(eff.evolve(initial, t), space);
        res.max_dev_p_g = std::max(res.max_dev_p_g, std::abs(rep_full.p_g - rep_eff.p_g));
        res.max_dev_p_e = std::max(res.max_dev_p_e, std::abs(rep_full.p_e - rep_eff.p_e));
        res.max_dev_n_left =
            std::max(res.max_dev_n_left, std::abs(rep_full.n_left - rep_eff.n_left));
        res.max_dev_n_right =
            std::max(res.max_dev_n_right, std::abs(rep_full.n_right - rep_eff.n_right));
        res.max_population_i = std::max(res.max_population_i, rep_full.p_i);
        res.p_e_full.push_back(rep_full.p_e);
        res.p_e_eff.push_back(rep_eff.p_e);
        res.p_g_full.push_back(rep_full.p_g);
        res.p_g_eff.push_back(rep_eff.p_g);
        res.p_i_full.push_back(rep_full.p_i);
    }
    return res;
}

} // namespace qbc::fulldyn
