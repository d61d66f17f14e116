#include "qbc/observables.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace qbc::observables {

double qubit_energy(const DensityMatrix& rho_q) {
    const Index d = rho_q.dim();
    if (d != 2 && d != 3) {
        throw std::invalid_argument("qubit_energy: expected a 2- or 3-level state");
    }
    return rho_q.rho(1, 1).real() - rho_q.rho(0, 0).real();
}

double von_neumann_entropy(const DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho.rho + rho.rho.adjoint()),
                                             Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("von_neumann_entropy: eigendecomposition failed");
    }
    double s = 0.0;
    for (Index k = 0; k < es.eigenvalues().size(); ++k) {
        double lam = es.eigenvalues()(k);
        if (lam < -1e-6) {
            throw std::runtime_error("von_neumann_entropy: eigenvalue " + std::to_string(lam) +
                                     " below -1e-6 floor");
        }
        if (lam <= 0.0) continue;   // 0 ln 0 := 0, small negatives clamped
        s -= lam * std::log(lam);
    }
    return s;
}

double mutual_information(const DensityMatrix& rho_ab, Index dim_a, Index dim_b) {
    if (dim_a * dim_b != rho_ab.dim()) {
        throw std::invalid_argument("mutual_information: dims do not match state");
    }
    const auto rho_a = hilbert::partial_trace(rho_ab, {0}, {dim_a, dim_b});
    const auto rho_b = hilbert::partial_trace(rho_ab, {1}, {dim_a, dim_b});
    return von_neumann_entropy(rho_a) + von_neumann_entropy(rho_b) -
           von_neumann_entropy(rho_ab);
}

double purity(const DensityMatrix& rho) {
    return (rho.rho * rho.rho).trace().real();
}

double mean_excitation(const DensityMatrix& rho) {
    double n = 0.0;
    for (Index k = 0; k < rho.dim(); ++k) {
        n += static_cast<double>(k) * rho.rho(k, k).real();
    }
    return n;
}

EnergyReport energy_report(const DensityMatrix& rho, const ProductSpace& space) {
    if (rho.dim() != space.dim()) {
        throw std::invalid_argument("energy_report: state does not match space");
    }
    EnergyReport rep;
    for (Index a = 0; a < space.dim(); ++a) {
        const auto p = space.unflat(a);
        const double w = rho.rho(a, a).real();
        if (p.j == 0) rep.p_g += w;
        else if (p.j == 1) rep.p_e += w;
        else rep.p_i += w;
        rep.n_left += static_cast<double>(p.m) * w;
        rep.n_right += static_cast<double>(p.n) * w;
    }
    rep.u_q = rep.p_e - rep.p_g;
    return rep;
}

} // namespace qbc::observables
