#include "qbc/effective.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qbc::effective {

EffectiveParams EffectiveParams::from_couplings(double omega_l, double omega_r, double delta,
                                                int m, int n) {
    if (omega_l <= 0.0 || omega_r <= 0.0) {
        throw std::invalid_argument("EffectiveParams: couplings must be > 0");
    }
    if (delta <= 0.0) throw std::invalid_argument("EffectiveParams: detuning must be > 0");
    EffectiveParams p;
    p.omega_L_coupling = omega_l;
    p.omega_R_coupling = omega_r;
    p.detuning = delta;
    p.chi = omega_r / omega_l;
    p.lambda_eff = omega_l * omega_r / delta;
    p.drive_M = m;
    p.drive_N = n;
    return p;
}

EffectiveParams EffectiveParams::from_ratio(double chi, double lambda, int m, int n,
                                            double delta) {
    if (chi <= 0.0) throw std::invalid_argument("EffectiveParams: chi must be > 0");
    if (lambda <= 0.0) throw std::invalid_argument("EffectiveParams: lambda_eff must be > 0");
    if (delta <= 0.0) throw std::invalid_argument("EffectiveParams: detuning must be > 0");
    return from_couplings(std::sqrt(lambda * delta / chi), std::sqrt(lambda * delta * chi),
                          delta, m, n);
}

bool EffectiveParams::dispersive() const {
    return detuning >= 10.0 * std::max(omega_L_coupling, omega_R_coupling);
}

void EffectiveParams::check() const {
    const double lam = omega_L_coupling * omega_R_coupling / detuning;
    if (std::abs(lam - lambda_eff) > 1e-12 * std::max(1.0, std::abs(lambda_eff))) {
        throw std::runtime_error("EffectiveParams: lambda_eff inconsistent with couplings");
    }
    const double ratio = omega_R_coupling / omega_L_coupling;
    if (std::abs(ratio - chi) > 1e-12 * std::max(1.0, std::abs(chi))) {
        throw std::runtime_error("EffectiveParams: chi inconsistent with couplings");
    }
}

double doublet_detuning(Index m, Index n, const EffectiveParams& p) {
    if (m < 1 || n < 0) throw std::invalid_argument("doublet_detuning: requires m >= 1, n >= 0");
    return p.lambda_eff * ((static_cast<double>(m) - p.drive_M) / p.chi -
                           p.chi * (static_cast<double>(n) - p.drive_N));
}

double doublet_rabi(Index m, Index n, const EffectiveParams& p) {
    const double d = doublet_detuning(m, n, p);
    const double g2 = 4.0 * static_cast<double>(m) * static_cast<double>(n + 1) *
                      p.lambda_eff * p.lambda_eff;
    return std::sqrt(g2 + d * d);
}

DoubletAmplitudes amplitudes(Index m, Index n, double t, const EffectiveParams& p) {
    DoubletAmplitudes amp;
    amp.m = m;
    amp.n = n;
    amp.delta_mn = doublet_detuning(m, n, p);
    amp.omega_mn = doublet_rabi(m, n, p);
    const double half = 0.5 * amp.omega_mn * t;
    const double c = std::cos(half);
    const double s = std::sin(half);
    const double ratio = amp.delta_mn / amp.omega_mn;
    amp.a = Complex(c, ratio * s);
    amp.b = Complex(0.0, std::sqrt(std::max(0.0, 1.0 - ratio * ratio)) * s);
    return amp;
}

double optimal_tau(Index m, Index n, const EffectiveParams& p) {
    return std::numbers::pi / doublet_rabi(m, n, p);
}

std::pair<double, double> selective_eigenvalues(Index m, Index n, const EffectiveParams& p) {
    if (m < 1) throw std::invalid_argument("selective_eigenvalues: requires m >= 1");
    const double e_g = (static_cast<double>(p.drive_M) - static_cast<double>(m)) / p.chi;
    const double e_e = p.chi * (static_cast<double>(p.drive_N) - static_cast<double>(n));
    return {e_g, e_e};
}

EffectiveEvolver::EffectiveEvolver(const ProductSpace& space, const EffectiveParams& p)
    : space_(space), params_(p) {
    if (space.n_qutrit != 2 && space.n_qutrit != 3) {
        throw std::invalid_argument("EffectiveEvolver: middle factor must have 2 or 3 levels");
    }
    p.check();
    const double lam = p.lambda_eff;
    blocks_.resize(static_cast<size_t>(space.dim()));
    for (Index a = 0; a < space.dim(); ++a) {
        const auto idx = space.unflat(a);
        BlockInfo info;
        if (idx.j == 2) {
            // Level i only picks up the dispersive Stark phase.
            info.energy = lam * (static_cast<double>(idx.m + 1) / p.chi +
                                 p.chi * static_cast<double>(idx.n + 1));
        } else if (idx.j == 0) {
            if (idx.m >= 1 && idx.n + 1 < space.n_right) {
                info.partner = space.flat(idx.m - 1, 1, idx.n + 1);
                info.m = idx.m;
                info.n = idx.n;
                info.is_upper = true;
            } else {
                // Trivial eigenstate |0,g,n> or truncation edge: phase only.
                info.energy = lam * (static_cast<double>(p.drive_M) - idx.m) / p.chi;
            }
        } else {
            if (idx.n >= 1 && idx.m + 1 < space.n_left) {
                info.partner = space.flat(idx.m + 1, 0, idx.n - 1);
                info.m = idx.m + 1;
                info.n = idx.n - 1;
                info.is_upper = false;
            } else {
                // Trivial eigenstate |m,e,0> or truncation edge: phase only.
                info.energy = lam * p.chi * (static_cast<double>(p.drive_N) + 1.0 - idx.n);
            }
        }
        blocks_[static_cast<size_t>(a)] = info;
    }
}

DensityMatrix EffectiveEvolver::evolve(const DensityMatrix& rho, double t) const {
    const Index d = space_.dim();
    if (rho.dim() != d) {
        throw std::invalid_argument("EffectiveEvolver: state dimension does not match space");
    }
    Matrix work = rho.rho;
    if (space_.n_qutrit == 3) {
        // The dispersive reduction decouples level i from the qubit subspace;
        // cross coherences are dropped at the module boundary.
        for (Index a = 0; a < d; ++a) {
            const bool ai = space_.unflat(a).j == 2;
            for (Index b = 0; b < d; ++b) {
                if (ai != (space_.unflat(b).j == 2)) work(a, b) = Complex(0.0, 0.0);
            }
        }
    }

    // Per-column amplitudes of the sparse unitary: U(:,a) touches a and its
    // partner only.
    hilbert::Vector diag_amp(d);
    hilbert::Vector off_amp = hilbert::Vector::Zero(d);
    const double lam = params_.lambda_eff;
    for (Index a = 0; a < d; ++a) {
        const auto& info = blocks_[static_cast<size_t>(a)];
        if (info.partner < 0) {
            diag_amp(a) = std::polar(1.0, -info.energy * t);
            continue;
        }
        const auto [e_g, e_e] = selective_eigenvalues(info.m, info.n, params_);
        const double mean_energy = 0.5 * lam * (e_g + e_e);
        const Complex phase = std::polar(1.0, -mean_energy * t);
        const auto amp = amplitudes(info.m, info.n, t, params_);
        diag_amp(a) = phase * (info.is_upper ? amp.a : std::conj(amp.a));
        off_amp(a) = phase * amp.b;
    }

    // X = U rho, then rho' = X U^dag; both touch at most two rows/columns.
    Matrix x(d, d);
    for (Index a = 0; a < d; ++a) {
        const auto& info = blocks_[static_cast<size_t>(a)];
        if (info.partner < 0) {
            x.row(a) = diag_amp(a) * work.row(a);
        } else {
            x.row(a) = diag_amp(a) * work.row(a) + off_amp(a) * work.row(info.partner);
        }
    }
    Matrix out(d, d);
    for (Index c = 0; c < d; ++c) {
        const auto& info = blocks_[static_cast<size_t>(c)];
        if (info.partner < 0) {
            out.col(c) = std::conj(diag_amp(c)) * x.col(c);
        } else {
            out.col(c) = std::conj(diag_amp(c)) * x.col(c) +
                         std::conj(off_amp(c)) * x.col(info.partner);
        }
    }
    return DensityMatrix(std::move(out));
}

DensityMatrix evolve_effective(const DensityMatrix& rho, const ProductSpace& space, double t,
                               const EffectiveParams& p) {
    return EffectiveEvolver(space, p).evolve(rho, t);
}

namespace {

void check_normalized(const Eigen::VectorXd& pop, const char* who) {
    if (pop.size() == 0) throw std::invalid_argument(std::string(who) + ": empty populations");
    if (pop.minCoeff() < -1e-12) {
        throw std::invalid_argument(std::string(who) + ": negative population");
    }
    if (std::abs(pop.sum() - 1.0) > 1e-10) {
        throw std::invalid_argument(std::string(who) + ": populations not normalized");
    }
}

} // namespace

double delta_U_q(const Eigen::VectorXd& p_left, const QubitPopulations& pq,
                 const Eigen::VectorXd& p_right, double tau, const EffectiveParams& p) {
    check_normalized(p_left, "delta_U_q: left mode");
    check_normalized(p_right, "delta_U_q: right mode");
    const Eigen::MatrixXd s = raw_energy_matrix(p_left, pq, p_right);
    double sum = 0.0;
    for (Index r = 0; r < s.rows(); ++r) {
        for (Index c = 0; c < s.cols(); ++c) {
            if (s(r, c) == 0.0) continue;
            const Index m = r + 1;
            const Index n = c;
            const double det = doublet_detuning(m, n, p);
            const double omega = doublet_rabi(m, n, p);
            const double ratio = det / omega;
            const double sin_half = std::sin(0.5 * omega * tau);
            sum += s(r, c) * (1.0 - ratio * ratio) * sin_half * sin_half;
        }
    }
    return 2.0 * sum;
}

Eigen::MatrixXd raw_energy_matrix(const Eigen::VectorXd& p_left, const QubitPopulations& pq,
                                  const Eigen::VectorXd& p_right) {
    const Index nl = p_left.size();
    const Index nr = p_right.size();
    // Rows cover m = 1 .. nl so that the m-1 shifted term sees the whole left
    // distribution; entries beyond the stored ranges count as zero.
    Eigen::MatrixXd s(nl, nr);
    for (Index r = 0; r < nl; ++r) {
        const Index m = r + 1;
        for (Index n = 0; n < nr; ++n) {
            const double gain = (m < nl) ? p_left(m) * pq.p_g * p_right(n) : 0.0;
            const double loss = (n + 1 < nr) ? p_left(m - 1) * pq.p_e * p_right(n + 1) : 0.0;
            s(r, n) = gain - loss;
        }
    }
    return s;
}

} // namespace qbc::effective
