#include "qbc/lindblad.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace qbc::lindblad {

using hilbert::Complex;
using hilbert::ProductSpace;

double bose_einstein(double omega_bar, double tbar) {
    if (omega_bar <= 0.0) throw std::invalid_argument("bose_einstein: frequency must be > 0");
    if (tbar < 0.0) throw std::invalid_argument("bose_einstein: temperature must be >= 0");
    if (tbar == 0.0) return 0.0;
    return 1.0 / std::expm1(omega_bar / tbar);
}

std::vector<ThermalChannel> thermal_channels(const SystemSpec& spec,
                                             const DissipationSpec& diss) {
    spec.check();
    if (diss.gamma0 < 0.0) throw std::invalid_argument("thermal_channels: gamma0 must be >= 0");
    const double gamma_abs =
        diss.gamma0_absolute ? diss.gamma0
                             : diss.gamma0 * spec.effective_params().lambda_eff;

    const Index nl = spec.cutoff_left;
    const Index nr = spec.cutoff_right;
    const Matrix il = Matrix::Identity(nl, nl);
    const Matrix ir = Matrix::Identity(nr, nr);
    const Matrix iq = Matrix::Identity(3, 3);

    auto make = [&](const std::string& name, double omega, Matrix lower) {
        ThermalChannel ch;
        ch.transition = name;
        ch.omega = omega;
        ch.lower = std::move(lower);
        const double nbar = bose_einstein(omega, diss.tbar);
        ch.rate_up = gamma_abs * nbar;
        ch.rate_down = gamma_abs * (nbar + 1.0);
        return ch;
    };

    std::vector<ThermalChannel> chans;
    chans.push_back(make("ig", spec.omega_ig(),
                         hilbert::kron(il, hilbert::kron(hilbert::basis_op(3, 0, 2), ir))));
    chans.push_back(make("ie", spec.omega_ie(),
                         hilbert::kron(il, hilbert::kron(hilbert::basis_op(3, 1, 2), ir))));
    chans.push_back(make("L", spec.omega_left_mode(),
                         hilbert::kron(hilbert::annihilation(nl), hilbert::kron(iq, ir))));
    chans.push_back(make("R", spec.omega_right_mode(),
                         hilbert::kron(il, hilbert::kron(iq, hilbert::annihilation(nr)))));
    if (diss.include_eg_channel) {
        chans.push_back(make("eg", spec.omega_eg(),
                             hilbert::kron(il, hilbert::kron(hilbert::basis_op(3, 0, 1), ir))));
    }
    return chans;
}

namespace {

// Sparse operator as coordinate triplets; all products below are applied
// column-by-column so both sides stay cache resident.
struct SparseOp {
    std::vector<Index> row, col;
    std::vector<Complex> val;

    static SparseOp from_dense(const Matrix& m, double tol = 0.0) {
        SparseOp op;
        for (Index c = 0; c < m.cols(); ++c) {
            for (Index r = 0; r < m.rows(); ++r) {
                if (std::abs(m(r, c)) > tol) {
                    op.row.push_back(r);
                    op.col.push_back(c);
                    op.val.push_back(m(r, c));
                }
            }
        }
        return op;
    }
    std::size_t nnz() const { return val.size(); }
};

// out += scale * A * x  (per-column scatter)
void add_left_mul(const SparseOp& a, const Matrix& x, Matrix& out, double scale) {
    const Index d = x.cols();
    for (Index c = 0; c < d; ++c) {
        const Complex* xc = x.col(c).data();
        Complex* oc = out.col(c).data();
        for (std::size_t k = 0; k < a.nnz(); ++k) {
            oc[a.row[k]] += scale * a.val[k] * xc[a.col[k]];
        }
    }
}

// out = X * A^dag  (column axpys)
void set_right_mul_adj(const SparseOp& a, const Matrix& x, Matrix& out) {
    out.setZero();
    for (std::size_t k = 0; k < a.nnz(); ++k) {
        out.col(a.row[k]) += std::conj(a.val[k]) * x.col(a.col[k]);
    }
}

// out = X * A  (column axpys)
void set_right_mul(const SparseOp& a, const Matrix& x, Matrix& out) {
    out.setZero();
    for (std::size_t k = 0; k < a.nnz(); ++k) {
        out.col(a.col[k]) += a.val[k] * x.col(a.row[k]);
    }
}

// Precompiled generator for one frame choice.
class Generator {
public:
    Generator(const Matrix& h, const std::vector<ThermalChannel>& channels) {
        dim_ = h.rows();
        h_op_ = SparseOp::from_dense(h, 1e-300);
        g_diag_ = Eigen::VectorXd::Zero(dim_);
        for (const auto& ch : channels) {
            if (ch.rate_down > 0.0) push_jump(ch.lower, ch.rate_down);
            if (ch.rate_up > 0.0) push_jump(ch.lower.adjoint(), ch.rate_up);
        }
        // Gershgorin bound on the spectral radius of the stepped Hamiltonian.
        Eigen::VectorXd radius = Eigen::VectorXd::Zero(dim_);
        for (std::size_t k = 0; k < h_op_.nnz(); ++k) {
            radius(h_op_.row[k]) += std::abs(h_op_.val[k]);
        }
        h_bound_ = radius.size() ? radius.maxCoeff() : 0.0;
    }

    Index dim() const { return dim_; }
    double hamiltonian_bound() const { return h_bound_; }

    // drho = -i [H, s] + sum_k rate_k (l s l^dag) - 1/2 {G, s}, G diagonal.
    // Assumes s Hermitian (true for every RK4 stage).
    void rhs(const Matrix& s, Matrix& out, Matrix& work) const {
        set_right_mul(h_op_, s, work);                         // work = s H
        out = Complex(0.0, -1.0) * (work.adjoint() - work);    // -i (H s - s H)
        for (const auto& [op, rate] : jumps_) {
            set_right_mul_adj(op, s, work);                    // work = s l^dag
            add_left_mul(op, work, out, rate);                 // out += rate l s l^dag
        }
        for (Index c = 0; c < dim_; ++c) {
            const double gc = g_diag_(c);
            Complex* oc = out.col(c).data();
            const Complex* sc = s.col(c).data();
            for (Index r = 0; r < dim_; ++r) {
                oc[r] -= 0.5 * (g_diag_(r) + gc) * sc[r];
            }
        }
    }

private:
    void push_jump(const Matrix& lower, double rate) {
        jumps_.emplace_back(SparseOp::from_dense(lower, 1e-300), rate);
        const Matrix ldl = lower.adjoint() * lower;
        for (Index k = 0; k < dim_; ++k) g_diag_(k) += rate * ldl(k, k).real();
        // Every jump operator here is a ladder or level projector product, so
        // l^dag l is diagonal; guard against someone feeding something else.
        if ((ldl - Matrix(ldl.diagonal().asDiagonal())).cwiseAbs().maxCoeff() > 1e-14) {
            throw std::invalid_argument("lindblad: jump operator with non-diagonal l^dag l");
        }
    }

    Index dim_{0};
    SparseOp h_op_;
    std::vector<std::pair<SparseOp, double>> jumps_;
    Eigen::VectorXd g_diag_;
    double h_bound_{0.0};
};

} // namespace

Matrix lindblad_rhs(const DensityMatrix& rho, const SystemSpec& spec,
                    const DissipationSpec& diss) {
    if (rho.dim() != spec.space().dim()) {
        throw std::invalid_argument("lindblad_rhs: state does not match spec space");
    }
    const Matrix h = fulldyn::build_full_hamiltonian(spec);
    const Generator gen(h, thermal_channels(spec, diss));
    Matrix out(rho.dim(), rho.dim()), work(rho.dim(), rho.dim());
    gen.rhs(rho.rho, out, work);
    return out;
}

namespace {

void run_fixed_step(const Generator& gen, const Eigen::VectorXd& frame_w, Matrix sigma,
                    const std::vector<double>& t_grid, double h,
                    const IntegrateOptions& opts,
                    const std::function<void(std::size_t, double, const DensityMatrix&)>& cb) {
    const Index d = gen.dim();
    Matrix k1(d, d), k2(d, d), k3(d, d), k4(d, d), stage(d, d), work(d, d);
    double t = 0.0;

    auto emit = [&](std::size_t idx, double tg) {
        Matrix lab = sigma;
        if (frame_w.size() > 0) {
            for (Index c = 0; c < d; ++c) {
                for (Index r = 0; r < d; ++r) {
                    lab(r, c) *= std::polar(1.0, -(frame_w(r) - frame_w(c)) * tg);
                }
            }
        }
        cb(idx, tg, DensityMatrix(std::move(lab)));
    };

    for (std::size_t gi = 0; gi < t_grid.size(); ++gi) {
        const double span = t_grid[gi] - t;
        if (span < -1e-12) throw std::invalid_argument("integrate: t_grid must be non-decreasing");
        if (span > 1e-12) {
            const int nsteps = std::max(1, static_cast<int>(std::ceil(span / h)));
            const double hs = span / nsteps;
            for (int s = 0; s < nsteps; ++s) {
                const double trace_before = sigma.trace().real();
                gen.rhs(sigma, k1, work);
                stage = sigma + (0.5 * hs) * k1;
                gen.rhs(stage, k2, work);
                stage = sigma + (0.5 * hs) * k2;
                gen.rhs(stage, k3, work);
                stage = sigma + hs * k3;
                gen.rhs(stage, k4, work);
                sigma += (hs / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                sigma = 0.5 * (sigma + sigma.adjoint().eval());
                if (std::abs(sigma.trace().real() - trace_before) > opts.trace_drift_tol) {
                    throw std::runtime_error("drift");
                }
            }
            t = t_grid[gi];
        }
        emit(gi, t_grid[gi]);
    }
}

} // namespace

void integrate_observed(const DensityMatrix& rho0, const std::vector<double>& t_grid,
                        const SystemSpec& spec, const DissipationSpec& diss,
                        const std::function<void(std::size_t, double, const DensityMatrix&)>& cb,
                        const IntegrateOptions& opts) {
    spec.check();
    const Index d = spec.space().dim();
    if (rho0.dim() != d) throw std::invalid_argument("integrate: state does not match spec space");
    if (d > 700) {
        throw std::invalid_argument("integrate: state dimension " + std::to_string(d) +
                                    " exceeds the supported desk scale (~700)");
    }
    if (t_grid.empty()) return;
    if (t_grid.front() < 0.0) throw std::invalid_argument("integrate: times must be >= 0");

    const Matrix h = opts.use_rotating_frame ? fulldyn::build_rotating_hamiltonian(spec)
                                             : fulldyn::build_full_hamiltonian(spec);
    const auto channels = thermal_channels(spec, diss);
    const Generator gen(h, channels);
    const Eigen::VectorXd frame_w =
        opts.use_rotating_frame ? fulldyn::rotating_frame_frequencies(spec) : Eigen::VectorXd();

    // Step bound: protocol scale, fastest dissipative rate, and the spectral
    // radius of the stepped Hamiltonian.
    double h_step = opts.step_hint;
    if (h_step <= 0.0) {
        h_step = t_grid.back() > 0.0 ? t_grid.back() : 1.0;
        const double lam = (spec.omega_l_coupling > 0.0 && spec.omega_r_coupling > 0.0)
                               ? spec.effective_params().lambda_eff
                               : 0.0;
        if (lam > 0.0) h_step = std::min(h_step, 0.01 / lam);
        double nbar_max = 0.0;
        double gamma_abs = 0.0;
        for (const auto& ch : channels) {
            nbar_max = std::max(nbar_max, bose_einstein(ch.omega, std::max(diss.tbar, 0.0)));
            gamma_abs = std::max(gamma_abs, ch.rate_down);
        }
        const double dim_factor =
            static_cast<double>(std::max(spec.cutoff_left, spec.cutoff_right));
        if (gamma_abs > 0.0) h_step = std::min(h_step, 0.1 / (gamma_abs * dim_factor));
        if (gen.hamiltonian_bound() > 0.0) {
            h_step = std::min(h_step, opts.accuracy_factor / gen.hamiltonian_bound());
        }
    }

    // Positivity audit points: first, middle and last grid entries.
    const std::size_t mid = t_grid.size() / 2;
    auto wrapped = [&](std::size_t idx, double t, const DensityMatrix& rho_lab) {
        if (std::abs(rho_lab.trace_real() - 1.0) > 1e-7) {
            throw std::runtime_error("integrate: accumulated trace drift at t = " +
                                     std::to_string(t));
        }
        if (opts.check_positivity &&
            (idx == 0 || idx == mid || idx + 1 == t_grid.size())) {
            Eigen::SelfAdjointEigenSolver<Matrix> es(rho_lab.rho, Eigen::EigenvaluesOnly);
            if (es.info() == Eigen::Success && es.eigenvalues().minCoeff() < opts.eig_floor) {
                throw std::runtime_error("integrate: negative eigenvalue " +
                                         std::to_string(es.eigenvalues().minCoeff()));
            }
        }
        cb(idx, t, rho_lab);
    };

    for (int attempt = 0;; ++attempt) {
        try {
            run_fixed_step(gen, frame_w, rho0.rho, t_grid, h_step, opts, wrapped);
            return;
        } catch (const std::runtime_error& e) {
            if (std::string(e.what()) != "drift" || attempt >= opts.max_halvings) {
                if (std::string(e.what()) == "drift") {
                    throw std::runtime_error(
                        "integrate: trace drift bound not met after halving retries");
                }
                throw;
            }
            h_step *= 0.5;
        }
    }
}

std::vector<DensityMatrix> integrate(const DensityMatrix& rho0,
                                     const std::vector<double>& t_grid, const SystemSpec& spec,
                                     const DissipationSpec& diss, const IntegrateOptions& opts) {
    std::vector<DensityMatrix> out(t_grid.size());
    integrate_observed(
        rho0, t_grid, spec, diss,
        [&](std::size_t idx, double, const DensityMatrix& rho) { out[idx] = rho; }, opts);
    return out;
}

} // namespace qbc::lindblad
