#include "qbc/hilbert.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>

namespace qbc::hilbert {

void DensityMatrix::validate(double herm_tol, double trace_tol, double eig_floor) const {
    if (rho.rows() != rho.cols() || rho.rows() == 0) {
        throw std::invalid_argument("DensityMatrix: matrix must be square and non-empty");
    }
    const double defect = hermiticity_defect(rho);
    if (defect > herm_tol) {
        throw std::runtime_error("DensityMatrix: Hermiticity defect " + std::to_string(defect));
    }
    const double tr = rho.trace().real();
    if (std::abs(tr - 1.0) > trace_tol) {
        throw std::runtime_error("DensityMatrix: trace deviates from 1 by " +
                                 std::to_string(tr - 1.0));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()),
                                             Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("DensityMatrix: eigenvalue computation failed");
    }
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < eig_floor) {
        throw std::runtime_error("DensityMatrix: negative eigenvalue " + std::to_string(min_eig));
    }
}

DensityMatrix fock_projector(Index dim, Index k) {
    if (k < 0 || k >= dim) throw std::out_of_range("fock_projector: level out of range");
    Matrix m = Matrix::Zero(dim, dim);
    m(k, k) = 1.0;
    return DensityMatrix(std::move(m));
}

Matrix annihilation(Index cutoff) {
    if (cutoff < 2) throw std::invalid_argument("annihilation: cutoff must be >= 2");
    Matrix a = Matrix::Zero(cutoff, cutoff);
    for (Index n = 1; n < cutoff; ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    return a;
}

Matrix creation(Index cutoff) { return annihilation(cutoff).adjoint(); }

Matrix number_operator(Index cutoff) {
    if (cutoff < 2) throw std::invalid_argument("number_operator: cutoff must be >= 2");
    Matrix n = Matrix::Zero(cutoff, cutoff);
    for (Index k = 0; k < cutoff; ++k) n(k, k) = static_cast<double>(k);
    return n;
}

Matrix basis_op(Index dim, Index i, Index j) {
    if (i < 0 || j < 0 || i >= dim || j >= dim) {
        throw std::out_of_range("basis_op: index out of range");
    }
    Matrix m = Matrix::Zero(dim, dim);
    m(i, j) = 1.0;
    return m;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    if (a.size() == 0 || b.size() == 0) {
        throw std::invalid_argument("kron: matrices must be non-empty");
    }
    // Guard against silent Index overflow on absurd inputs.
    if (a.rows() > 1 && b.rows() > (1 << 24) / a.rows()) {
        throw std::invalid_argument("kron: product dimension too large");
    }
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    out = Eigen::kroneckerProduct(a, b);
    return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep,
                            const std::vector<Index>& dims) {
    Index total = 1;
    for (Index d : dims) {
        if (d < 1) throw std::invalid_argument("partial_trace: factor dimensions must be >= 1");
        total *= d;
    }
    if (total != rho.dim()) {
        throw std::invalid_argument("partial_trace: product of dims does not match state dimension");
    }
    if (keep.empty()) throw std::invalid_argument("partial_trace: keep set must be non-empty");
    const int nf = static_cast<int>(dims.size());
    std::vector<bool> kept(nf, false);
    for (int k : keep) {
        if (k < 0 || k >= nf) throw std::invalid_argument("partial_trace: keep index out of range");
        kept[static_cast<size_t>(k)] = true;
    }

    // Strides of each factor in the flat ordering (slowest first).
    std::vector<Index> stride(nf, 1);
    for (int f = nf - 2; f >= 0; --f) stride[f] = stride[f + 1] * dims[f + 1];

    std::vector<int> keep_f, trace_f;
    for (int f = 0; f < nf; ++f) (kept[f] ? keep_f : trace_f).push_back(f);

    Index dim_keep = 1, dim_trace = 1;
    for (int f : keep_f) dim_keep *= dims[f];
    for (int f : trace_f) dim_trace *= dims[f];

    // Map a (kept multi-index, traced multi-index) pair to the original flat index.
    auto flat_of = [&](Index ik, Index it) {
        Index a = 0;
        for (int f = static_cast<int>(keep_f.size()) - 1; f >= 0; --f) {
            const Index d = dims[keep_f[f]];
            a += (ik % d) * stride[keep_f[f]];
            ik /= d;
        }
        for (int f = static_cast<int>(trace_f.size()) - 1; f >= 0; --f) {
            const Index d = dims[trace_f[f]];
            a += (it % d) * stride[trace_f[f]];
            it /= d;
        }
        return a;
    };

    Matrix out = Matrix::Zero(dim_keep, dim_keep);
    for (Index r = 0; r < dim_keep; ++r) {
        for (Index c = 0; c < dim_keep; ++c) {
            Complex sum(0.0, 0.0);
            for (Index t = 0; t < dim_trace; ++t) {
                sum += rho.rho(flat_of(r, t), flat_of(c, t));
            }
            out(r, c) = sum;
        }
    }
    return DensityMatrix(std::move(out));
}

Matrix expm_hermitian(const Matrix& h, double t) {
    if (h.rows() != h.cols()) throw std::invalid_argument("expm_hermitian: matrix must be square");
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if (hermiticity_defect(h) > 1e-12 * scale) {
        throw std::invalid_argument("expm_hermitian: input is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("expm_hermitian: eigendecomposition failed");
    }
    const Eigen::VectorXd& ev = es.eigenvalues();
    Vector phases(ev.size());
    for (Index k = 0; k < ev.size(); ++k) {
        phases(k) = std::polar(1.0, -ev(k) * t);
    }
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

double hermiticity_defect(const Matrix& a) {
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

} // namespace qbc::hilbert
