// hilbert.hpp — Truncated-Fock-space linear algebra: ladder operators, tensor
// products, partial traces and Hermitian matrix exponentials. Everything else
// in the library is built on top of these primitives.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <vector>

namespace qbc::hilbert {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

// ------------------------------ product index --------------------------------

// Basis label |m, j, n>: m photons in the left mode, qutrit (or qubit) level j
// with g = 0, e = 1, i = 2, n photons in the right mode.
struct ProductIndex {
    Index m{0};
    Index j{0};
    Index n{0};
};

// Fixed flat ordering of the L (x) qutrit (x) R product space: left mode
// slowest, qutrit middle, right mode fastest. This matches
// kron(A_L, kron(A_q, A_R)) and is the single source of truth for index
// arithmetic everywhere in the library.
struct ProductSpace {
    Index n_left{0};
    Index n_qutrit{0};   // 2 for the effective qubit, 3 for the full qutrit
    Index n_right{0};

    ProductSpace() = default;
    ProductSpace(Index nl, Index nq, Index nr) : n_left(nl), n_qutrit(nq), n_right(nr) {
        if (nl < 1 || nq < 1 || nr < 1) {
            throw std::invalid_argument("ProductSpace: all factor dimensions must be >= 1");
        }
    }

    Index dim() const { return n_left * n_qutrit * n_right; }

    Index flat(Index m, Index j, Index n) const {
        return (m * n_qutrit + j) * n_right + n;
    }
    Index flat(const ProductIndex& p) const { return flat(p.m, p.j, p.n); }

    ProductIndex unflat(Index a) const {
        ProductIndex p;
        p.n = a % n_right;
        a /= n_right;
        p.j = a % n_qutrit;
        p.m = a / n_qutrit;
        return p;
    }
};

// ------------------------------ density matrix -------------------------------

// Dense complex Hermitian matrix with unit trace; the universal state carrier.
// Validation is explicit (validate()) so that hot loops can skip the O(d^3)
// eigenvalue check and tests can demand it.
struct DensityMatrix {
    Matrix rho;

    DensityMatrix() = default;
    explicit DensityMatrix(Matrix m) : rho(std::move(m)) {
        if (rho.rows() != rho.cols()) {
            throw std::invalid_argument("DensityMatrix: matrix must be square");
        }
    }

    Index dim() const { return rho.rows(); }
    double trace_real() const { return rho.trace().real(); }

    // Throws unless Hermitian within herm_tol, trace within trace_tol of 1 and
    // min eigenvalue >= eig_floor.
    void validate(double herm_tol = 1e-12, double trace_tol = 1e-10,
                  double eig_floor = -1e-8) const;
};

// |k><k| as a density matrix on a dim-dimensional space.
DensityMatrix fock_projector(Index dim, Index k);

// ------------------------------ operations -----------------------------------

// Annihilation operator on a truncated Fock space: <n-1|a|n> = sqrt(n).
Matrix annihilation(Index cutoff);

// Creation operator, adjoint of annihilation.
Matrix creation(Index cutoff);

// Number operator a^dag a (diagonal 0, 1, ..., cutoff-1).
Matrix number_operator(Index cutoff);

// |i><j| on a dim-dimensional space.
Matrix basis_op(Index dim, Index i, Index j);

// Kronecker product with the ProductSpace ordering (first factor slowest).
Matrix kron(const Matrix& a, const Matrix& b);

// Reduced density matrix over the kept subsystems. dims lists the factor
// dimensions in flat order (slowest first); keep lists the indices into dims
// that survive, in ascending order. Trace is preserved.
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep,
                            const std::vector<Index>& dims);

// U = exp(-i H t) for Hermitian H, via eigendecomposition. Throws if H is not
// Hermitian within 1e-12 (relative to its largest entry).
Matrix expm_hermitian(const Matrix& h, double t);

// max |A - A^dag| over all entries.
double hermiticity_defect(const Matrix& a);

} // namespace qbc::hilbert
