#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qbc/hilbert.hpp"
#include "test_util.hpp"

#include <cmath>
#include <numbers>

using namespace qbc;
using hilbert::Complex;
using hilbert::DensityMatrix;
using hilbert::Index;
using hilbert::Matrix;

TEST_CASE("annihilation operator entries") {
    const Matrix a2 = hilbert::annihilation(2);
    CHECK(a2(0, 1).real() == doctest::Approx(1.0));
    CHECK(a2(0, 0) == Complex(0.0, 0.0));
    CHECK(a2(1, 0) == Complex(0.0, 0.0));
    CHECK(a2(1, 1) == Complex(0.0, 0.0));

    const Matrix a3 = hilbert::annihilation(3);
    CHECK(a3(1, 2).real() == doctest::Approx(std::sqrt(2.0)));

    // a^dag a is the number operator.
    const Matrix n = a3.adjoint() * a3;
    for (Index k = 0; k < 3; ++k) {
        CHECK(n(k, k).real() == doctest::Approx(static_cast<double>(k)));
    }
    CHECK_THROWS_AS(hilbert::annihilation(1), std::invalid_argument);
}

TEST_CASE("kron identities") {
    const Matrix i2 = Matrix::Identity(2, 2);
    const Matrix i3 = Matrix::Identity(3, 3);
    CHECK(test::max_abs_diff(hilbert::kron(i2, i3), Matrix::Identity(6, 6)) == 0.0);

    Matrix d1 = Matrix::Zero(2, 2);
    d1(0, 0) = 1.0;
    Matrix d2 = Matrix::Zero(2, 2);
    d2(1, 1) = 1.0;
    const Matrix k = hilbert::kron(d1, d2);
    CHECK(k(1, 1).real() == doctest::Approx(1.0));
    CHECK(k.trace().real() == doctest::Approx(1.0));

    std::mt19937_64 rng(7);
    const Matrix a = test::random_matrix(3, rng);
    const Matrix b = test::random_matrix(3, rng);
    // Product-trace identity, evaluated directly.
    const Complex expected = a.trace() * b.trace();
    CHECK(std::abs(hilbert::kron(a, b).trace() - expected) < 1e-12);

    const Matrix c = test::random_matrix(2, rng);
    CHECK(test::max_abs_diff(hilbert::kron(hilbert::kron(a, b), c),
                             hilbert::kron(a, hilbert::kron(b, c))) < 1e-12);
}

TEST_CASE("partial trace recovers product factors") {
    std::mt19937_64 rng(11);
    const auto rho_a = test::random_density(3, rng);
    const auto rho_b = test::random_density(4, rng);
    const DensityMatrix joint(hilbert::kron(rho_a.rho, rho_b.rho));

    const auto back_a = hilbert::partial_trace(joint, {0}, {3, 4});
    const auto back_b = hilbert::partial_trace(joint, {1}, {3, 4});
    CHECK(test::max_abs_diff(back_a.rho, rho_a.rho) < 1e-12);
    CHECK(test::max_abs_diff(back_b.rho, rho_b.rho) < 1e-12);
    CHECK(back_a.trace_real() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("partial trace of a Bell state is maximally mixed") {
    Matrix rho = Matrix::Zero(4, 4);
    // (|00> + |11>)/sqrt(2)
    rho(0, 0) = 0.5;
    rho(0, 3) = 0.5;
    rho(3, 0) = 0.5;
    rho(3, 3) = 0.5;
    const auto red = hilbert::partial_trace(DensityMatrix(rho), {0}, {2, 2});
    CHECK(test::max_abs_diff(red.rho, 0.5 * Matrix::Identity(2, 2)) < 1e-14);
}

TEST_CASE("partial trace keeps the middle factor of a triple product") {
    std::mt19937_64 rng(13);
    const auto rho_a = test::random_density(2, rng);
    const auto rho_b = test::random_density(3, rng);
    const auto rho_c = test::random_density(2, rng);
    const DensityMatrix joint(
        hilbert::kron(rho_a.rho, hilbert::kron(rho_b.rho, rho_c.rho)));
    const auto mid = hilbert::partial_trace(joint, {1}, {2, 3, 2});
    CHECK(test::max_abs_diff(mid.rho, rho_b.rho) < 1e-12);

    // Tracing the factors one at a time in either order gives the same result.
    const auto via_ab = hilbert::partial_trace(hilbert::partial_trace(joint, {0, 1}, {2, 3, 2}),
                                               {1}, {2, 3});
    const auto via_bc = hilbert::partial_trace(hilbert::partial_trace(joint, {1, 2}, {2, 3, 2}),
                                               {0}, {3, 2});
    CHECK(test::max_abs_diff(via_ab.rho, via_bc.rho) < 1e-12);

    CHECK_THROWS_AS(hilbert::partial_trace(joint, {0}, {2, 2}), std::invalid_argument);
    CHECK_THROWS_AS(hilbert::partial_trace(joint, {}, {2, 3, 2}), std::invalid_argument);
}

TEST_CASE("expm of zero is the identity") {
    const Matrix h = Matrix::Zero(3, 3);
    CHECK(test::max_abs_diff(hilbert::expm_hermitian(h, 2.5), Matrix::Identity(3, 3)) < 1e-14);
}

TEST_CASE("pi pulse of sigma_x flips sign") {
    Matrix h(2, 2);
    h << 0.0, 1.0, 1.0, 0.0;
    const Matrix u = hilbert::expm_hermitian(h, std::numbers::pi);
    CHECK(test::max_abs_diff(u, -Matrix::Identity(2, 2)) < 1e-10);
}

TEST_CASE("expm matches the closed-form 2x2 rotation") {
    // Independent oracle: exp(-i t (d sz + g sx)) in closed Rabi form.
    const double d = 0.37, g = 1.21, t = 2.9;
    Matrix h(2, 2);
    h << d, g, g, -d;
    const double omega = 2.0 * std::sqrt(d * d + g * g);
    const double half = 0.5 * omega * t;
    Matrix expected(2, 2);
    const Complex ii(0.0, 1.0);
    expected(0, 0) = std::cos(half) - ii * (2.0 * d / omega) * std::sin(half);
    expected(1, 1) = std::cos(half) + ii * (2.0 * d / omega) * std::sin(half);
    expected(0, 1) = -ii * (2.0 * g / omega) * std::sin(half);
    expected(1, 0) = expected(0, 1);
    CHECK(test::max_abs_diff(hilbert::expm_hermitian(h, t), expected) < 1e-12);
}

TEST_CASE("expm is unitary for random Hermitian generators") {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 10; ++rep) {
        const Matrix h = test::random_hermitian(6, rng);
        const Matrix u = hilbert::expm_hermitian(h, 0.3 + 0.4 * rep);
        CHECK(test::max_abs_diff(u.adjoint() * u, Matrix::Identity(6, 6)) < 1e-9);
    }
    Matrix bad(2, 2);
    bad << 0.0, 1.0, 0.0, 0.0;
    CHECK_THROWS_AS(hilbert::expm_hermitian(bad, 1.0), std::invalid_argument);
}

TEST_CASE("product space flat ordering is left slowest") {
    const hilbert::ProductSpace space{4, 3, 5};
    CHECK(space.dim() == 60);
    Index expected = 0;
    for (Index m = 0; m < 4; ++m) {
        for (Index j = 0; j < 3; ++j) {
            for (Index n = 0; n < 5; ++n) {
                CHECK(space.flat(m, j, n) == expected);
                const auto back = space.unflat(expected);
                CHECK(back.m == m);
                CHECK(back.j == j);
                CHECK(back.n == n);
                ++expected;
            }
        }
    }
}

TEST_CASE("density matrix validation catches violations") {
    std::mt19937_64 rng(23);
    const auto good = test::random_density(5, rng);
    CHECK_NOTHROW(good.validate());

    Matrix skew = good.rho;
    skew(0, 1) += Complex(0.0, 1e-6);
    CHECK_THROWS_AS(DensityMatrix(skew).validate(), std::runtime_error);

    Matrix scaled = 1.5 * good.rho;
    CHECK_THROWS_AS(DensityMatrix(scaled).validate(), std::runtime_error);
}
