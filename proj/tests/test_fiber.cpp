#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "stripbloch/fiber.hpp"

#include <complex>
#include <numbers>

using namespace stripbloch;
using cplx = std::complex<double>;
constexpr double pi = std::numbers::pi;

TEST_CASE("delta_k matrix is Hermitian and matches the analytic eigenbasis") {
    oracle::Rng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const int L = rng.integer(1, 5);
        const double k = rng.uniform(-pi, pi);
        const Eigen::MatrixXcd dk = delta_k_matrix(L, k);
        CHECK((dk - dk.adjoint()).norm() < 1e-14);

        const DeltaKEigen eb = delta_k_eigenbasis(L, k);
        // analytic eigenpairs really diagonalize the assembled matrix
        for (int n = 0; n < L; ++n)
            CHECK((dk * eb.vecs.col(n) - eb.evals(n) * eb.vecs.col(n)).norm() < 1e-12);
        CHECK((eb.vecs.adjoint() * eb.vecs - Eigen::MatrixXcd::Identity(L, L)).norm() < 1e-12);
    }
}

TEST_CASE("mode_energy") {
    CHECK(mode_energy(0.0, 0.0, 0, 2) == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK(mode_energy(0.0, 0.0, 1, 2) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(mode_energy(1.0, 0.3, 2, 3) ==
          doctest::Approx(1.0 - 2.0 * std::cos(0.3 + 4.0 * pi / 3.0)).epsilon(1e-15));
}

TEST_CASE("fiber Hamiltonian: L=2, k=0 wraps both y-neighbors onto j=1") {
    StripPotential v;
    v.L = 2;
    v.R = 0;
    v.values = Eigen::MatrixXd::Zero(1, 2);

    FiberState s;
    s.k = 0.0;
    s.x_lo = -2;
    s.amp = Eigen::MatrixXcd::Zero(2, 5);
    s.amp(0, 2) = 1.0; // basis vector at (x=0, j=0)

    const FiberState h = apply_fiber_hamiltonian(s, v);
    CHECK(std::abs(h.amp(0, 1) - 1.0) < 1e-15); // (x=-1, j=0)
    CHECK(std::abs(h.amp(0, 3) - 1.0) < 1e-15); // (x=+1, j=0)
    CHECK(std::abs(h.amp(1, 2) - 2.0) < 1e-15); // (x=0, j=1), both neighbors
    CHECK(std::abs(h.amp(0, 2)) < 1e-15);
    CHECK(std::abs(h.amp(1, 1)) < 1e-15);
}

TEST_CASE("fiber Hamiltonian is Hermitian against random states") {
    oracle::Rng rng(22);
    for (int trial = 0; trial < 20; ++trial) {
        StripPotential v = oracle::random_potential(rng);
        const int L = v.L;
        const double k = rng.uniform(-pi / L, pi / L);
        const int n = 9;
        FiberState a, b;
        a.k = b.k = k;
        a.x_lo = b.x_lo = -4;
        a.amp.resize(L, n);
        b.amp.resize(L, n);
        for (int j = 0; j < L; ++j)
            for (int i = 0; i < n; ++i) {
                a.amp(j, i) = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
                b.amp(j, i) = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
            }
        const FiberState ha = apply_fiber_hamiltonian(a, v);
        const FiberState hb = apply_fiber_hamiltonian(b, v);
        const cplx lhs = (a.amp.conjugate().cwiseProduct(hb.amp)).sum();
        const cplx rhs = (ha.amp.conjugate().cwiseProduct(b.amp)).sum();
        CHECK(std::abs(lhs - rhs) < 1e-12);
    }
}

TEST_CASE("floquet: round trip and Parseval") {
    oracle::Rng rng(33);
    const int L = 3, M = 8, nx = 5;
    Eigen::MatrixXcd psi(nx, L * M);
    for (int i = 0; i < nx; ++i)
        for (int y = 0; y < L * M; ++y)
            psi(i, y) = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));

    const FiberDecomposition dec = floquet_forward(psi, L, -2);
    const Eigen::MatrixXcd back = floquet_inverse(dec);
    CHECK((back - psi).norm() < 1e-12 * psi.norm());

    double fiber_mass = 0.0;
    for (const auto& f : dec.fibers) fiber_mass += f.amp.squaredNorm();
    CHECK(fiber_mass / M == doctest::Approx(psi.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("floquet: plane wave lands on a single fiber") {
    const int L = 2, M = 8, nx = 7;
    const int m0 = 3;
    const double k0 = 2.0 * pi * m0 / (L * M);
    Eigen::MatrixXcd psi = Eigen::MatrixXcd::Zero(nx, L * M);
    for (int y = 0; y < L * M; ++y) psi(4, y) = std::polar(1.0, k0 * y);

    const FiberDecomposition dec = floquet_forward(psi, L, 0);
    for (int m = 0; m < M; ++m) {
        const double mass = dec.fibers[m].amp.squaredNorm();
        if (m == m0)
            CHECK(mass > 1.0);
        else
            CHECK(mass < 1e-20);
    }
}

TEST_CASE("floquet: M=1 is the identity up to the phase convention") {
    const int L = 3, nx = 4;
    oracle::Rng rng(44);
    Eigen::MatrixXcd psi(nx, L);
    for (int i = 0; i < nx; ++i)
        for (int y = 0; y < L; ++y) psi(i, y) = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    const FiberDecomposition dec = floquet_forward(psi, L, 0);
    REQUIRE(dec.M == 1);
    CHECK(dec.fibers[0].k == 0.0);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < L; ++j)
            CHECK(std::abs(dec.fibers[0].amp(j, i) - psi(i, j)) < 1e-15);
}

TEST_CASE("free fiber spectrum stays inside the band hull") {
    StripPotential v;
    v.L = 2;
    v.R = 0;
    v.values = Eigen::MatrixXd::Zero(1, 2);
    const double k = 0.7;
    const Eigen::MatrixXcd h = oracle::dense_fiber_matrix(v, k, 40);
    const auto es = oracle::dense_eigensolve(h);
    double lo = 1e9, hi = -1e9;
    for (int j = 0; j < v.L; ++j) {
        const double c = 2.0 * std::cos(k + 2.0 * pi * j / v.L);
        lo = std::min(lo, c - 2.0);
        hi = std::max(hi, c + 2.0);
    }
    CHECK(es.evals.minCoeff() > lo - 1e-9);
    CHECK(es.evals.maxCoeff() < hi + 1e-9);
}
