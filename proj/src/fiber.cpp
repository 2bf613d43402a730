#include "stripbloch/fiber.hpp"
#include "stripbloch/errors.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace stripbloch {

using cplx = std::complex<double>;
constexpr double pi = std::numbers::pi;

Eigen::MatrixXcd delta_k_matrix(int L, double k) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(L, L);
    const cplx f = std::polar(1.0, k);  // e^{ik}
    for (int j = 0; j < L; ++j) {
        m(j, (j + 1) % L) += f;
        m(j, (j - 1 + L) % L) += std::conj(f);
    }
    return m;
}

DeltaKEigen delta_k_eigenbasis(int L, double k) {
    DeltaKEigen out;
    out.evals.resize(L);
    out.vecs.resize(L, L);
    const double s = 1.0 / std::sqrt(static_cast<double>(L));
    for (int n = 0; n < L; ++n) {
        out.evals(n) = 2.0 * std::cos(k + 2.0 * pi * n / L);
        for (int j = 0; j < L; ++j)
            out.vecs(j, n) = std::polar(s, 2.0 * pi * j * n / L);
    }
    return out;
}

double mode_energy(double E, double k, int j, int L) {
    return E - 2.0 * std::cos(k + 2.0 * pi * j / L);
}

FiberState apply_fiber_hamiltonian(const FiberState& s, const StripPotential& V) {
    const int L = static_cast<int>(s.amp.rows());
    const int n = static_cast<int>(s.amp.cols());
    if (L != V.L) throw ConfigError("apply_fiber_hamiltonian: state has L=" + std::to_string(L) +
                                    ", potential has L=" + std::to_string(V.L));
    const Eigen::MatrixXcd dk = delta_k_matrix(L, s.k);

    FiberState out;
    out.k = s.k;
    out.x_lo = s.x_lo;
    out.amp.resize(L, n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXcd col = dk * s.amp.col(i);
        if (i > 0) col += s.amp.col(i - 1);
        if (i + 1 < n) col += s.amp.col(i + 1); // Dirichlet outside the window
        const int x = s.x_lo + i;
        if (x >= -V.R && x <= V.R)
            for (int j = 0; j < L; ++j) col(j) += V.value(x, j) * s.amp(j, i);
        out.amp.col(i) = col;
    }
    return out;
}

FiberDecomposition floquet_forward(const Eigen::MatrixXcd& psi, int L, int x_lo) {
    const int nx = static_cast<int>(psi.rows());
    const int ny = static_cast<int>(psi.cols());
    if (L < 1 || ny % L != 0)
        throw ConfigError("floquet_forward: ny=" + std::to_string(ny) +
                          " is not a multiple of L=" + std::to_string(L));
    const int M = ny / L;

    FiberDecomposition dec;
    dec.L = L;
    dec.M = M;
    dec.x_lo = x_lo;
    dec.fibers.resize(M);

    for (int m = 0; m < M; ++m) {
        const double km = 2.0 * pi * m / (L * M);
        FiberState& f = dec.fibers[m];
        f.k = km;
        f.x_lo = x_lo;
        f.amp = Eigen::MatrixXcd::Zero(L, nx);
        // phase table over the full ring
        Eigen::VectorXcd ph(ny);
        for (int y = 0; y < ny; ++y) ph(y) = std::polar(1.0, -km * y);
        for (int ix = 0; ix < nx; ++ix)
            for (int y = 0; y < ny; ++y)
                f.amp(y % L, ix) += psi(ix, y) * ph(y);
    }
    return dec;
}

Eigen::MatrixXcd floquet_inverse(const FiberDecomposition& dec) {
    const int L = dec.L, M = dec.M;
    if (static_cast<int>(dec.fibers.size()) != M)
        throw ConfigError("floquet_inverse: fiber count != M");
    const int nx = dec.fibers.empty() ? 0 : static_cast<int>(dec.fibers[0].amp.cols());
    const int ny = L * M;

    Eigen::MatrixXcd psi = Eigen::MatrixXcd::Zero(nx, ny);
    for (int m = 0; m < M; ++m) {
        const FiberState& f = dec.fibers[m];
        const double km = 2.0 * pi * m / (L * M);
        Eigen::VectorXcd ph(ny);
        for (int y = 0; y < ny; ++y) ph(y) = std::polar(1.0 / M, km * y);
        for (int ix = 0; ix < nx; ++ix)
            for (int y = 0; y < ny; ++y)
                psi(ix, y) += f.amp(y % L, ix) * ph(y);
    }
    return psi;
}

} // namespace stripbloch
