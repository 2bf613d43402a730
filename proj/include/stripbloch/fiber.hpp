#pragma once

#include "stripbloch/potential.hpp"

#include <Eigen/Dense>
#include <vector>

// Partial Floquet transform in y and the fiber operators it produces.
//
// A state on the strip is psi(x, y), y on a ring of N_y = L*M sites.  The
// transform splits it into M fibers indexed by k_m = 2*pi*m / (L*M):
//
//   psi_hat(k, x)(j) = sum_c psi(x, j + c*L) e^{-i k (j + c*L)},   j in [0, L)
//
// and each fiber evolves under H(k) on l^2(Z; C^L):
//
//   (H(k) psi)_x = psi_{x+1} + psi_{x-1} + Delta_k psi_x + V_x psi_x,
//   (Delta_k f)(j) = e^{ik} f(j+1) + e^{-ik} f(j-1)   (indices mod L).
//
// The ring is finite, so a normalization has to be picked: forward carries no
// prefactor, the inverse carries 1/M, giving (1/M) sum_m ||psi_hat(k_m)||^2
// = ||psi||^2.

namespace stripbloch {

// Fiber-side state: C^L amplitudes on a finite x-window.
// amp is L x n, column i holds psi_{x_lo + i}.
struct FiberState {
    double k = 0.0;
    int x_lo = 0;
    Eigen::MatrixXcd amp;

    int x_hi() const { return x_lo + static_cast<int>(amp.cols()) - 1; }
    double norm() const { return amp.norm(); }
};

// Cyclic hopping matrix Delta_k (L x L, Hermitian).  For L = 1 both neighbor
// terms land on the same site: Delta_k = [2 cos k].
Eigen::MatrixXcd delta_k_matrix(int L, double k);

// Analytic eigenbasis of Delta_k: v_n(j) = zeta^{j n} / sqrt(L) with
// zeta = e^{2 pi i / L}; eigenvalue 2 cos(k + 2 pi n / L).
struct DeltaKEigen {
    Eigen::VectorXd evals;  // L
    Eigen::MatrixXcd vecs;  // L x L, column n = v_n
};
DeltaKEigen delta_k_eigenbasis(int L, double k);

// e_j(E, k) = E - 2 cos(k + 2 pi j / L); the scalar transfer recursion in mode
// j reads a_{x+1} = e_j a_x - a_{x-1}.
double mode_energy(double E, double k, int j, int L);

// Dense application of H(k) on the state's window, Dirichlet outside.
FiberState apply_fiber_hamiltonian(const FiberState& s, const StripPotential& V);

struct FiberDecomposition {
    int L = 1;
    int M = 1;
    int x_lo = 0;
    std::vector<FiberState> fibers; // m = 0..M-1, k_m = 2 pi m / (L M)
};

// psi is nx x ny (row = x index, col = y in [0, L*M)).  ny must be a multiple
// of L.
FiberDecomposition floquet_forward(const Eigen::MatrixXcd& psi, int L, int x_lo);
Eigen::MatrixXcd floquet_inverse(const FiberDecomposition& dec);

} // namespace stripbloch
