#pragma once

#include "stripbloch/potential.hpp"

#include <Eigen/Dense>
#include <complex>
#include <vector>

// Transfer-matrix data at fixed (E, k).
//
// In the Delta_k eigenbasis the one-step transfer matrix T0(E,k) block-
// decomposes into 2x2 pieces [[e_j, -1], [1, 0]] with e_j = E - 2cos(k+2pi j/L),
// whose eigenvalues are the two Joukowsky preimages mu of e_j (mu + 1/mu = e_j).
// Modes with |e_j| > 2 are hyperbolic (one root inside the unit circle, one
// outside); |e_j| < 2 elliptic (unit pair); |e_j| = 2 threshold, excluded by an
// eps-band since the decaying subspaces change rank there.
//
// Stacking Psi_x = (psi_x, psi_{x-1}), the potential enters through
// Psi_{x+1} = [[E - Delta_k - V_x, -Id], [Id, 0]] Psi_x, and
// T_V = prod_{x=R..-R} of those factors (x = -R applied first) carries
// Psi_{-R} to Psi_{R+1}.  E is an eigenvalue of H(k) iff
// A = (Id - P_plus) T_V I_minus is singular, where I_minus injects the
// backward-decaying subspace and P_plus projects onto the forward-decaying one.

namespace stripbloch {

inline constexpr double kThresholdEps = 1e-8;

enum class ModeKind { Hyperbolic, Elliptic, Threshold };

struct ModeClassification {
    double E = 0.0, k = 0.0;
    int L = 1;
    Eigen::VectorXd e;                  // e_j(E, k)
    std::vector<ModeKind> kind;
    Eigen::VectorXcd mu_plus, mu_minus; // NaN entries unless Hyperbolic
    int n_hyperbolic = 0;

    bool any_threshold() const {
        for (auto kd : kind)
            if (kd == ModeKind::Threshold) return true;
        return false;
    }
};

// Roots of mu + 1/mu = w, returned as (mu_plus, mu_minus) with
// |mu_plus| < 1 < |mu_minus| and mu_plus * mu_minus = 1 exactly.
// For real |w| > 2 this matches the convention sign(sqrt(w^2-4)) = sign(w).
// Throws ThresholdProximity when w is within eps of the segment [-2, 2].
std::pair<std::complex<double>, std::complex<double>>
joukowsky_inverse(std::complex<double> w, double eps = kThresholdEps);

ModeClassification classify_modes(double E, double k, int L, double eps = kThresholdEps);

// Free one-step transfer matrix, 2L x 2L: [[E - Delta_k, -Id], [Id, 0]].
// det = 1; spectrum = union over j of the two roots of z^2 - e_j z + 1.
Eigen::MatrixXcd build_t0(double E, double k, int L);

// Orthonormal bases of the decaying subspaces.  Column per hyperbolic mode j:
// normalize((mu v_j) ^ v_j) with mu = mu_plus (forward-decaying, "plus") or
// mu_minus (backward-decaying, "minus").  Distinct modes are orthogonal because
// the v_j are, so normalization alone orthonormalizes; 2L x 0 when all modes
// are elliptic.
struct DecayingSubspaces {
    Eigen::MatrixXcd plus;  // 2L x d
    Eigen::MatrixXcd minus; // 2L x d
};
DecayingSubspaces decaying_subspaces(const ModeClassification& mc);

// Across-support product; equals build_t0(E,k,L)^(2R+1) when V == 0.
Eigen::MatrixXcd build_tv(double E, double k, const StripPotential& V);

// Everything the eigenvalue scan needs at one (E, k).
struct TransferContext {
    double E = 0.0, k = 0.0;
    ModeClassification modes;
    Eigen::MatrixXcd t0, tv;
    Eigen::MatrixXcd basis_plus, basis_minus; // 2L x d
    Eigen::MatrixXcd a;                       // (Id - P_plus) T_V basis_minus, 2L x d
    Eigen::VectorXd singular_values;          // descending
    Eigen::MatrixXcd svd_v;                   // d x d right singular vectors
    double sigma_min = 0.0;
    double log_det_asta = 0.0;                // log det(A* A) = 2 sum log sigma_i
};

// Throws ThresholdProximity if any mode is within eps of |e_j| = 2, and
// EmptyMinusSubspace if no mode is hyperbolic.
TransferContext build_context(double E, double k, const StripPotential& V,
                              double eps = kThresholdEps);

} // namespace stripbloch
