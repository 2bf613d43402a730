#pragma once

#include <string>
#include <utility>
#include <vector>

#include "stripbloch/transfer.hpp"

namespace stripbloch {

// Point spectrum of the fiber operators H(k) = shift + shift^* + Delta^k + V.
//
// An energy E is an eigenvalue of H(k) iff the matching matrix
// A(E) = (Id - Pi+) T_V(E) B_-(E) is singular, so we locate eigenvalues as
// zeros of sigma_min(A) along E and certify each hit by reconstructing the
// eigenvector and measuring the residual ||(H(k)-E)psi|| with the exact
// geometric tails attached.

struct ScanParams {
    double e_lo = -8.0;
    double e_hi = 8.0;
    double grid_step = 1e-3;      // E sampling step for the coarse scan
    double refine_tol = 1e-12;    // upper bound on the final bracket width
    double accept_tol = 1e-9;     // sigma_min threshold for a candidate
    double residual_tol = 1e-7;   // certificate ||(H-E)psi|| / ||psi||
    double eps_thr = kThresholdEps;
};

// Eigenvector on the fiber, stored exactly: explicit amplitudes on the window
// [x_lo, x_hi] around the support of V, plus decaying-mode data for the tails.
// For s >= 1,
//   psi_{x_lo - s} = sum_j left_c(j)  mu(j)^s v_j
//   psi_{x_hi + s} = sum_j right_c(j) mu(j)^s v_j
// with |mu(j)| < 1, so norms and tail masses have closed forms.
struct BoundProfile {
    double k = 0.0;
    double E = 0.0;
    int L = 1;
    int x_lo = 0;
    int x_hi = 0;
    Eigen::MatrixXcd window;   // L x (x_hi - x_lo + 1), col i = psi_{x_lo + i}
    Eigen::VectorXcd mu;       // decaying Joukowsky roots of the hyperbolic modes
    Eigen::MatrixXcd modes;    // L x d, orthonormal transverse modes v_j
    Eigen::VectorXcd left_c;
    Eigen::VectorXcd right_c;

    Eigen::VectorXcd value(int x) const;   // amplitude column at any x
    double squared_norm() const;           // window + both tails, exact
    double mass_beyond(int X) const;       // sum over |x| > X of ||psi_x||^2
    double decay_rate() const;             // max_j |mu(j)|
    void scale(std::complex<double> c);
};

struct FiberEigenpair {
    double k = 0.0;
    double E = 0.0;
    int multiplicity = 1;
    double sigma_min = 0.0;
    Eigen::MatrixXcd kernel_vectors;  // 2L x multiplicity, Psi_{-R} data
    BoundProfile profile;             // reconstructed from kernel column 0
    double residual = 0.0;
    bool embedded = false;
};

struct ScanResult {
    std::vector<FiberEigenpair> eigenpairs;        // sorted by E
    std::vector<std::pair<double, double>> skipped; // refused threshold bands
};

// Embedded iff some transverse channel is still propagating: |e_j| <= 2.
bool is_embedded(double E, double k, int L);

// E-values in [e_lo, e_hi] where mode j of the fiber at k hits |e_j| = 2.
std::vector<double> threshold_energies(double k, int L, double e_lo, double e_hi);

// sigma_min(A) at a single (E, k), NaN when the point is refused
// (threshold proximity) or has no decaying modes at all.
double singular_value_at(const StripPotential& V, double E, double k,
                         double eps_thr = kThresholdEps);

ScanResult scan_fiber_eigenvalues(const StripPotential& V, double k,
                                  const ScanParams& params);

// Propagate the kernel vector through the potential window and attach tails.
// `kernel` holds coefficients in the basis_minus columns of ctx.
BoundProfile reconstruct_eigenvector(const TransferContext& ctx,
                                     const Eigen::VectorXcd& kernel,
                                     const StripPotential& V);

// ||(H(k) - E) psi|| / ||psi|| evaluated on [x_lo - 2, x_hi + 2]; rows outside
// that range vanish identically because the tails solve the free equation.
double eigen_residual(const BoundProfile& profile, const StripPotential& V);

// --- dispersion curves -----------------------------------------------------

struct SingularPoint {
    int index = 0;        // position in k_grid
    double k = 0.0;
    std::string reason;   // "threshold" | "lost" | "crossing"
};

struct CurveSample {
    bool valid = false;
    FiberEigenpair pair;
};

struct EigenCurve {
    int band_index = 0;
    std::vector<double> k_grid;
    std::vector<CurveSample> samples;
    std::vector<double> dEdk;  // NaN where undefined
    std::vector<SingularPoint> singular_points;

    int valid_count() const;
};

// Continue the eigenvalue branch through k_grid from a refined seed. Marching
// stops in each direction at the first k where the branch cannot be certified;
// the stop is recorded as a singular point with reason "threshold" when a
// mode threshold lies in the search bracket and "lost" otherwise.
EigenCurve trace_band(const StripPotential& V, const std::vector<double>& k_grid,
                      int seed_index, double seed_E, const ScanParams& params);

// Fill dEdk: central differences inside each maximal valid run, second-order
// one-sided stencils at run ends. Runs shorter than 3 samples keep NaN; if the
// whole curve has fewer than 3 valid samples the derivative is undefined and
// we throw InsufficientSamples.
void compute_group_velocity(EigenCurve& curve);

struct NonconstancyReport {
    bool is_constant = false;
    double total_variation = 0.0;
    double e_min = 0.0;
    double e_max = 0.0;
};

NonconstancyReport nonconstancy_check(const EigenCurve& curve);

struct TransportPrediction {
    double mean_velocity = 0.0;
    double velocity_norm_sq = 0.0;
};

// First and second moments of dE/dk under |a(k_m)|^2 / M. Weights are
// renormalized internally; any weight above `support_tol` sitting on an
// invalid sample or within two grid cells of a singular point is an error.
TransportPrediction predict_transport(const EigenCurve& curve,
                                      const Eigen::VectorXcd& weights,
                                      double support_tol = 1e-12);

// Scan a handful of fibers for seeds, trace every distinct branch, sort by
// energy, and annotate crossings (proximity below crossing_tol, or a sign
// change of E_a - E_b between adjacent valid k).
std::vector<EigenCurve> trace_all_bands(const StripPotential& V,
                                        const std::vector<double>& k_grid,
                                        const ScanParams& params,
                                        int seed_scans = 4,
                                        double crossing_tol = 1e-6);

}  // namespace stripbloch
