#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "stripbloch/lattice.hpp"
#include "stripbloch/potential.hpp"
#include "stripbloch/spectrum.hpp"

// Time evolution on a finite box and the transport diagnostics built on it.
// The propagator is a Chebyshev expansion of exp(-itH): with H scaled by
// alpha = 4 + |V|_inf the polynomial degree is ~ alpha*|t| + O((alpha t)^{1/3})
// and the truncation tail is controlled to a fixed tolerance, so unitarity is
// preserved to the same accuracy without any time-step error to tune.

namespace stripbloch {

class Hamiltonian2D {
  public:
    // Tiles V across the box (y mod L).  Periodic y requires ny % L == 0 so
    // the tiling closes up; otherwise ConfigError.
    Hamiltonian2D(const StripPotential& v, const Box& box);

    const Box& box() const { return box_; }
    double norm_bound() const { return bound_; }  // 4 + |V|_inf >= |H|

    void apply(const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) const;
    Eigen::MatrixXcd apply(const Eigen::MatrixXcd& in) const;

    double energy(const Eigen::MatrixXcd& amp) const;  // <psi, H psi>, real part

  private:
    Box box_;
    Eigen::MatrixXd vgrid_;
    double bound_ = 4.0;
};

// In-place psi <- exp(-itH) psi, either sign of t.  tol bounds the truncation
// error in operator norm; the default keeps norm drift per call near 1e-14.
void evolve(LatticeState& s, const Hamiltonian2D& h, double t, double tol = 1e-12);

// Bessel coefficients J_0..J_nmax of the expansion at argument z >= 0, by
// downward recurrence normalized with J_0 + 2 sum J_{2m} = 1.
std::vector<double> chebyshev_bessel(double z, int nmax);

// Quasimomentum grid the y-periodic box of height L*M resolves: k_m = 2 pi m / (L M).
std::vector<double> fiber_k_grid(int L, int M);

// Wave packet along the surface band: psi(x, j + cL) =
// (1/M) sum_m a_m e^{i k_m (j+cL)} phi_{k_m}(x, j), recentered at center_y and
// normalized.  The curve must be sampled exactly on fiber_k_grid(L, M) and the
// box must be y-periodic with ny == L*M.  Fiber phases are gauged before
// summing: each phi_k is rotated so its largest component on the column of
// maximal mass is real positive, then adjacent-k overlaps are aligned to the
// nearest unit outward from the weight maximum.  Weights within two grid cells
// of a singular point, or on invalid samples, are rejected with ConfigError
// (same support rule as the transport prediction).
LatticeState synthesize_surface_state(const EigenCurve& curve,
                                      const Eigen::VectorXcd& weights,
                                      const Box& box, int center_y,
                                      double support_tol = 1e-12);

// Box wide enough in x for a run of duration T: strip half-width R, the tail
// of the slowest-decaying populated fiber mode down to 1e-12, and a ballistic
// guard 2*T*v_guard for the unconverged remainder.
int transport_x_half(int R, double rho_max, double T, double v_guard = 2.0);

struct TimeSample {
    double t = 0.0;
    double mean_x = 0.0, mean_y = 0.0, var_x = 0.0, var_y = 0.0;
    double norm = 0.0;
    double boundary_mass = 0.0;
    std::vector<double> chi_mass;  // one per chi_velocities entry
};

struct TimeSeries {
    std::vector<double> chi_velocities;
    int boundary_window = 8;
    std::vector<TimeSample> samples;

    // Appends diagnostics at time t; the y mean is anchored to the previous
    // sample (anchor_hint for the first) so ring wrapping accumulates winding.
    void record(const LatticeState& s, double t, double anchor_hint);
};

struct SlopeFit {
    double vel_x = 0.0, vel_y = 0.0;
    double r2_x = 0.0, r2_y = 0.0;
    int n = 0;
    double t_lo = 0.0, t_hi = 0.0;
};

// Least-squares velocities of the position means over samples with
// t in [t_lo, t_hi].  Fewer than 10 samples: InsufficientSamples.  Any
// boundary_mass above 1e-6 in the window: BoundaryContamination.
SlopeFit transport_slopes(const TimeSeries& series, double t_lo, double t_hi);

}  // namespace stripbloch
