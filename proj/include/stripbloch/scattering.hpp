#pragma once

#include <Eigen/Dense>
#include <complex>
#include <numbers>
#include <vector>

#include "stripbloch/dynamics.hpp"
#include "stripbloch/lattice.hpp"
#include "stripbloch/potential.hpp"

// Band-limited scattering states, free evolution by Fourier diagonalization,
// Cook integrand decay, and finite-time wave operators with convergence
// certificates.  Everything lives on a box that is periodic in both axes so
// the free propagator is exactly diagonal; the packet geometry keeps mass away
// from both wrap seams through the run.

namespace stripbloch {

// Product state psi(x,y) = psi_x(x) psi_y(y).  psi_x is built from a smooth
// compactly supported momentum window, so its Fourier transform vanishes on
// every grid momentum outside the window; in particular it is exactly zero
// wherever |sin k| <= a.  psi_y is a boosted Gaussian envelope (no band
// limit).  Index i of psi_x holds x = i - (nx-1)/2; psi_y is indexed by y.
struct DaState {
    double a = 0.0;
    double center_kx = 0.0;
    double width_kx = 0.0;
    double fourier_support_margin = 0.0;  // min over window of |sin k| - a
    int center_x = 0;
    int center_y = 0;
    Eigen::VectorXcd psi_x;
    Eigen::VectorXcd psi_y;
};

struct DaSpec {
    double a = 0.5;
    double center_kx = std::numbers::pi / 2;
    double width_kx = 1.0;
    double center_ky = std::numbers::pi / 2;
    double sigma_y = 4.0;
    int nx = 513;  // odd, so x = i - x_half is centered
    int ny = 512;
    int center_x = 0;
    int center_y = 256;
    int taper_power = 12;  // envelope spec: cos^power momentum taper
};

// psi_x = inverse transform of the window cos(pi u / 2)^power, u = (k-c)/w,
// on the nx-point momentum grid.  Twelve vanishing edge derivatives push the
// free packet's x=0 amplitude below 1e-10 of its peak by t = 40, which is
// what the Cook decay checks need; softer tapers fall short at these times.
// ConfigError if |sin k| <= a anywhere in [c-w, c+w] or nx is even.
DaState make_da_state(const DaSpec& spec);

// Product state on the doubly periodic box matching the factor lengths.
LatticeState embed(const DaState& s);

// psi <- exp(-it H0) psi on a doubly periodic box: multiply the 2d DFT by
// exp(-2it(cos k1 + cos k2)) and invert.  Exactly unitary.
void free_evolve(LatticeState& s, double t);

// (P psi)(n) = i(psi(n + e_axis) - psi(n - e_axis)): symbol -2 sin k, the
// group velocity of the free symbol.  axis 0 = x, 1 = y.
LatticeState momentum_apply(const LatticeState& s, int axis);

// sqrt(|f|^2 + |Q1 f|^2) with Q1 the (signed) x position.
double s1_norm(const LatticeState& s);

// (1+t) |V exp(-itH0) psi|_S1; decays superpolynomially once the band-limited
// packet has left the strip.
double cook_integrand(const DaState& s, const StripPotential& v, double t);

// Trapezoid integral of the Cook integrand over [0, t_max].
double cook_integral(const DaState& s, const StripPotential& v, double t_max,
                     double dt);

struct WaveOpResult {
    LatticeState state;        // exp(iTH) exp(-iTH0) psi
    double cauchy_gap = 0.0;   // |Omega(T)psi - Omega(T/2)psi|
    bool converged = false;    // gap <= cauchy_tol
};

// Finite-time wave operator with a Cauchy convergence certificate.  Throws
// BoundaryContamination if more than 1e-8 mass reaches the x wrap seam at the
// free stage or in the result.
WaveOpResult wave_operator_apply(const LatticeState& psi, const Hamiltonian2D& h,
                                 double T, double cauchy_tol = 1e-5,
                                 double evolve_tol = 1e-12);

struct VelocityReport {
    std::vector<double> t_list;
    std::vector<double> r_x;  // per T: |Q_x(T)/T Omega psi - Omega P_x psi| / |P_x psi|
    std::vector<double> r_y;
    double cauchy_gap = 0.0;
    double isometry_drift = 0.0;  // worst | |Omega phi| - |phi| | over the three applications
    double t_max = 0.0;
};

// Checks the scattering asymptotic-velocity identity: Q_H(T)/T applied to
// Omega(T_max) psi approaches Omega(T_max) P psi along both axes.  Positions
// are measured from the packet's build center so the finite-T remainder is
// the packet's own width over T.
VelocityReport scattering_velocity_check(const DaState& s, const StripPotential& v,
                                         const std::vector<double>& t_list,
                                         double cauchy_tol = 1e-5);

}  // namespace stripbloch
