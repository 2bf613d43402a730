#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

// Finite-box states on the 2d lattice and the position diagnostics taken on
// them.  x lives on [-x_half, x_half] (row index i = x + x_half), y on
// [0, ny).  Surface-transport runs keep y periodic so the Floquet synthesis
// is exact; packets legitimately wrap around the ring, which is why the mean
// along y is tracked with unwrapping.

namespace stripbloch {

enum class Boundary { Dirichlet, Periodic };

struct Box {
    int x_half = 0;
    int ny = 1;
    Boundary x_boundary = Boundary::Dirichlet;
    Boundary y_boundary = Boundary::Periodic;

    int nx() const { return 2 * x_half + 1; }
};

struct LatticeState {
    Box box;
    Eigen::MatrixXcd amp;  // nx x ny, row i holds x = i - x_half

    double norm() const { return amp.norm(); }
};

LatticeState make_state(const Box& box);

struct Moments {
    double mean_x = 0.0;
    double mean_y = 0.0;
    double var_x = 0.0;
    double var_y = 0.0;
};

// First and second moments of |psi|^2.  For periodic y the column coordinate
// is unwrapped to the branch nearest the circular mean, itself unwrapped to
// the branch nearest anchor_y (pass the previous sample's mean, or the packet
// center for the first one; NaN leaves the circular mean in [0, ny)).  For a
// packet that fits in half the ring this reproduces plain summation exactly.
Moments position_moments(const LatticeState& s, double anchor_y);

// l^2 mass on the columns |x| > v*t.
double chi_vt_mass(const LatticeState& s, double v, double t);

// Mass within w sites of the box edges in index space: both x edges always
// (Dirichlet reflection and periodic wrap-around are both contamination for
// the runs measured here), y edges only when y is Dirichlet.
double boundary_mass(const LatticeState& s, int w);

}  // namespace stripbloch
