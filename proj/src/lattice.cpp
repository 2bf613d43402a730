#include "stripbloch/lattice.hpp"

#include <cmath>
#include <numbers>

#include "stripbloch/errors.hpp"

namespace stripbloch {

LatticeState make_state(const Box& box) {
    if (box.x_half < 0 || box.ny < 1) throw ConfigError("lattice box is empty");
    LatticeState s;
    s.box = box;
    s.amp = Eigen::MatrixXcd::Zero(box.nx(), box.ny);
    return s;
}

Moments position_moments(const LatticeState& s, double anchor_y) {
    const int nx = s.box.nx();
    const int ny = s.box.ny;
    const Eigen::VectorXd row_mass = s.amp.rowwise().squaredNorm();
    const Eigen::VectorXd col_mass = s.amp.colwise().squaredNorm();
    const double total = row_mass.sum();
    if (total <= 0.0) throw NumericalError("position moments of the zero state");

    Moments m;
    for (int i = 0; i < nx; ++i) m.mean_x += (i - s.box.x_half) * row_mass(i);
    m.mean_x /= total;
    for (int i = 0; i < nx; ++i) {
        const double d = (i - s.box.x_half) - m.mean_x;
        m.var_x += d * d * row_mass(i);
    }
    m.var_x /= total;

    double center = anchor_y;
    if (s.box.y_boundary == Boundary::Periodic) {
        // circular mean as a robust branch locator; exact moments follow below
        std::complex<double> c = 0.0;
        for (int j = 0; j < ny; ++j)
            c += col_mass(j) * std::polar(1.0, 2.0 * std::numbers::pi * j / ny);
        if (std::abs(c) > 1e-12 * total)
            center = std::arg(c) * ny / (2.0 * std::numbers::pi);
        else if (std::isnan(center))
            center = 0.0;
        if (!std::isnan(anchor_y))
            center += ny * std::round((anchor_y - center) / ny);
    } else if (std::isnan(center)) {
        center = 0.0;
    }

    for (int j = 0; j < ny; ++j) {
        double y = j;
        if (s.box.y_boundary == Boundary::Periodic)
            y += ny * std::round((center - y) / ny);
        m.mean_y += y * col_mass(j);
    }
    m.mean_y /= total;
    for (int j = 0; j < ny; ++j) {
        double y = j;
        if (s.box.y_boundary == Boundary::Periodic)
            y += ny * std::round((center - y) / ny);
        const double d = y - m.mean_y;
        m.var_y += d * d * col_mass(j);
    }
    m.var_y /= total;
    return m;
}

double chi_vt_mass(const LatticeState& s, double v, double t) {
    const double radius = v * t;
    double mass = 0.0;
    for (int i = 0; i < s.box.nx(); ++i)
        if (std::abs(i - s.box.x_half) > radius) mass += s.amp.row(i).squaredNorm();
    return mass;
}

double boundary_mass(const LatticeState& s, int w) {
    if (w <= 0) return 0.0;
    const int nx = s.box.nx();
    const int ny = s.box.ny;
    const int wy = s.box.y_boundary == Boundary::Dirichlet ? w : 0;
    const double total = s.amp.squaredNorm();
    if (2 * w >= nx || 2 * wy > ny) return total;
    const double interior =
        s.amp.block(w, wy, nx - 2 * w, ny - 2 * wy).squaredNorm();
    return total - interior;
}

}  // namespace stripbloch
