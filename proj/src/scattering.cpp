#include "stripbloch/scattering.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "stripbloch/errors.hpp"

namespace stripbloch {

using cplx = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_angle(double k) {
    return k - 2.0 * kPi * std::round(k / (2.0 * kPi));
}

// powered cosine taper on (-1, 1); the power sets how many derivatives
// vanish at the edge and hence the off-window decay of its transform
double taper(double u, int power) {
    if (std::abs(u) >= 1.0) return 0.0;
    return std::pow(std::cos(0.5 * kPi * u), power);
}

}  // namespace

DaState make_da_state(const DaSpec& spec) {
    if (spec.nx < 3 || spec.nx % 2 == 0)
        throw ConfigError("momentum window needs an odd ring length >= 3");
    if (spec.ny < 1 || spec.sigma_y <= 0.0 || spec.width_kx <= 0.0 ||
        spec.a < 0.0 || spec.taper_power < 1)
        throw ConfigError("bad scattering state parameters");

    // min of |sin| over the window: interior zeros beat the endpoints
    const double lo = spec.center_kx - spec.width_kx;
    const double hi = spec.center_kx + spec.width_kx;
    double min_sin = std::min(std::abs(std::sin(lo)), std::abs(std::sin(hi)));
    if (std::floor(hi / kPi) >= std::ceil(lo / kPi)) min_sin = 0.0;
    const double margin = min_sin - spec.a;
    if (margin <= 0.0) {
        std::ostringstream msg;
        msg << "momentum window [" << lo << ", " << hi
            << "] leaves the band limit |sin k| > " << spec.a << " (margin "
            << margin << ")";
        throw ConfigError(msg.str());
    }

    DaState s;
    s.a = spec.a;
    s.center_kx = spec.center_kx;
    s.width_kx = spec.width_kx;
    s.fourier_support_margin = margin;
    s.center_x = spec.center_x;
    s.center_y = spec.center_y;

    const int nx = spec.nx;
    const int xh = (nx - 1) / 2;
    s.psi_x = Eigen::VectorXcd::Zero(nx);
    for (int m = 0; m < nx; ++m) {
        const double k = 2.0 * kPi * m / nx;
        const double w =
            taper(wrap_angle(k - spec.center_kx) / spec.width_kx, spec.taper_power);
        if (w == 0.0) continue;
        for (int i = 0; i < nx; ++i)
            s.psi_x(i) += w * std::polar(1.0, k * (i - xh - spec.center_x));
    }
    const double nrm_x = s.psi_x.norm();
    if (nrm_x <= 0.0) throw ConfigError("momentum window misses every grid point");
    s.psi_x /= nrm_x;

    s.psi_y = Eigen::VectorXcd::Zero(spec.ny);
    for (int j = 0; j < spec.ny; ++j) {
        double d = j - spec.center_y;
        d -= spec.ny * std::round(d / spec.ny);
        s.psi_y(j) = std::exp(-d * d / (4.0 * spec.sigma_y * spec.sigma_y)) *
                     std::polar(1.0, spec.center_ky * d);
    }
    s.psi_y /= s.psi_y.norm();
    return s;
}

LatticeState embed(const DaState& s) {
    Box box;
    box.x_half = (static_cast<int>(s.psi_x.size()) - 1) / 2;
    box.ny = static_cast<int>(s.psi_y.size());
    box.x_boundary = Boundary::Periodic;
    box.y_boundary = Boundary::Periodic;
    LatticeState out = make_state(box);
    out.amp = s.psi_x * s.psi_y.transpose();
    return out;
}

void free_evolve(LatticeState& s, double t) {
    if (s.box.x_boundary != Boundary::Periodic || s.box.y_boundary != Boundary::Periodic)
        throw ConfigError("free evolution needs a doubly periodic box");
    if (t == 0.0) return;
    const int nx = s.box.nx();
    const int ny = s.box.ny;
    auto* data = reinterpret_cast<fftw_complex*>(s.amp.data());
    // column-major nx x ny: y is the slow index
    fftw_plan fwd = fftw_plan_dft_2d(ny, nx, data, data, FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(fwd);
    fftw_destroy_plan(fwd);

    Eigen::VectorXd cosx(nx), cosy(ny);
    for (int i = 0; i < nx; ++i) cosx(i) = std::cos(2.0 * kPi * i / nx);
    for (int j = 0; j < ny; ++j) cosy(j) = std::cos(2.0 * kPi * j / ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            s.amp(i, j) *= std::polar(1.0, -2.0 * t * (cosx(i) + cosy(j)));

    fftw_plan bwd = fftw_plan_dft_2d(ny, nx, data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_execute(bwd);
    fftw_destroy_plan(bwd);
    s.amp /= static_cast<double>(nx) * ny;
}

LatticeState momentum_apply(const LatticeState& s, int axis) {
    const int nx = s.box.nx();
    const int ny = s.box.ny;
    LatticeState out = s;
    Eigen::MatrixXcd plus = Eigen::MatrixXcd::Zero(nx, ny);
    Eigen::MatrixXcd minus = Eigen::MatrixXcd::Zero(nx, ny);
    if (axis == 0) {
        if (nx > 1) {
            plus.topRows(nx - 1) = s.amp.bottomRows(nx - 1);
            minus.bottomRows(nx - 1) = s.amp.topRows(nx - 1);
        }
        if (s.box.x_boundary == Boundary::Periodic) {
            plus.row(nx - 1) = s.amp.row(0);
            minus.row(0) = s.amp.row(nx - 1);
        }
    } else if (axis == 1) {
        if (ny > 1) {
            plus.leftCols(ny - 1) = s.amp.rightCols(ny - 1);
            minus.rightCols(ny - 1) = s.amp.leftCols(ny - 1);
        }
        if (s.box.y_boundary == Boundary::Periodic) {
            plus.col(ny - 1) = s.amp.col(0);
            minus.col(0) = s.amp.col(ny - 1);
        }
    } else {
        throw ConfigError("momentum axis must be 0 or 1");
    }
    out.amp = cplx(0.0, 1.0) * (plus - minus);
    return out;
}

double s1_norm(const LatticeState& s) {
    double acc = 0.0;
    for (int i = 0; i < s.box.nx(); ++i) {
        const double x = i - s.box.x_half;
        acc += (1.0 + x * x) * s.amp.row(i).squaredNorm();
    }
    return std::sqrt(acc);
}

double cook_integrand(const DaState& da, const StripPotential& v, double t) {
    LatticeState s = embed(da);
    if (v.R > s.box.x_half) throw ConfigError("potential wider than the box");
    free_evolve(s, t);
    double acc = 0.0;
    for (int x = -v.R; x <= v.R; ++x) {
        const int i = x + s.box.x_half;
        for (int j = 0; j < s.box.ny; ++j) {
            const double vv = v.value(x, j % v.L);
            acc += (1.0 + x * x) * std::norm(vv * s.amp(i, j));
        }
    }
    return (1.0 + t) * std::sqrt(acc);
}

double cook_integral(const DaState& da, const StripPotential& v, double t_max,
                     double dt) {
    if (dt <= 0.0 || t_max < 0.0) throw ConfigError("bad Cook integral range");
    const int n = static_cast<int>(std::ceil(t_max / dt));
    double acc = 0.0;
    double prev = cook_integrand(da, v, 0.0);
    for (int i = 1; i <= n; ++i) {
        const double t = std::min(i * dt, t_max);
        const double cur = cook_integrand(da, v, t);
        acc += 0.5 * (prev + cur) * (t - (i - 1) * dt);
        prev = cur;
    }
    return acc;
}

namespace {

void check_seam(const LatticeState& s, const char* stage) {
    const double bm = boundary_mass(s, 8);
    if (bm > 1e-8) {
        std::ostringstream msg;
        msg << "mass " << bm << " at the wrap seam (" << stage
            << "); enlarge the box";
        throw BoundaryContamination(msg.str());
    }
}

LatticeState omega(const LatticeState& psi, const Hamiltonian2D& h, double T,
                   double tol) {
    LatticeState u = psi;
    free_evolve(u, T);
    check_seam(u, "free stage");
    evolve(u, h, -T, tol);
    check_seam(u, "wave operator");
    return u;
}

}  // namespace

WaveOpResult wave_operator_apply(const LatticeState& psi, const Hamiltonian2D& h,
                                 double T, double cauchy_tol, double evolve_tol) {
    if (T < 0.0) throw ConfigError("wave operator time must be nonnegative");
    WaveOpResult r{omega(psi, h, T, evolve_tol), 0.0, false};
    const LatticeState half = omega(psi, h, T / 2, evolve_tol);
    r.cauchy_gap = (r.state.amp - half.amp).norm();
    r.converged = r.cauchy_gap <= cauchy_tol;
    return r;
}

VelocityReport scattering_velocity_check(const DaState& da, const StripPotential& v,
                                         const std::vector<double>& t_list,
                                         double cauchy_tol) {
    if (t_list.empty()) throw ConfigError("empty time list");
    for (double t : t_list)
        if (t <= 0.0) throw ConfigError("velocity check times must be positive");

    LatticeState psi = embed(da);
    Hamiltonian2D h(v, psi.box);
    const double t_max = *std::max_element(t_list.begin(), t_list.end());

    const LatticeState px = momentum_apply(psi, 0);
    const LatticeState py = momentum_apply(psi, 1);
    const double npx = px.norm();
    const double npy = py.norm();

    VelocityReport rep;
    rep.t_list = t_list;
    rep.t_max = t_max;

    WaveOpResult om = wave_operator_apply(psi, h, t_max, cauchy_tol);
    rep.cauchy_gap = om.cauchy_gap;
    rep.isometry_drift = std::abs(om.state.norm() - psi.norm());

    const LatticeState wpx = omega(px, h, t_max, 1e-12);
    const LatticeState wpy = omega(py, h, t_max, 1e-12);
    rep.isometry_drift = std::max({rep.isometry_drift, std::abs(wpx.norm() - npx),
                                   std::abs(wpy.norm() - npy)});

    const int nx = psi.box.nx();
    const int ny = psi.box.ny;
    for (double T : t_list) {
        LatticeState u = om.state;
        evolve(u, h, T);
        check_seam(u, "position measurement");
        // the y coordinate branch cut sits half a ring away from the build
        // center; boundary_mass does not see it on a periodic box
        double seam_mass = 0.0;
        for (int j = 0; j < ny; ++j) {
            double d = j - da.center_y;
            d -= ny * std::round(d / ny);
            if (std::abs(d) > 0.5 * ny - 8.0) seam_mass += u.amp.col(j).squaredNorm();
        }
        if (seam_mass > 1e-8) {
            std::ostringstream msg;
            msg << "mass " << seam_mass << " at the y coordinate branch cut at time "
                << T << "; enlarge the ring";
            throw BoundaryContamination(msg.str());
        }
        // ring distances from the build center keep the coordinate seam away
        // from the packet (the seam itself is guarded by check_seam)
        LatticeState qx = u;
        for (int i = 0; i < nx; ++i) {
            double d = i - psi.box.x_half - da.center_x;
            d -= nx * std::round(d / nx);
            qx.amp.row(i) *= d;
        }
        LatticeState qy = u;
        for (int j = 0; j < ny; ++j) {
            double d = j - da.center_y;
            d -= ny * std::round(d / ny);
            qy.amp.col(j) *= d;
        }
        evolve(qx, h, -T);
        evolve(qy, h, -T);
        rep.r_x.push_back((qx.amp / T - wpx.amp).norm() / npx);
        rep.r_y.push_back((qy.amp / T - wpy.amp).norm() / npy);
    }
    return rep;
}

}  // namespace stripbloch
