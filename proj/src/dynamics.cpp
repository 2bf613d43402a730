#include "stripbloch/dynamics.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "stripbloch/errors.hpp"
#include "stripbloch/fiber.hpp"

namespace stripbloch {

using cplx = std::complex<double>;

Hamiltonian2D::Hamiltonian2D(const StripPotential& v, const Box& box) : box_(box) {
    if (box.x_half < 0 || box.ny < 1) throw ConfigError("lattice box is empty");
    if (box.y_boundary == Boundary::Periodic && box.ny % v.L != 0) {
        std::ostringstream msg;
        msg << "periodic box height " << box.ny
            << " does not close the potential period " << v.L;
        throw ConfigError(msg.str());
    }
    vgrid_.resize(box.nx(), box.ny);
    for (int i = 0; i < box.nx(); ++i)
        for (int j = 0; j < box.ny; ++j)
            vgrid_(i, j) = v.value(i - box.x_half, j % v.L);
    bound_ = 4.0 + v.sup_norm();
}

void Hamiltonian2D::apply(const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) const {
    const int nx = box_.nx();
    const int ny = box_.ny;
    out.resize(nx, ny);
    out.setZero();
    if (nx > 1) {
        out.topRows(nx - 1) += in.bottomRows(nx - 1);
        out.bottomRows(nx - 1) += in.topRows(nx - 1);
    }
    if (box_.x_boundary == Boundary::Periodic) {
        out.row(nx - 1) += in.row(0);
        out.row(0) += in.row(nx - 1);
    }
    if (ny > 1) {
        out.leftCols(ny - 1) += in.rightCols(ny - 1);
        out.rightCols(ny - 1) += in.leftCols(ny - 1);
    }
    if (box_.y_boundary == Boundary::Periodic) {
        out.col(ny - 1) += in.col(0);
        out.col(0) += in.col(ny - 1);
    }
    out.array() += vgrid_.array().cast<cplx>() * in.array();
}

Eigen::MatrixXcd Hamiltonian2D::apply(const Eigen::MatrixXcd& in) const {
    Eigen::MatrixXcd out;
    apply(in, out);
    return out;
}

double Hamiltonian2D::energy(const Eigen::MatrixXcd& amp) const {
    return std::real((amp.array().conjugate() * apply(amp).array()).sum());
}

std::vector<double> chebyshev_bessel(double z, int nmax) {
    if (z < 0.0 || nmax < 0) throw ConfigError("bad Bessel request");
    std::vector<double> j(nmax + 1, 0.0);
    if (z < 1e-14) {
        j[0] = 1.0;
        return j;
    }
    const int mstart =
        nmax + 1 + static_cast<int>(std::ceil(10.0 + std::sqrt(40.0 * (nmax + 1))));
    double above = 0.0;       // J_{n+1} in current scale
    double here = 1e-280;     // J_n seed
    for (int n = mstart; n >= 1; --n) {
        const double below = (2.0 * n / z) * here - above;
        above = here;
        here = below;
        if (n - 1 <= nmax) j[n - 1] = here;
        if (std::abs(here) > 1e250) {
            above *= 1e-250;
            here *= 1e-250;
            for (int i = std::max(n - 1, 0); i <= nmax; ++i) j[i] *= 1e-250;
        }
    }
    double norm = j[0];
    for (int n = 2; n <= nmax; n += 2) norm += 2.0 * j[n];
    if (norm == 0.0 || !std::isfinite(norm))
        throw NumericalError("Bessel normalization failed");
    for (double& v : j) v /= norm;
    return j;
}

void evolve(LatticeState& s, const Hamiltonian2D& h, double t, double tol) {
    if (t == 0.0 || s.amp.size() == 0) return;
    if (s.box.nx() != h.box().nx() || s.box.ny != h.box().ny)
        throw ConfigError("state and Hamiltonian live on different boxes");

    const double alpha = h.norm_bound();
    const double z = std::abs(t) * alpha;
    const int nmax = static_cast<int>(std::ceil(z + 16.0 + 9.0 * std::cbrt(z + 1.0)));
    const std::vector<double> j = chebyshev_bessel(z, nmax);

    // drop the tail whose coefficient mass is below tol/2
    int nkeep = nmax;
    double tail = 0.0;
    while (nkeep > 1 && tail + 2.0 * std::abs(j[nkeep]) <= 0.5 * tol) {
        tail += 2.0 * std::abs(j[nkeep]);
        --nkeep;
    }

    const cplx unit = t >= 0.0 ? cplx(0.0, -1.0) : cplx(0.0, 1.0);

    Eigen::MatrixXcd prev = s.amp;          // T_0(H/alpha) psi
    Eigen::MatrixXcd cur;                   // T_1
    h.apply(prev, cur);
    cur /= alpha;
    Eigen::MatrixXcd acc = j[0] * prev + (2.0 * j[1] * unit) * cur;
    Eigen::MatrixXcd next;
    cplx phase = unit;
    for (int n = 2; n <= nkeep; ++n) {
        h.apply(cur, next);
        next = (2.0 / alpha) * next - prev;
        prev.swap(cur);
        cur.swap(next);
        phase *= unit;
        if (j[n] != 0.0) acc += (2.0 * j[n] * phase) * cur;
    }
    s.amp = std::move(acc);
}

std::vector<double> fiber_k_grid(int L, int M) {
    if (L < 1 || M < 1) throw ConfigError("bad fiber grid");
    std::vector<double> ks(M);
    for (int m = 0; m < M; ++m) ks[m] = 2.0 * std::numbers::pi * m / (L * M);
    return ks;
}

namespace {

// window [x_lo, x_hi] plus decaying tails, as L x nx columns
Eigen::MatrixXcd profile_on_box(const BoundProfile& prof, int x_half) {
    const int nx = 2 * x_half + 1;
    Eigen::MatrixXcd out(prof.L, nx);
    for (int i = 0; i < nx; ++i) out.col(i) = prof.value(i - x_half);
    return out;
}

void align_to(const Eigen::MatrixXcd& ref, Eigen::MatrixXcd& cur) {
    const cplx z = (ref.array().conjugate() * cur.array()).sum();
    if (std::abs(z) > 1e-12) cur *= std::conj(z) / std::abs(z);
}

}  // namespace

LatticeState synthesize_surface_state(const EigenCurve& curve,
                                      const Eigen::VectorXcd& weights,
                                      const Box& box, int center_y,
                                      double support_tol) {
    const int M = static_cast<int>(curve.k_grid.size());
    if (weights.size() != M) throw ConfigError("one weight per curve sample required");
    if (box.y_boundary != Boundary::Periodic)
        throw ConfigError("surface synthesis needs a y-periodic box");
    if (M == 0) throw ConfigError("empty curve");

    int L = 0;
    for (const CurveSample& cs : curve.samples)
        if (cs.valid) { L = cs.pair.profile.L; break; }
    if (L == 0) throw ConfigError("curve has no valid samples");
    if (box.ny != L * M) {
        std::ostringstream msg;
        msg << "box height " << box.ny << " must equal L*M = " << L * M;
        throw ConfigError(msg.str());
    }
    const std::vector<double> ks = fiber_k_grid(L, M);
    for (int m = 0; m < M; ++m)
        if (std::abs(curve.k_grid[m] - ks[m]) > 1e-12)
            throw ConfigError("curve is not sampled on the box quasimomentum grid");

    // reject weight on uncertified or near-singular samples
    double mean_w = 0.0;
    for (int m = 0; m < M; ++m) mean_w += std::norm(weights(m));
    mean_w /= M;
    if (mean_w <= 0.0) throw ConfigError("all synthesis weights vanish");
    for (int m = 0; m < M; ++m) {
        const double w = std::norm(weights(m)) / mean_w;
        if (w <= support_tol) continue;
        if (!curve.samples[m].valid) {
            std::ostringstream msg;
            msg << "weight on uncertified sample at k = " << curve.k_grid[m];
            throw ConfigError(msg.str());
        }
        for (const SingularPoint& sp : curve.singular_points)
            if (std::abs(m - sp.index) < 2) {
                std::ostringstream msg;
                msg << "weight within two cells of the singular point at k = " << sp.k;
                throw ConfigError(msg.str());
            }
    }

    // gauge: anchor each fiber, then align adjacent overlaps outward from the
    // weight maximum so the packet phase varies smoothly in k
    std::vector<Eigen::MatrixXcd> phi(M);
    for (int m = 0; m < M; ++m) {
        if (!curve.samples[m].valid) continue;
        phi[m] = profile_on_box(curve.samples[m].pair.profile, box.x_half);
        Eigen::Index ic = 0;
        phi[m].colwise().squaredNorm().maxCoeff(&ic);
        Eigen::Index jc = 0;
        phi[m].col(ic).cwiseAbs().maxCoeff(&jc);
        const cplx z = phi[m](jc, ic);
        if (std::abs(z) > 0.0) phi[m] *= std::conj(z) / std::abs(z);
    }
    int m0 = 0;
    for (int m = 1; m < M; ++m)
        if (std::norm(weights(m)) > std::norm(weights(m0))) m0 = m;
    int ref = m0;
    for (int s = 1; s <= M / 2; ++s) {
        const int m = (m0 + s) % M;
        if (phi[m].size() == 0) continue;
        if (phi[ref].size() != 0) align_to(phi[ref], phi[m]);
        ref = m;
    }
    ref = m0;
    for (int s = 1; s < M - M / 2; ++s) {
        const int m = (m0 - s % M + M) % M;
        if (phi[m].size() == 0) continue;
        if (phi[ref].size() != 0) align_to(phi[ref], phi[m]);
        ref = m;
    }

    FiberDecomposition dec;
    dec.L = L;
    dec.M = M;
    dec.x_lo = -box.x_half;
    dec.fibers.resize(M);
    for (int m = 0; m < M; ++m) {
        dec.fibers[m].k = ks[m];
        dec.fibers[m].x_lo = -box.x_half;
        if (phi[m].size() != 0 && weights(m) != cplx(0.0)) {
            dec.fibers[m].amp = weights(m) * phi[m];
        } else {
            dec.fibers[m].amp = Eigen::MatrixXcd::Zero(L, box.nx());
        }
    }

    Eigen::MatrixXcd grid = floquet_inverse(dec);
    LatticeState out = make_state(box);
    const int ny = box.ny;
    const int shift = ((center_y % ny) + ny) % ny;
    for (int y = 0; y < ny; ++y) out.amp.col((y + shift) % ny) = grid.col(y);
    const double nrm = out.amp.norm();
    if (nrm <= 0.0) throw NumericalError("synthesized state vanished");
    out.amp /= nrm;
    return out;
}

int transport_x_half(int R, double rho_max, double T, double v_guard) {
    if (!(rho_max > 0.0 && rho_max < 1.0))
        throw ConfigError("fiber decay rate must lie in (0,1)");
    const double tail = std::log(1e-12) / std::log(rho_max);
    return R + static_cast<int>(std::ceil(tail + 2.0 * T * v_guard));
}

void TimeSeries::record(const LatticeState& s, double t, double anchor_hint) {
    TimeSample ts;
    ts.t = t;
    const double anchor = samples.empty() ? anchor_hint : samples.back().mean_y;
    const Moments m = position_moments(s, anchor);
    ts.mean_x = m.mean_x;
    ts.mean_y = m.mean_y;
    ts.var_x = m.var_x;
    ts.var_y = m.var_y;
    ts.norm = s.norm();
    ts.boundary_mass = stripbloch::boundary_mass(s, boundary_window);
    ts.chi_mass.reserve(chi_velocities.size());
    for (double v : chi_velocities) ts.chi_mass.push_back(chi_vt_mass(s, v, t));
    samples.push_back(std::move(ts));
}

namespace {

struct Fit {
    double slope = 0.0;
    double r2 = 1.0;
};

Fit fit_line(const std::vector<double>& t, const std::vector<double>& x) {
    const int n = static_cast<int>(t.size());
    double tbar = 0.0, xbar = 0.0;
    for (int i = 0; i < n; ++i) {
        tbar += t[i];
        xbar += x[i];
    }
    tbar /= n;
    xbar /= n;
    double stt = 0.0, stx = 0.0, sxx = 0.0;
    for (int i = 0; i < n; ++i) {
        stt += (t[i] - tbar) * (t[i] - tbar);
        stx += (t[i] - tbar) * (x[i] - xbar);
        sxx += (x[i] - xbar) * (x[i] - xbar);
    }
    if (stt <= 0.0) throw NumericalError("degenerate time grid in transport fit");
    Fit f;
    f.slope = stx / stt;
    if (sxx > 1e-24 * n) {
        double res = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d = x[i] - xbar - f.slope * (t[i] - tbar);
            res += d * d;
        }
        f.r2 = 1.0 - res / sxx;
    }
    return f;
}

}  // namespace

SlopeFit transport_slopes(const TimeSeries& series, double t_lo, double t_hi) {
    std::vector<double> t, mx, my;
    for (const TimeSample& ts : series.samples) {
        if (ts.t < t_lo || ts.t > t_hi) continue;
        if (ts.boundary_mass > 1e-6) {
            std::ostringstream msg;
            msg << "boundary mass " << ts.boundary_mass << " at t = " << ts.t
                << " invalidates the transport window";
            throw BoundaryContamination(msg.str());
        }
        t.push_back(ts.t);
        mx.push_back(ts.mean_x);
        my.push_back(ts.mean_y);
    }
    if (t.size() < 10) {
        std::ostringstream msg;
        msg << "transport fit needs at least 10 samples, window holds " << t.size();
        throw InsufficientSamples(msg.str());
    }
    const Fit fx = fit_line(t, mx);
    const Fit fy = fit_line(t, my);
    SlopeFit out;
    out.vel_x = fx.slope;
    out.vel_y = fy.slope;
    out.r2_x = fx.r2;
    out.r2_y = fy.r2;
    out.n = static_cast<int>(t.size());
    out.t_lo = t_lo;
    out.t_hi = t_hi;
    return out;
}

}  // namespace stripbloch
