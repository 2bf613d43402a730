#include "stripbloch/transfer.hpp"
#include "stripbloch/errors.hpp"
#include "stripbloch/fiber.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace stripbloch {

using cplx = std::complex<double>;

static double dist_to_band(cplx w) {
    // distance from w to the segment [-2, 2] on the real axis
    const double u = std::abs(w.real()), v = w.imag();
    if (u <= 2.0) return std::abs(v);
    return std::hypot(u - 2.0, v);
}

std::pair<cplx, cplx> joukowsky_inverse(cplx w, double eps) {
    if (dist_to_band(w) <= eps)
        throw ThresholdProximity("joukowsky_inverse: w within eps of [-2,2]");

    const cplx s = std::sqrt(w * w - 4.0);
    const cplx r1 = 0.5 * (w + s);
    const cplx r2 = 0.5 * (w - s);
    // keep the well-conditioned (large) root, recover the other as 1/mu so the
    // product is exactly 1
    const cplx big = std::abs(r1) >= std::abs(r2) ? r1 : r2;
    return {1.0 / big, big};
}

ModeClassification classify_modes(double E, double k, int L, double eps) {
    ModeClassification mc;
    mc.E = E;
    mc.k = k;
    mc.L = L;
    mc.e.resize(L);
    mc.kind.resize(L);
    const cplx nan(std::numeric_limits<double>::quiet_NaN(),
                   std::numeric_limits<double>::quiet_NaN());
    mc.mu_plus = Eigen::VectorXcd::Constant(L, nan);
    mc.mu_minus = Eigen::VectorXcd::Constant(L, nan);
    for (int j = 0; j < L; ++j) {
        const double e = mode_energy(E, k, j, L);
        mc.e(j) = e;
        if (std::abs(std::abs(e) - 2.0) <= eps) {
            mc.kind[j] = ModeKind::Threshold;
        } else if (std::abs(e) < 2.0) {
            mc.kind[j] = ModeKind::Elliptic;
        } else {
            mc.kind[j] = ModeKind::Hyperbolic;
            auto [mp, mm] = joukowsky_inverse(cplx(e, 0.0), eps);
            mc.mu_plus(j) = mp;
            mc.mu_minus(j) = mm;
            ++mc.n_hyperbolic;
        }
    }
    return mc;
}

Eigen::MatrixXcd build_t0(double E, double k, int L) {
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(2 * L, 2 * L);
    t.topLeftCorner(L, L) = E * Eigen::MatrixXcd::Identity(L, L) - delta_k_matrix(L, k);
    t.topRightCorner(L, L) = -Eigen::MatrixXcd::Identity(L, L);
    t.bottomLeftCorner(L, L) = Eigen::MatrixXcd::Identity(L, L);
    return t;
}

DecayingSubspaces decaying_subspaces(const ModeClassification& mc) {
    const int L = mc.L;
    const int d = mc.n_hyperbolic;
    const DeltaKEigen basis = delta_k_eigenbasis(L, mc.k);

    DecayingSubspaces out;
    out.plus.resize(2 * L, d);
    out.minus.resize(2 * L, d);
    int c = 0;
    for (int j = 0; j < L; ++j) {
        if (mc.kind[j] != ModeKind::Hyperbolic) continue;
        const Eigen::VectorXcd v = basis.vecs.col(j);
        for (int pm = 0; pm < 2; ++pm) {
            const cplx mu = pm == 0 ? mc.mu_plus(j) : mc.mu_minus(j);
            Eigen::VectorXcd col(2 * L);
            col.head(L) = mu * v;
            col.tail(L) = v;
            col /= col.norm();
            (pm == 0 ? out.plus : out.minus).col(c) = col;
        }
        ++c;
    }
    return out;
}

Eigen::MatrixXcd build_tv(double E, double k, const StripPotential& V) {
    const int L = V.L;
    const Eigen::MatrixXcd dk = delta_k_matrix(L, k);
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(L, L);

    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(2 * L, 2 * L);
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(2 * L, 2 * L);
    b.topRightCorner(L, L) = -id;
    b.bottomLeftCorner(L, L) = id;
    for (int x = -V.R; x <= V.R; ++x) { // x = -R factor applies first
        Eigen::MatrixXcd tl = E * id - dk;
        for (int j = 0; j < L; ++j) tl(j, j) -= V.value(x, j);
        b.topLeftCorner(L, L) = tl;
        m = b * m;
    }
    return m;
}

TransferContext build_context(double E, double k, const StripPotential& V, double eps) {
    TransferContext ctx;
    ctx.E = E;
    ctx.k = k;
    ctx.modes = classify_modes(E, k, V.L, eps);
    if (ctx.modes.any_threshold())
        throw ThresholdProximity("build_context: (E=" + std::to_string(E) + ", k=" +
                                 std::to_string(k) + ") within eps of a threshold curve");
    if (ctx.modes.n_hyperbolic == 0)
        throw EmptyMinusSubspace("build_context: all modes elliptic at (E=" +
                                 std::to_string(E) + ", k=" + std::to_string(k) + ")");

    ctx.t0 = build_t0(E, k, V.L);
    const DecayingSubspaces sub = decaying_subspaces(ctx.modes);
    ctx.basis_plus = sub.plus;
    ctx.basis_minus = sub.minus;
    ctx.tv = build_tv(E, k, V);

    const Eigen::MatrixXcd tvm = ctx.tv * ctx.basis_minus;
    ctx.a = tvm - ctx.basis_plus * (ctx.basis_plus.adjoint() * tvm);

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(ctx.a, Eigen::ComputeThinV);
    ctx.singular_values = svd.singularValues();
    ctx.svd_v = svd.matrixV();
    ctx.sigma_min = ctx.singular_values(ctx.singular_values.size() - 1);
    double ld = 0.0;
    for (int i = 0; i < ctx.singular_values.size(); ++i)
        ld += 2.0 * std::log(ctx.singular_values(i)); // -inf at an exact zero is fine
    ctx.log_det_asta = ld;
    return ctx;
}

} // namespace stripbloch
