#include "stripbloch/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "stripbloch/errors.hpp"
#include "stripbloch/fiber.hpp"

namespace stripbloch {

namespace {

using cplx = std::complex<double>;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kBig = 1e300;

double nan_to_big(double x) { return std::isnan(x) ? kBig : x; }

// Golden-section minimum of f on [a, b], run down to floating-point
// resolution of the abscissa; f may return kBig on refused points.
struct GoldenResult {
    double x = 0.0;
    double f = kBig;
};

template <class F>
GoldenResult golden_min(F f, double a, double b) {
    static const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    static const double invphi2 = (3.0 - std::sqrt(5.0)) / 2.0;
    double x1 = a + invphi2 * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 200; ++it) {
        const double tiny = 1e-15 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
        if (b - a <= tiny) break;
        if (f1 <= f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = a + invphi2 * (b - a);
            f1 = f(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    GoldenResult r;
    r.x = f1 <= f2 ? x1 : x2;
    r.f = std::min(f1, f2);
    return r;
}

std::optional<FiberEigenpair> certify_candidate(const StripPotential& V, double k,
                                                double E, const ScanParams& p) {
    TransferContext ctx;
    try {
        ctx = build_context(E, k, V, p.eps_thr);
    } catch (const NumericalError&) {
        return std::nullopt;
    }
    if (ctx.sigma_min > p.accept_tol) return std::nullopt;

    const int d = static_cast<int>(ctx.singular_values.size());
    int mult = 0;
    for (int i = d - 1; i >= 0 && ctx.singular_values(i) <= p.accept_tol; --i) ++mult;

    FiberEigenpair pair;
    pair.k = k;
    pair.E = E;
    pair.multiplicity = mult;
    pair.sigma_min = ctx.sigma_min;
    pair.kernel_vectors.resize(2 * V.L, mult);
    for (int t = 0; t < mult; ++t)
        pair.kernel_vectors.col(t) = ctx.basis_minus * ctx.svd_v.col(d - 1 - t);
    pair.profile = reconstruct_eigenvector(ctx, ctx.svd_v.col(d - 1), V);
    pair.residual = eigen_residual(pair.profile, V);
    if (pair.residual > p.residual_tol) return std::nullopt;
    pair.embedded = is_embedded(E, k, V.L);
    return pair;
}

struct RefineOutcome {
    bool certified = false;
    bool threshold_in_bracket = false;
    bool at_edge = false;       // minimizer pinned to a bracket end
    double E = kNaN;
    FiberEigenpair pair;
};

RefineOutcome refine_and_certify(const StripPotential& V, double k, double a,
                                 double b, const ScanParams& p) {
    RefineOutcome out;
    out.threshold_in_bracket = !threshold_energies(k, V.L, a, b).empty();
    auto f = [&](double E) { return nan_to_big(singular_value_at(V, E, k, p.eps_thr)); };
    const GoldenResult g = golden_min(f, a, b);
    out.E = g.x;
    out.at_edge = (g.x - a) < 0.02 * (b - a) || (b - g.x) < 0.02 * (b - a);
    if (g.f >= kBig) return out;
    auto pair = certify_candidate(V, k, g.x, p);
    if (!pair) return out;
    out.certified = true;
    out.pair = std::move(*pair);
    return out;
}

}  // namespace

// --- BoundProfile ------------------------------------------------------------

Eigen::VectorXcd BoundProfile::value(int x) const {
    if (x >= x_lo && x <= x_hi) return window.col(x - x_lo);
    const int d = static_cast<int>(mu.size());
    const int s = x < x_lo ? x_lo - x : x - x_hi;
    const Eigen::VectorXcd& c = x < x_lo ? left_c : right_c;
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(L);
    for (int t = 0; t < d; ++t) out += c(t) * std::pow(mu(t), s) * modes.col(t);
    return out;
}

double BoundProfile::squared_norm() const {
    double total = window.squaredNorm();
    for (int t = 0; t < mu.size(); ++t) {
        const double q = std::norm(mu(t));
        total += (std::norm(left_c(t)) + std::norm(right_c(t))) * q / (1.0 - q);
    }
    return total;
}

double BoundProfile::mass_beyond(int X) const {
    double total = 0.0;
    for (int i = 0; i < window.cols(); ++i)
        if (std::abs(x_lo + i) > X) total += window.col(i).squaredNorm();
    const int s_left = std::max(1, X + x_lo + 1);   // |x_lo - s| > X
    const int s_right = std::max(1, X - x_hi + 1);  // |x_hi + s| > X
    for (int t = 0; t < mu.size(); ++t) {
        const double q = std::norm(mu(t));
        total += std::norm(left_c(t)) * std::pow(q, s_left) / (1.0 - q);
        total += std::norm(right_c(t)) * std::pow(q, s_right) / (1.0 - q);
    }
    return total;
}

double BoundProfile::decay_rate() const {
    double r = 0.0;
    for (int t = 0; t < mu.size(); ++t) r = std::max(r, std::abs(mu(t)));
    return r;
}

void BoundProfile::scale(cplx c) {
    window *= c;
    left_c *= c;
    right_c *= c;
}

// --- classification helpers ---------------------------------------------------

bool is_embedded(double E, double k, int L) {
    for (int j = 0; j < L; ++j)
        if (std::abs(mode_energy(E, k, j, L)) <= 2.0) return true;
    return false;
}

std::vector<double> threshold_energies(double k, int L, double e_lo, double e_hi) {
    std::vector<double> out;
    for (int j = 0; j < L; ++j) {
        const double base = 2.0 * std::cos(k + 2.0 * M_PI * j / L);
        for (double t : {base - 2.0, base + 2.0})
            if (t >= e_lo && t <= e_hi) out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](double a, double b) { return std::abs(a - b) <= 1e-12; }),
              out.end());
    return out;
}

double singular_value_at(const StripPotential& V, double E, double k, double eps_thr) {
    const ModeClassification mc = classify_modes(E, k, V.L, eps_thr);
    if (mc.any_threshold() || mc.n_hyperbolic == 0) return kNaN;
    return build_context(E, k, V, eps_thr).sigma_min;
}

// --- reconstruction and residual ----------------------------------------------

BoundProfile reconstruct_eigenvector(const TransferContext& ctx,
                                     const Eigen::VectorXcd& kernel,
                                     const StripPotential& V) {
    const int L = V.L, R = V.R;
    if (kernel.size() != ctx.basis_minus.cols())
        throw ConfigError("reconstruct_eigenvector: kernel size does not match "
                          "the decaying-subspace dimension");
    Eigen::VectorXcd psi = ctx.basis_minus * kernel;  // (psi_{-R}, psi_{-R-1})
    const double nrm = psi.norm();
    if (nrm == 0.0)
        throw NumericalError("reconstruct_eigenvector: zero kernel vector");
    psi /= nrm;

    BoundProfile prof;
    prof.k = ctx.k;
    prof.E = ctx.E;
    prof.L = L;
    prof.x_lo = -R - 1;
    prof.x_hi = R + 1;
    prof.window.resize(L, 2 * R + 3);

    Eigen::VectorXcd below = psi.tail(L);  // psi_{-R-1}
    Eigen::VectorXcd cur = psi.head(L);    // psi_{-R}
    prof.window.col(0) = below;
    prof.window.col(1) = cur;
    const Eigen::MatrixXcd dk = delta_k_matrix(L, ctx.k);
    for (int x = -R; x <= R; ++x) {
        Eigen::VectorXcd next = ctx.E * cur - dk * cur - below;
        for (int j = 0; j < L; ++j) next(j) -= V.value(x, j) * cur(j);
        prof.window.col(x + R + 2) = next;
        below = cur;
        cur = next;
    }

    const DeltaKEigen basis = delta_k_eigenbasis(L, ctx.k);
    const int d = ctx.modes.n_hyperbolic;
    prof.mu.resize(d);
    prof.modes.resize(L, d);
    int t = 0;
    for (int j = 0; j < L; ++j) {
        if (ctx.modes.kind[j] != ModeKind::Hyperbolic) continue;
        prof.mu(t) = ctx.modes.mu_plus(j);
        prof.modes.col(t) = basis.vecs.col(j);
        ++t;
    }
    prof.left_c = prof.modes.adjoint() * prof.window.col(0);
    prof.right_c = prof.modes.adjoint() * prof.window.col(prof.window.cols() - 1);

    prof.scale(1.0 / std::sqrt(prof.squared_norm()));
    return prof;
}

double eigen_residual(const BoundProfile& prof, const StripPotential& V) {
    const Eigen::MatrixXcd dk = delta_k_matrix(prof.L, prof.k);
    double num = 0.0;
    for (int x = prof.x_lo - 2; x <= prof.x_hi + 2; ++x) {
        const Eigen::VectorXcd psi0 = prof.value(x);
        Eigen::VectorXcd r = prof.value(x + 1) + prof.value(x - 1) + dk * psi0
                             - prof.E * psi0;
        for (int j = 0; j < prof.L; ++j) r(j) += V.value(x, j) * psi0(j);
        num += r.squaredNorm();
    }
    return std::sqrt(num / prof.squared_norm());
}

// --- scan ----------------------------------------------------------------------

ScanResult scan_fiber_eigenvalues(const StripPotential& V, double k,
                                  const ScanParams& p) {
    if (!(p.e_lo < p.e_hi) || !(p.grid_step > 0.0))
        throw ConfigError("scan_fiber_eigenvalues: need e_lo < e_hi and grid_step > 0");

    ScanResult out;
    for (double t : threshold_energies(k, V.L, p.e_lo - 1.0, p.e_hi + 1.0))
        if (t + p.eps_thr >= p.e_lo && t - p.eps_thr <= p.e_hi)
            out.skipped.emplace_back(t - p.eps_thr, t + p.eps_thr);

    const int n = static_cast<int>(std::floor((p.e_hi - p.e_lo) / p.grid_step)) + 1;
    std::vector<double> sig(n);
    for (int i = 0; i < n; ++i)
        sig[i] = nan_to_big(singular_value_at(V, p.e_lo + i * p.grid_step, k, p.eps_thr));

    auto grid_e = [&](int i) { return p.e_lo + i * p.grid_step; };
    for (int i = 0; i < n; ++i) {
        if (sig[i] >= kBig) continue;
        const double lhs = i > 0 ? sig[i - 1] : kBig;
        const double rhs = i + 1 < n ? sig[i + 1] : kBig;
        if (!(sig[i] < lhs && sig[i] <= rhs)) continue;

        const double a = i > 0 ? grid_e(i - 1) : grid_e(i);
        const double b = i + 1 < n ? grid_e(i + 1) : grid_e(i);
        if (!(a < b)) continue;
        const RefineOutcome r = refine_and_certify(V, k, a, b, p);
        if (!r.certified) continue;
        const bool dup = !out.eigenpairs.empty() &&
                         std::abs(out.eigenpairs.back().E - r.pair.E) <= 1e-10;
        if (!dup) out.eigenpairs.push_back(r.pair);
    }
    return out;
}

// --- curves ----------------------------------------------------------------------

int EigenCurve::valid_count() const {
    int n = 0;
    for (const auto& s : samples) n += s.valid ? 1 : 0;
    return n;
}

EigenCurve trace_band(const StripPotential& V, const std::vector<double>& k_grid,
                      int seed_index, double seed_E, const ScanParams& p) {
    const int M = static_cast<int>(k_grid.size());
    if (M == 0 || seed_index < 0 || seed_index >= M)
        throw ConfigError("trace_band: seed index outside k grid");

    EigenCurve c;
    c.k_grid = k_grid;
    c.samples.resize(M);
    c.dEdk.assign(M, kNaN);

    // Scan-refined seeds are accurate to refine_tol, so when the forgiving
    // wide bracket trips over a nearby threshold or a neighboring branch,
    // retry at the scan's own resolution before giving up.
    RefineOutcome seed;
    for (const double h : {std::max(0.02, 10.0 * p.grid_step), 2.0 * p.grid_step,
                           0.2 * p.grid_step}) {
        seed = refine_and_certify(V, k_grid[seed_index], seed_E - h, seed_E + h, p);
        if (seed.certified) break;
    }
    if (!seed.certified)
        throw NumericalError("trace_band: seed eigenvalue does not certify at k index "
                             + std::to_string(seed_index));
    c.samples[seed_index].valid = true;
    c.samples[seed_index].pair = seed.pair;

    for (int dir : {+1, -1}) {
        double prev = seed.pair.E;
        double prev2 = kNaN;
        for (int i = seed_index + dir; i >= 0 && i < M; i += dir) {
            const double pred = std::isnan(prev2) ? prev : 2.0 * prev - prev2;
            // keep the bracket under 2x the per-step motion: at a transversal
            // crossing the partner branch sits 2|dE| from the prediction, and
            // a wider bracket would let the refiner jump onto it.  The first
            // step has no motion estimate; |dE/dk| <= |d Delta_k/dk| = 2
            // bounds it by the grid spacing instead.
            const double dk = std::abs(k_grid[i] - k_grid[i - dir]);
            double h = std::isnan(prev2) ? std::max(0.05, 2.5 * dk)
                                         : std::max(1.5 * std::abs(prev - prev2), 0.01);
            RefineOutcome r;
            for (int attempt = 0; attempt < 3; ++attempt) {
                r = refine_and_certify(V, k_grid[i], pred - h, pred + h, p);
                if (r.certified || !r.at_edge) break;
                h *= 2.0;  // minimum pinned to the bracket end, widen and retry
            }
            if (!r.certified) {
                SingularPoint sp;
                sp.index = i;
                sp.k = k_grid[i];
                sp.reason = r.threshold_in_bracket ? "threshold" : "lost";
                c.singular_points.push_back(sp);
                break;
            }
            c.samples[i].valid = true;
            c.samples[i].pair = r.pair;
            prev2 = prev;
            prev = r.pair.E;
        }
    }
    std::sort(c.singular_points.begin(), c.singular_points.end(),
              [](const SingularPoint& a, const SingularPoint& b) { return a.index < b.index; });
    return c;
}

void compute_group_velocity(EigenCurve& c) {
    const int M = static_cast<int>(c.samples.size());
    c.dEdk.assign(M, kNaN);
    if (c.valid_count() < 3)
        throw InsufficientSamples("compute_group_velocity: fewer than 3 valid samples");

    auto E = [&](int i) { return c.samples[i].pair.E; };
    int i = 0;
    while (i < M) {
        if (!c.samples[i].valid) { ++i; continue; }
        int j = i;
        while (j + 1 < M && c.samples[j + 1].valid) ++j;
        const int len = j - i + 1;
        if (len >= 3) {
            const double h = c.k_grid[i + 1] - c.k_grid[i];
            c.dEdk[i] = (-3.0 * E(i) + 4.0 * E(i + 1) - E(i + 2)) / (2.0 * h);
            c.dEdk[j] = (3.0 * E(j) - 4.0 * E(j - 1) + E(j - 2)) / (2.0 * h);
            for (int m = i + 1; m < j; ++m)
                c.dEdk[m] = (E(m + 1) - E(m - 1)) / (2.0 * h);
        }
        i = j + 1;
    }
}

NonconstancyReport nonconstancy_check(const EigenCurve& c) {
    NonconstancyReport rep;
    bool first = true;
    const int M = static_cast<int>(c.samples.size());
    for (int i = 0; i < M; ++i) {
        if (!c.samples[i].valid) continue;
        const double e = c.samples[i].pair.E;
        if (first) {
            rep.e_min = rep.e_max = e;
            first = false;
        } else {
            rep.e_min = std::min(rep.e_min, e);
            rep.e_max = std::max(rep.e_max, e);
        }
        if (i + 1 < M && c.samples[i + 1].valid)
            rep.total_variation += std::abs(c.samples[i + 1].pair.E - e);
    }
    rep.is_constant = first || (rep.e_max - rep.e_min) <= 1e-10;
    return rep;
}

TransportPrediction predict_transport(const EigenCurve& curve,
                                      const Eigen::VectorXcd& weights,
                                      double support_tol) {
    const int M = static_cast<int>(curve.k_grid.size());
    if (weights.size() != M)
        throw ConfigError("predict_transport: weight vector length must match k grid");

    EigenCurve c = curve;  // derivative pass is cheap, recompute locally
    compute_group_velocity(c);

    double wsum = 0.0;
    for (int i = 0; i < M; ++i) wsum += std::norm(weights(i));
    wsum /= M;
    if (!(wsum > 0.0)) throw ConfigError("predict_transport: weights are all zero");

    TransportPrediction out;
    for (int i = 0; i < M; ++i) {
        const double w = std::norm(weights(i)) / (M * wsum);
        if (w <= support_tol) continue;
        bool near_singular = false;
        for (const auto& sp : c.singular_points)
            if (std::abs(i - sp.index) < 2) near_singular = true;
        if (!c.samples[i].valid || std::isnan(c.dEdk[i]) || near_singular)
            throw ConfigError("predict_transport: weight supported on an invalid or "
                              "singular sample at k = " + std::to_string(c.k_grid[i]));
        out.mean_velocity += c.dEdk[i] * w;
        out.velocity_norm_sq += c.dEdk[i] * c.dEdk[i] * w;
    }
    return out;
}

std::vector<EigenCurve> trace_all_bands(const StripPotential& V,
                                        const std::vector<double>& k_grid,
                                        const ScanParams& p, int seed_scans,
                                        double crossing_tol) {
    const int M = static_cast<int>(k_grid.size());
    if (M == 0) throw ConfigError("trace_all_bands: empty k grid");
    seed_scans = std::max(1, std::min(seed_scans, M));

    std::vector<EigenCurve> curves;
    for (int s = 0; s < seed_scans; ++s) {
        const int idx = static_cast<int>(static_cast<long>(s) * M / seed_scans);
        const ScanResult scan = scan_fiber_eigenvalues(V, k_grid[idx], p);
        for (const auto& pair : scan.eigenpairs) {
            bool known = false;
            for (const auto& c : curves)
                if (c.samples[idx].valid &&
                    std::abs(c.samples[idx].pair.E - pair.E) <=
                        1e-8 * std::max(1.0, std::abs(pair.E)))
                    known = true;
            if (known) continue;
            curves.push_back(trace_band(V, k_grid, idx, pair.E, p));
        }
    }

    std::sort(curves.begin(), curves.end(), [](const EigenCurve& a, const EigenCurve& b) {
        auto mean_e = [](const EigenCurve& c) {
            double s = 0.0;
            int n = 0;
            for (const auto& smp : c.samples)
                if (smp.valid) { s += smp.pair.E; ++n; }
            return n ? s / n : kBig;
        };
        return mean_e(a) < mean_e(b);
    });
    for (int i = 0; i < static_cast<int>(curves.size()); ++i) curves[i].band_index = i;

    // crossing annotation: proximity below crossing_tol, or a sign change of
    // E_a - E_b between adjacent valid k
    for (size_t a = 0; a < curves.size(); ++a) {
        for (size_t b = a + 1; b < curves.size(); ++b) {
            for (int i = 0; i < M; ++i) {
                if (!curves[a].samples[i].valid || !curves[b].samples[i].valid) continue;
                const double d = curves[a].samples[i].pair.E - curves[b].samples[i].pair.E;
                int mark = -1;
                if (std::abs(d) < crossing_tol) mark = i;
                if (i + 1 < M && curves[a].samples[i + 1].valid &&
                    curves[b].samples[i + 1].valid) {
                    const double d2 = curves[a].samples[i + 1].pair.E -
                                      curves[b].samples[i + 1].pair.E;
                    if (d * d2 < 0.0) mark = std::abs(d2) < std::abs(d) ? i + 1 : i;
                }
                if (mark < 0) continue;
                for (EigenCurve* c : {&curves[a], &curves[b]}) {
                    bool dup = false;
                    for (const auto& sp : c->singular_points)
                        if (sp.index == mark && sp.reason == "crossing") dup = true;
                    if (!dup) {
                        SingularPoint sp;
                        sp.index = mark;
                        sp.k = k_grid[mark];
                        sp.reason = "crossing";
                        c->singular_points.push_back(sp);
                    }
                }
            }
        }
    }
    for (auto& c : curves)
        std::sort(c.singular_points.begin(), c.singular_points.end(),
                  [](const SingularPoint& x, const SingularPoint& y) {
                      return x.index < y.index;
                  });
    return curves;
}

}  // namespace stripbloch
