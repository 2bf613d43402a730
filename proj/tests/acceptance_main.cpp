// Full-scale acceptance checks. Each prints one [PASS]/[FAIL] line; the
// process exit code is the number of failures. Slower than the unit tests:
// the oracle sweep and the scattering run take a few minutes together.
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "stripbloch/dynamics.hpp"
#include "stripbloch/errors.hpp"
#include "stripbloch/lattice.hpp"
#include "stripbloch/report.hpp"
#include "stripbloch/run.hpp"
#include "stripbloch/scattering.hpp"
#include "stripbloch/spectrum.hpp"
#include "stripbloch/transfer.hpp"

using namespace stripbloch;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(const std::string& tag, const std::function<Outcome()>& fn) {
    const double t0 = now_s();
    Outcome o;
    try {
        o = fn();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %-46s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", tag.c_str(),
                o.detail.c_str(), now_s() - t0);
    std::fflush(stdout);
    if (!o.pass) ++failures;
}

// eigenvalues-only zheevd; the sweep below never needs the dense vectors
Eigen::VectorXd dense_evals(Eigen::MatrixXcd h) {
    const int n = static_cast<int>(h.rows());
    Eigen::VectorXd w(n);
    const int info =
        LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n, h.data(), n, w.data());
    if (info != 0)
        throw std::runtime_error("zheevd failed, info = " + std::to_string(info));
    return w;
}

Eigen::VectorXcd cos2_weights(const std::vector<double>& k_grid, double k0,
                              double width, int L) {
    const double period = 2.0 * kPi / L;
    Eigen::VectorXcd w = Eigen::VectorXcd::Zero(k_grid.size());
    for (size_t m = 0; m < k_grid.size(); ++m) {
        double d = k_grid[m] - k0;
        d -= period * std::round(d / period);
        const double u = d / width;
        if (std::abs(u) < 1.0) {
            const double c = std::cos(0.5 * kPi * u);
            w(m) = c * c;
        }
    }
    return w;
}

// results shared between paired criteria (3/4 and 5/6)
struct SweepOut {
    bool ran = false;
    double worst_match = 0.0;
    double worst_resid = 0.0;
    double worst_tail = 0.0;
    int n_pairs = 0;
    int n_embedded = 0;
    int n_wide = 0;
};

struct TransportOut {
    bool ran = false;
    SlopeFit fit;
    TransportPrediction pred;
    double max_boundary = 0.0;
    double chi_half = 0.0;
};

}  // namespace

int main() {
    std::printf("acceptance checks, full scale\n");

    // shared pool of randomized strip potentials (criteria 3, 4 and 9)
    oracle::Rng pot_rng(90210);
    std::vector<StripPotential> pots;
    for (int i = 0; i < 16; ++i) pots.push_back(oracle::random_potential(pot_rng));
    for (int i = 0; i < 4; ++i)
        pots.push_back(oracle::random_y_constant_potential(pot_rng));

    SweepOut sweep;
    TransportOut transport;

    report("criterion 1: transfer-matrix identities", [] {
        oracle::Rng rng(4242);
        double worst = 0.0;
        for (int s = 0; s < 10000; ++s) {
            const double E = rng.uniform(-6.0, 6.0);
            const double k = rng.uniform(0.0, 2.0 * kPi);
            const int L = rng.integer(1, 3);
            const ModeClassification mc = classify_modes(E, k, L);
            for (int j = 0; j < L; ++j) {
                if (mc.kind[j] != ModeKind::Hyperbolic) continue;
                const std::complex<double> mp = mc.mu_plus(j), mm = mc.mu_minus(j);
                worst = std::max(worst, std::abs(mp * mm - 1.0));
                worst = std::max(worst, std::abs(mp + mm - mc.e(j)));
            }
            const Eigen::MatrixXcd t0 = build_t0(E, k, L);
            worst = std::max(worst, std::abs(t0.determinant() - 1.0));
            const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(t0, false);
            for (int j = 0; j < L; ++j) {
                const std::complex<double> disc =
                    std::sqrt(std::complex<double>(mc.e(j) * mc.e(j) - 4.0));
                for (const std::complex<double>& root :
                     {0.5 * (mc.e(j) + disc), 0.5 * (mc.e(j) - disc)}) {
                    double best = 1e300;
                    for (int i = 0; i < es.eigenvalues().size(); ++i)
                        best = std::min(best, std::abs(es.eigenvalues()(i) - root));
                    worst = std::max(worst, best);
                }
            }
        }
        return Outcome{worst <= 1e-9, "worst deviation " + fmt(worst)};
    });

    report("criterion 2: single-defect closed form", [] {
        const double t0 = now_s();
        bool shape_ok = true;
        double worst_e = 0.0, worst_ratio = 0.0;
        for (const double lam : {0.5, 1.5, 3.0}) {
            const StripPotential V = oracle::single_site_potential(-lam);
            const std::vector<double> kg = fiber_k_grid(1, 512);
            const auto curves = trace_all_bands(V, kg, ScanParams{});
            if (curves.size() != 1 || curves[0].valid_count() != 512) {
                shape_ok = false;
                continue;
            }
            const double s = std::sqrt(lam * lam + 4.0);
            const double mu = (lam - s) / 2.0;  // decaying root of mu + 1/mu = -s
            for (int m = 0; m < 512; ++m) {
                const FiberEigenpair& p = curves[0].samples[m].pair;
                worst_e = std::max(worst_e,
                                   std::abs(p.E - (2.0 * std::cos(kg[m]) - s)));
                if (p.embedded) shape_ok = false;
                const std::complex<double> ratio =
                    p.profile.value(1)(0) / p.profile.value(0)(0);
                worst_ratio = std::max(worst_ratio, std::abs(ratio - mu));
            }
        }
        const double secs = now_s() - t0;
        return Outcome{shape_ok && worst_e <= 1e-8 && worst_ratio <= 1e-8 &&
                           secs < 30.0,
                       "E err " + fmt(worst_e) + ", ratio err " + fmt(worst_ratio)};
    });

    report("criterion 3: agreement with dense truncation", [&] {
        const double t0 = now_s();
        oracle::Rng rng(2025);
        for (const StripPotential& V : pots) {
            for (int t = 0; t < 10; ++t) {
                const double k = rng.uniform(0.0, 2.0 * kPi / V.L);
                const ScanResult res = scan_fiber_eigenvalues(V, k, ScanParams{});
                Eigen::VectorXd w;
                bool have_dense = false;
                for (const FiberEigenpair& p : res.eigenpairs) {
                    ++sweep.n_pairs;
                    sweep.worst_resid = std::max(sweep.worst_resid, p.residual);
                    if (p.embedded) {
                        ++sweep.n_embedded;
                        sweep.worst_tail =
                            std::max(sweep.worst_tail, p.profile.mass_beyond(75));
                        continue;
                    }
                    // The Dirichlet box at |x| <= 150 can only represent
                    // states that live inside it; near-band-edge states with
                    // decay rates ~0.99 keep percent-level mass beyond the
                    // walls and the truncated eigenvalue shifts by far more
                    // than the matching tolerance. Compare the states the
                    // oracle is valid for and count the rest.
                    if (p.profile.mass_beyond(120) > 1e-9) {
                        ++sweep.n_wide;
                        continue;
                    }
                    if (!have_dense) {
                        w = dense_evals(oracle::dense_fiber_matrix(V, k, 150));
                        have_dense = true;
                    }
                    double best = 1e300;
                    for (int i = 0; i < w.size(); ++i)
                        best = std::min(best, std::abs(p.E - w(i)));
                    sweep.worst_match = std::max(sweep.worst_match, best);
                }
            }
        }
        sweep.ran = true;
        const double secs = now_s() - t0;
        return Outcome{sweep.worst_match <= 1e-6 && sweep.worst_resid <= 1e-7 &&
                           secs < 300.0,
                       std::to_string(sweep.n_pairs) + " eigenvalues (" +
                           std::to_string(sweep.n_wide) +
                           " wider than the oracle box), worst match " +
                           fmt(sweep.worst_match) + ", worst residual " +
                           fmt(sweep.worst_resid)};
    });

    report("criterion 4: embedded-state certificates", [&] {
        if (!sweep.ran) return Outcome{false, "sweep of criterion 3 did not run"};
        const std::string detail =
            std::to_string(sweep.n_embedded) + " embedded states, worst tail " +
            fmt(sweep.worst_tail) + (sweep.n_embedded == 0 ? " (vacuous)" : "");
        return Outcome{sweep.worst_tail <= 1e-10 && sweep.worst_resid <= 1e-7,
                       detail};
    });

    report("criterion 5: ballistic transport along the edge", [&] {
        const double t0 = now_s();
        const StripPotential V = oracle::single_site_potential(-1.5);
        const int M = 256;
        const std::vector<double> kg = fiber_k_grid(1, M);
        auto curves = trace_all_bands(V, kg, ScanParams{});
        if (curves.size() != 1 || curves[0].valid_count() != M)
            return Outcome{false, "expected one fully certified band"};
        compute_group_velocity(curves[0]);
        const Eigen::VectorXcd wts = cos2_weights(kg, kPi / 2.0, 0.6, 1);
        transport.pred = predict_transport(curves[0], wts);

        double rho = 0.0;
        for (int m = 0; m < M; ++m)
            if (std::abs(wts(m)) > 0 && curves[0].samples[m].valid)
                rho = std::max(rho, curves[0].samples[m].pair.profile.decay_rate());

        const double T = 60.0;
        Box box;
        box.x_half = transport_x_half(V.R, rho, T);
        box.ny = 256;
        box.x_boundary = Boundary::Dirichlet;
        box.y_boundary = Boundary::Periodic;
        const int center_y = 128;

        LatticeState state = synthesize_surface_state(curves[0], wts, box, center_y);
        const Hamiltonian2D h(V, box);
        TimeSeries series;
        series.chi_velocities = {0.5, 1.0};
        series.record(state, 0.0, center_y);
        for (int step = 1; step <= 60; ++step) {
            evolve(state, h, 1.0);
            series.record(state, step, std::nan(""));
        }
        transport.fit = transport_slopes(series, T / 2.0, T);
        for (const TimeSample& ts : series.samples)
            transport.max_boundary = std::max(transport.max_boundary, ts.boundary_mass);
        transport.chi_half = series.samples.back().chi_mass[0];
        transport.ran = true;

        const double rel = std::abs(transport.fit.vel_y - transport.pred.mean_velocity) /
                           std::abs(transport.pred.mean_velocity);
        const double secs = now_s() - t0;
        return Outcome{rel <= 0.02 && std::abs(transport.fit.vel_x) <= 1e-3 &&
                           transport.chi_half <= 1e-4 &&
                           transport.max_boundary <= 1e-6 && secs < 300.0,
                       "vel_Y " + fmt(transport.fit.vel_y) + " vs " +
                           fmt(transport.pred.mean_velocity) + " (rel " + fmt(rel) +
                           "), chi " + fmt(transport.chi_half) + ", boundary " +
                           fmt(transport.max_boundary)};
    });

    report("criterion 6: no transport across the strip", [&] {
        if (!transport.ran) return Outcome{false, "transport run did not complete"};
        return Outcome{std::abs(transport.fit.vel_x) <= 1e-3 &&
                           transport.fit.r2_y >= 0.999,
                       "|vel_X| " + fmt(std::abs(transport.fit.vel_x)) + ", r2_Y " +
                           fmt(transport.fit.r2_y)};
    });

    report("criterion 7: scattering asymptotic velocity", [] {
        const StripPotential V = oracle::single_site_potential(-1.5);
        DaSpec spec;
        spec.nx = 1025;
        spec.ny = 512;
        spec.center_y = 300;
        const DaState da = make_da_state(spec);
        const VelocityReport rep =
            scattering_velocity_check(da, V, {25.0, 50.0, 100.0}, 1e-5);
        const double i0 = cook_integrand(da, V, 0.0);
        const double i40 = cook_integrand(da, V, 40.0);
        const bool decreasing = rep.r_x[0] > rep.r_x[1] && rep.r_x[1] > rep.r_x[2] &&
                                rep.r_y[0] > rep.r_y[1] && rep.r_y[1] > rep.r_y[2];
        return Outcome{decreasing && rep.r_x[2] <= 0.05 && rep.r_y[2] <= 0.05 &&
                           i40 <= 1e-8 * i0 && rep.isometry_drift <= 1e-10,
                       "r(100) = (" + fmt(rep.r_x[2]) + ", " + fmt(rep.r_y[2]) +
                           "), cook ratio " + fmt(i40 / i0) + ", drift " +
                           fmt(rep.isometry_drift)};
    });

    report("criterion 8: free-evolution oracles", [] {
        // exact ballistic variance of a point source
        Box ring{80, 1, Boundary::Periodic, Boundary::Periodic};
        LatticeState s = make_state(ring);
        s.amp(80, 0) = 1.0;
        double worst_rel = 0.0, t = 0.0;
        for (const double dt : {5.0, 5.0, 10.0}) {
            free_evolve(s, dt);
            t += dt;
            const Moments mom = position_moments(s, 0.0);
            worst_rel = std::max(worst_rel, std::abs(mom.var_x / (2.0 * t * t) - 1.0));
        }

        // propagator drift over 10^3 steps and the semigroup law
        const StripPotential V = oracle::single_site_potential(-1.5);
        Box box{16, 16, Boundary::Dirichlet, Boundary::Periodic};
        LatticeState base = make_state(box);
        oracle::Rng rng(31415);
        for (int i = 0; i < box.nx(); ++i)
            for (int j = 0; j < box.ny; ++j)
                base.amp(i, j) =
                    std::complex<double>(rng.uniform(-1, 1), rng.uniform(-1, 1));
        base.amp /= base.amp.norm();
        const Hamiltonian2D h(V, box);

        LatticeState a = base;
        for (int step = 0; step < 1000; ++step) evolve(a, h, 0.05);
        const double drift = std::abs(a.norm() - 1.0);

        LatticeState b = base;
        evolve(b, h, 3.3);
        evolve(b, h, 4.7);
        LatticeState c = base;
        evolve(c, h, 8.0);
        const double comp = (b.amp - c.amp).norm();

        return Outcome{worst_rel <= 1e-6 && drift <= 1e-10 && comp <= 1e-9,
                       "var rel " + fmt(worst_rel) + ", drift " + fmt(drift) +
                           ", composition " + fmt(comp)};
    });

    report("criterion 9: no flat bands", [&] {
        std::vector<StripPotential> all = pots;
        for (const double lam : {0.5, 1.5, 3.0})
            all.push_back(oracle::single_site_potential(-lam));
        int n_curves = 0, n_stubs = 0;
        bool any_constant = false;
        double min_tv = 1e300;
        for (const StripPotential& V : all) {
            const auto curves =
                trace_all_bands(V, fiber_k_grid(V.L, 128), ScanParams{});
            for (const EigenCurve& c : curves) {
                // constancy needs at least two certified samples; curves
                // pinched between thresholds within one grid cell are vacuous
                if (c.valid_count() < 2) {
                    ++n_stubs;
                    continue;
                }
                const NonconstancyReport nc = nonconstancy_check(c);
                ++n_curves;
                any_constant = any_constant || nc.is_constant;
                min_tv = std::min(min_tv, nc.total_variation);
            }
        }
        return Outcome{n_curves > 0 && !any_constant && min_tv >= 1e-6,
                       std::to_string(n_curves) + " curves (" +
                           std::to_string(n_stubs) +
                           " single-sample stubs), min variation " + fmt(min_tv)};
    });

    report("criterion 10: byte-identical reruns", [] {
        const fs::path base = fs::current_path() / "acceptance_scratch";
        fs::remove_all(base);
        fs::create_directories(base);
        for (const char* leaf : {"a", "b"}) {
            const fs::path cfg_path = base / (std::string("cfg_") + leaf + ".json");
            write_text(cfg_path,
                       json{{"seed", 11},
                            {"output_dir", (base / leaf).string()}}
                               .dump(2) +
                           "\n");
            if (run(load_run_config(cfg_path, "validate")) != 0)
                return Outcome{false, "validate run failed"};
        }
        // manifests carry wall-time, so compare every other artifact
        std::vector<std::string> names;
        for (const auto& entry : fs::directory_iterator(base / "a"))
            names.push_back(entry.path().filename().string());
        std::sort(names.begin(), names.end());
        int compared = 0;
        for (const std::string& name : names) {
            if (name == "manifest.json") continue;
            if (!fs::exists(base / "b" / name))
                return Outcome{false, name + " missing from the rerun"};
            if (read_text(base / "a" / name) != read_text(base / "b" / name))
                return Outcome{false, name + " differs between reruns"};
            ++compared;
        }
        return Outcome{compared > 0, std::to_string(compared) +
                                         " artifacts byte-identical across reruns"};
    });

    report("invariant: surface vs scattering orthogonality", [] {
        const StripPotential V = oracle::single_site_potential(-1.5);
        const int M = 192;
        const std::vector<double> kg = fiber_k_grid(1, M);
        auto curves = trace_all_bands(V, kg, ScanParams{});
        if (curves.size() != 1) return Outcome{false, "expected one band"};
        Box box{128, M, Boundary::Periodic, Boundary::Periodic};
        const LatticeState surf = synthesize_surface_state(
            curves[0], cos2_weights(kg, kPi / 2.0, 0.6, 1), box, 96);

        DaSpec spec;
        spec.nx = 257;
        spec.ny = M;
        spec.center_y = 96;
        const LatticeState da = embed(make_da_state(spec));
        const Hamiltonian2D h(V, box);
        const WaveOpResult wr = wave_operator_apply(da, h, 20.0, 1e-3);
        const double overlap =
            std::abs((surf.amp.conjugate().array() * wr.state.amp.array()).sum());
        return Outcome{wr.converged && overlap <= 0.02,
                       "overlap " + fmt(overlap) + ", gap " + fmt(wr.cauchy_gap)};
    });

    std::printf("%d of 11 checks failed\n", failures);
    return failures;
}
