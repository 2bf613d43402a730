#include "stripbloch/run.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "stripbloch/dynamics.hpp"
#include "stripbloch/errors.hpp"
#include "stripbloch/fiber.hpp"
#include "stripbloch/lattice.hpp"
#include "stripbloch/report.hpp"
#include "stripbloch/scattering.hpp"
#include "stripbloch/spectrum.hpp"
#include "stripbloch/transfer.hpp"

namespace stripbloch {

// nlohmann::json orders object keys, so every dump below is reproducible.
using json = nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// Collects outputs, digests, warnings and stage timings for the manifest.
class Emitter {
  public:
    explicit Emitter(std::filesystem::path dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::string& body) {
        write_text(dir_ / name, body);
        digests_[name] = fnv1a_hex(body);
    }

    void warn(const std::string& msg) {
        warnings_.push_back(msg);
        std::cerr << "warning: " << msg << "\n";
    }

    template <class F>
    auto stage(const std::string& name, F&& f) {
        const double t0 = now_s();
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            stages_[name] = now_s() - t0;
        } else {
            auto r = f();
            stages_[name] = now_s() - t0;
            return r;
        }
    }

    const std::filesystem::path& dir() const { return dir_; }
    const json& digests() const { return digests_; }
    const json& stages() const { return stages_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

  private:
    std::filesystem::path dir_;
    json digests_ = json::object();
    json stages_ = json::object();
    std::vector<std::string> warnings_;
};

// --- config plumbing --------------------------------------------------------

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(where + ": unknown key \"" + it.key() + "\"");
}

const json& require_key(const json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end())
        throw ConfigError(where + ": missing required key \"" + key + "\"");
    return *it;
}

double require_real(const json& j, const char* key, const std::string& where) {
    const json& v = require_key(j, key, where);
    if (!v.is_number())
        throw ConfigError(where + ": \"" + key + "\" must be a number");
    return v.get<double>();
}

int require_int(const json& j, const char* key, const std::string& where) {
    const json& v = require_key(j, key, where);
    if (!v.is_number_integer())
        throw ConfigError(where + ": \"" + key + "\" must be an integer");
    return v.get<int>();
}

double positive(double x, const char* key, const std::string& where) {
    if (!(x > 0.0))
        throw ConfigError(where + ": \"" + key + "\" must be positive");
    return x;
}

ScanParams scan_params(const json& cfg) {
    ScanParams p;
    if (!cfg.contains("scan")) return p;
    const json& s = cfg.at("scan");
    check_keys(s,
               {"e_lo", "e_hi", "grid_step", "refine_tol", "accept_tol",
                "residual_tol", "eps_thr"},
               "scan");
    p.e_lo = s.value("e_lo", p.e_lo);
    p.e_hi = s.value("e_hi", p.e_hi);
    p.grid_step = positive(s.value("grid_step", p.grid_step), "grid_step", "scan");
    p.refine_tol = positive(s.value("refine_tol", p.refine_tol), "refine_tol", "scan");
    p.accept_tol = positive(s.value("accept_tol", p.accept_tol), "accept_tol", "scan");
    p.residual_tol =
        positive(s.value("residual_tol", p.residual_tol), "residual_tol", "scan");
    p.eps_thr = positive(s.value("eps_thr", p.eps_thr), "eps_thr", "scan");
    if (!(p.e_lo < p.e_hi)) throw ConfigError("scan: e_lo must be below e_hi");
    return p;
}

json potential_json(const StripPotential& v) {
    json rows = json::array();
    for (int r = 0; r < v.values.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < v.values.cols(); ++c) row.push_back(v.values(r, c));
        rows.push_back(std::move(row));
    }
    return json{{"L", v.L}, {"R", v.R}, {"rows", std::move(rows)}};
}

double wrap_to(double x, double period) {
    return x - period * std::round(x / period);
}

// --- bands ------------------------------------------------------------------

json job_bands(const RunConfig& cfg, Emitter& em) {
    const json& raw = cfg.raw;
    const int M = require_int(raw, "M", "bands");
    if (M < 1) throw ConfigError("bands: M must be >= 1");
    const int seed_scans = raw.value("seed_scans", 4);
    const ScanParams params = scan_params(raw);
    const std::vector<double> k_grid = fiber_k_grid(cfg.potential.L, M);

    auto curves = em.stage("trace", [&] {
        return trace_all_bands(cfg.potential, k_grid, params, seed_scans);
    });

    json bands_info = json::array();
    for (EigenCurve& c : curves) {
        try {
            compute_group_velocity(c);
        } catch (const InsufficientSamples&) {
            em.warn("band " + std::to_string(c.band_index) +
                    ": too few certified samples for a group velocity");
        }
        const NonconstancyReport nc = nonconstancy_check(c);
        bands_info.push_back(json{{"band_index", c.band_index},
                                  {"valid_samples", c.valid_count()},
                                  {"singular_points", c.singular_points.size()},
                                  {"is_constant", nc.is_constant},
                                  {"total_variation", nc.total_variation},
                                  {"e_min", nc.e_min},
                                  {"e_max", nc.e_max}});
    }
    if (curves.empty()) em.warn("no point-spectrum bands found; tables are empty");

    em.stage("write", [&] {
        em.write("bands.csv", bands_csv(curves));
        em.write("singular_points.csv", singular_points_csv(curves));
        em.write("bands.dat", bands_dat(curves));
    });
    return json{{"k_points", M}, {"num_bands", curves.size()}, {"bands", bands_info}};
}

// --- eigenmodes -------------------------------------------------------------

json job_eigenmodes(const RunConfig& cfg, Emitter& em) {
    const json& raw = cfg.raw;
    const double k = require_real(raw, "k", "eigenmodes");
    const ScanParams params = scan_params(raw);

    const ScanResult res = em.stage(
        "scan", [&] { return scan_fiber_eigenvalues(cfg.potential, k, params); });

    std::ostringstream csv;
    csv << "k,E,multiplicity,sigma_min,residual,embedded,decay_rate\n";
    std::ostringstream dat;
    bool first = true;
    for (const FiberEigenpair& p : res.eigenpairs) {
        csv << format_g12(p.k) << ',' << format_g12(p.E) << ',' << p.multiplicity
            << ',' << format_g12(p.sigma_min) << ',' << format_g12(p.residual) << ','
            << (p.embedded ? 1 : 0) << ',' << format_g12(p.profile.decay_rate())
            << '\n';
        if (!first) dat << '\n';
        first = false;
        dat << "# E " << format_g12(p.E) << "\n";
        for (int x = p.profile.x_lo - 25; x <= p.profile.x_hi + 25; ++x)
            dat << x << ' ' << format_g12(p.profile.value(x).norm()) << '\n';
    }
    for (const auto& [lo, hi] : res.skipped)
        em.warn("refused E in [" + format_g12(lo) + ", " + format_g12(hi) +
                "] near a channel threshold");

    em.stage("write", [&] {
        em.write("eigenmodes.csv", csv.str());
        em.write("eigenmodes.dat", dat.str());
    });
    return json{{"k", k}, {"modes", res.eigenpairs.size()},
                {"skipped_intervals", res.skipped.size()}};
}

// --- evolve -----------------------------------------------------------------

json job_evolve(const RunConfig& cfg, Emitter& em) {
    const json& raw = cfg.raw;
    const std::string where = "evolve";
    const int M = require_int(raw, "M", where);
    const double k0 = require_real(raw, "k0", where);
    const double width = positive(require_real(raw, "width", where), "width", where);
    const double T = positive(require_real(raw, "T", where), "T", where);
    const double dt = positive(raw.value("dt", 1.0), "dt", where);
    const int band_index = raw.value("band_index", 0);
    const ScanParams params = scan_params(raw);

    const int L = cfg.potential.L;
    const int ny = L * M;
    const int center_y = raw.value("center_y", ny / 2);
    const double fit_lo = raw.value("fit_lo", T / 2);
    const double fit_hi = raw.value("fit_hi", T);

    const std::vector<double> k_grid = fiber_k_grid(L, M);
    auto curves = em.stage("trace", [&] {
        return trace_all_bands(cfg.potential, k_grid, params);
    });
    if (band_index < 0 || band_index >= static_cast<int>(curves.size()))
        throw ConfigError("evolve: band_index " + std::to_string(band_index) +
                          " out of range; found " + std::to_string(curves.size()) +
                          " bands");
    EigenCurve& curve = curves[band_index];
    compute_group_velocity(curve);

    // cosine-taper momentum weights around k0, flat zero outside
    Eigen::VectorXcd weights = Eigen::VectorXcd::Zero(M);
    for (int m = 0; m < M; ++m) {
        const double u = wrap_to(k_grid[m] - k0, 2.0 * kPi / L) / width;
        if (std::abs(u) < 1.0) {
            const double c = std::cos(0.5 * kPi * u);
            weights(m) = c * c;
        }
    }

    double rho = 0.0;
    for (int m = 0; m < M; ++m)
        if (std::abs(weights(m)) > 0 && curve.samples[m].valid)
            rho = std::max(rho, curve.samples[m].pair.profile.decay_rate());
    if (rho <= 0.0 || rho >= 1.0)
        throw NumericalError("evolve: no certified decay rate under the weights");

    Box box;
    box.x_half = raw.value("x_half", transport_x_half(cfg.potential.R, rho, T));
    box.ny = ny;
    box.x_boundary = Boundary::Dirichlet;
    box.y_boundary = Boundary::Periodic;

    LatticeState state = em.stage("synthesize", [&] {
        return synthesize_surface_state(curve, weights, box, center_y);
    });

    Hamiltonian2D h(cfg.potential, box);
    TimeSeries series;
    series.chi_velocities = {0.5, 1.0};
    series.record(state, 0.0, center_y);
    em.stage("evolve", [&] {
        double t = 0.0;
        while (t < T - 1e-12) {
            const double step = std::min(dt, T - t);
            evolve(state, h, step);
            t += step;
            series.record(state, t, std::nan(""));
        }
    });

    const SlopeFit fit = transport_slopes(series, fit_lo, fit_hi);
    const TransportPrediction pred = predict_transport(curve, weights);
    const TimeSample& last = series.samples.back();
    if (last.boundary_mass > 1e-6)
        em.warn("final boundary mass " + format_g12(last.boundary_mass));

    json slopes{
        {"box",
         {{"x_half", box.x_half},
          {"ny", box.ny},
          {"x_boundary", "dirichlet"},
          {"y_boundary", "periodic"}}},
        {"fit_window", {fit.t_lo, fit.t_hi}},
        {"measured",
         {{"vel_X", fit.vel_x},
          {"vel_Y", fit.vel_y},
          {"r2_X", fit.r2_x},
          {"r2_Y", fit.r2_y},
          {"samples", fit.n}}},
        {"predicted",
         {{"mean_velocity", pred.mean_velocity},
          {"velocity_norm_sq", pred.velocity_norm_sq}}},
        {"relative_errors",
         {{"vel_Y", std::abs(fit.vel_y - pred.mean_velocity) /
                        std::max(std::abs(pred.mean_velocity), 1e-300)},
          {"vel_X_abs", std::abs(fit.vel_x)}}}};

    em.stage("write", [&] {
        em.write("transport.csv", transport_csv(series));
        em.write("transport.dat", transport_dat(series));
        em.write("slopes.json", slopes.dump(2) + "\n");
    });
    return json{{"x_half", box.x_half},
                {"ny", ny},
                {"rho_max", rho},
                {"steps", series.samples.size() - 1},
                {"final_boundary_mass", last.boundary_mass},
                {"final_norm", last.norm}};
}

// --- scatter ----------------------------------------------------------------

json job_scatter(const RunConfig& cfg, Emitter& em) {
    const json& raw = cfg.raw;
    const std::string where = "scatter";
    DaSpec spec;
    spec.a = require_real(raw, "a", where);
    spec.center_kx = require_real(raw, "center_kx", where);
    spec.width_kx = require_real(raw, "width_kx", where);
    spec.center_ky = require_real(raw, "center_ky", where);
    spec.sigma_y = require_real(raw, "sigma_y", where);
    spec.nx = require_int(raw, "nx", where);
    spec.ny = require_int(raw, "ny", where);
    spec.center_y = require_int(raw, "center_y", where);
    spec.center_x = raw.value("center_x", 0);
    spec.taper_power = raw.value("taper_power", 12);
    const double cauchy_tol = positive(raw.value("cauchy_tol", 1e-5), "cauchy_tol", where);

    const json& tl = require_key(raw, "T_list", where);
    if (!tl.is_array() || tl.empty())
        throw ConfigError("scatter: \"T_list\" must be a nonempty array");
    std::vector<double> t_list;
    for (const json& v : tl) t_list.push_back(v.get<double>());

    json cook = raw.value("cook", json::object());
    check_keys(cook, {"t_max", "dt", "samples"}, "cook");
    const double cook_t_max = positive(cook.value("t_max", 40.0), "t_max", "cook");
    const double cook_dt = positive(cook.value("dt", 0.5), "dt", "cook");
    std::vector<double> cook_samples = {0.0, cook_t_max / 2, cook_t_max};
    if (cook.contains("samples"))
        cook_samples = cook.at("samples").get<std::vector<double>>();

    const DaState da = make_da_state(spec);
    const VelocityReport rep = em.stage("velocity", [&] {
        return scattering_velocity_check(da, cfg.potential, t_list, cauchy_tol);
    });

    json cook_rows = json::array();
    double cook_i1 = 0.0, cook_i2 = 0.0;
    em.stage("cook", [&] {
        for (double t : cook_samples)
            cook_rows.push_back(
                json{{"t", t}, {"value", cook_integrand(da, cfg.potential, t)}});
        cook_i1 = cook_integral(da, cfg.potential, cook_t_max, cook_dt);
        cook_i2 = cook_integral(da, cfg.potential, 2 * cook_t_max, cook_dt);
    });

    if (rep.cauchy_gap > cauchy_tol)
        em.warn("wave operator gap " + format_g12(rep.cauchy_gap) +
                " above tolerance " + format_g12(cauchy_tol));

    json report{{"a", spec.a},
                {"center_k", spec.center_kx},
                {"T_list", rep.t_list},
                {"r_x", rep.r_x},
                {"r_y", rep.r_y},
                {"cauchy_gap", rep.cauchy_gap},
                {"converged", rep.cauchy_gap <= cauchy_tol},
                {"isometry_drift", rep.isometry_drift},
                {"fourier_support_margin", da.fourier_support_margin},
                {"cook",
                 {{"samples", cook_rows},
                  {"t_max", cook_t_max},
                  {"dt", cook_dt},
                  {"integral", cook_i1},
                  {"integral_doubled", cook_i2},
                  {"doubling_delta", std::abs(cook_i2 - cook_i1)}}}};
    em.stage("write",
             [&] { em.write("scattering_report.json", report.dump(2) + "\n"); });
    return json{{"nx", spec.nx}, {"ny", spec.ny}, {"t_max", rep.t_max}};
}

// --- validate ---------------------------------------------------------------

struct Check {
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

Check make_check(std::string name, double measured, double tol) {
    Check c{std::move(name), measured, tol, measured <= tol};
    return c;
}

json job_validate(const RunConfig& cfg, Emitter& em) {
    std::vector<Check> checks;
    std::mt19937_64 rng(cfg.seed);

    em.stage("transfer", [&] {
        std::uniform_real_distribution<double> ue(-6.0, 6.0), uk(0.0, 2 * kPi);
        std::uniform_int_distribution<int> ul(1, 3);
        double worst = 0.0;
        for (int s = 0; s < 2000; ++s) {
            const double E = ue(rng), k = uk(rng);
            const int L = ul(rng);
            const ModeClassification mc = classify_modes(E, k, L);
            for (int j = 0; j < L; ++j) {
                if (mc.kind[j] != ModeKind::Hyperbolic) continue;
                const std::complex<double> mp = mc.mu_plus(j), mm = mc.mu_minus(j);
                worst = std::max(worst, std::abs(mp * mm - 1.0));
                worst = std::max(worst, std::abs(mp + mm - mc.e(j)));
            }
            worst = std::max(worst,
                             std::abs(build_t0(E, k, L).determinant() - 1.0));
        }
        checks.push_back(make_check("transfer_identities", worst, 1e-9));
    });

    em.stage("single_defect_band", [&] {
        StripPotential v;
        v.L = 1;
        v.R = 0;
        v.values = Eigen::MatrixXd::Constant(1, 1, -1.5);
        const std::vector<double> k_grid = fiber_k_grid(1, 64);
        const auto curves = trace_all_bands(v, k_grid, ScanParams{});
        double worst = 1e300;
        if (curves.size() == 1 && curves[0].valid_count() == 64) {
            worst = 0.0;
            for (int m = 0; m < 64; ++m)
                worst = std::max(worst,
                                 std::abs(curves[0].samples[m].pair.E -
                                          (2 * std::cos(k_grid[m]) - 2.5)));
        }
        checks.push_back(make_check("single_defect_band", worst, 1e-8));
    });

    em.stage("free_spread", [&] {
        Box ring{80, 1, Boundary::Periodic, Boundary::Periodic};
        LatticeState s = make_state(ring);
        s.amp(80, 0) = 1.0;
        free_evolve(s, 10.0);
        const Moments mom = position_moments(s, 0.0);
        checks.push_back(
            make_check("free_spread", std::abs(mom.var_x / 200.0 - 1.0), 1e-6));
    });

    em.stage("propagator", [&] {
        StripPotential v;
        v.L = 1;
        v.R = 0;
        v.values = Eigen::MatrixXd::Constant(1, 1, -1.5);
        Box box{8, 8, Boundary::Dirichlet, Boundary::Periodic};
        LatticeState s = make_state(box);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int i = 0; i < box.nx(); ++i)
            for (int j = 0; j < box.ny; ++j)
                s.amp(i, j) = std::complex<double>(u(rng), u(rng));
        s.amp /= s.amp.norm();
        Hamiltonian2D h(v, box);
        LatticeState a = s;
        for (int step = 0; step < 100; ++step) evolve(a, h, 0.07);
        checks.push_back(make_check("unitarity_100_steps",
                                    std::abs(a.norm() - 1.0), 1e-11));
        LatticeState b = s;
        evolve(b, h, 3.3);
        evolve(b, h, 4.7);
        LatticeState c = s;
        evolve(c, h, 8.0);
        checks.push_back(
            make_check("composition", (b.amp - c.amp).norm(), 1e-9));
    });

    em.stage("wave_free_identity", [&] {
        DaSpec spec;
        spec.nx = 257;  // packet tails must clear the x wrap seam at t = 5
        spec.ny = 8;
        spec.center_y = 4;
        const DaState da = make_da_state(spec);
        const LatticeState psi = embed(da);
        StripPotential zero;
        zero.L = 1;
        zero.R = 0;
        zero.values = Eigen::MatrixXd::Zero(1, 1);
        Hamiltonian2D h(zero, psi.box);
        const WaveOpResult r = wave_operator_apply(psi, h, 5.0);
        checks.push_back(make_check("wave_free_identity",
                                    (r.state.amp - psi.amp).norm(), 1e-10));
        checks.push_back(
            make_check("cook_zero", cook_integrand(da, zero, 3.0), 0.0));
    });

    em.stage("floquet_parseval", [&] {
        const int L = 3, M = 4, ny = L * M;
        Eigen::MatrixXcd psi(9, ny);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int i = 0; i < psi.rows(); ++i)
            for (int j = 0; j < ny; ++j)
                psi(i, j) = std::complex<double>(u(rng), u(rng));
        const FiberDecomposition dec = floquet_forward(psi, L, -4);
        double sum = 0.0;
        for (const FiberState& f : dec.fibers) sum += f.amp.squaredNorm();
        const double parseval = std::abs(sum / M - psi.squaredNorm());
        const double roundtrip = (floquet_inverse(dec) - psi).norm();
        checks.push_back(make_check("floquet_parseval", parseval,
                                    1e-12 * psi.squaredNorm()));
        checks.push_back(make_check("floquet_roundtrip", roundtrip, 1e-12));
    });

    bool all = true;
    json rows = json::array();
    for (const Check& c : checks) {
        all = all && c.pass;
        std::printf("[%s] %-22s measured %.3e  tolerance %.3e\n",
                    c.pass ? "ok" : "FAIL", c.name.c_str(), c.measured, c.tolerance);
        rows.push_back(json{{"name", c.name},
                            {"measured", c.measured},
                            {"tolerance", c.tolerance},
                            {"pass", c.pass}});
    }
    em.stage("write", [&] {
        em.write("validation.json",
                 json{{"all_pass", all}, {"checks", rows}}.dump(2) + "\n");
    });
    if (!all) throw NumericalError("validation suite failed");
    return json{{"checks", checks.size()}, {"all_pass", all}};
}

}  // namespace

// --- entry points -----------------------------------------------------------

RunConfig load_run_config(const std::filesystem::path& config_path,
                          const std::string& job) {
    json j;
    try {
        j = json::parse(read_text(config_path));
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + config_path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");

    static const std::set<std::string> common = {"job", "potential", "seed",
                                                 "output_dir", "threads"};
    static const std::map<std::string, std::set<std::string>> per_job = {
        {"bands", {"M", "seed_scans", "scan"}},
        {"eigenmodes", {"k", "scan"}},
        {"evolve",
         {"M", "k0", "width", "T", "dt", "band_index", "center_y", "x_half",
          "fit_lo", "fit_hi", "scan"}},
        {"scatter",
         {"a", "center_kx", "width_kx", "center_ky", "sigma_y", "nx", "ny",
          "center_x", "center_y", "taper_power", "T_list", "cauchy_tol", "cook"}},
        {"validate", {}}};

    RunConfig cfg;
    cfg.job = job;
    if (j.contains("job")) {
        const std::string cj = j.at("job").get<std::string>();
        if (cj != job)
            throw ConfigError("config says job \"" + cj +
                              "\" but the subcommand is \"" + job + "\"");
    }
    auto it = per_job.find(job);
    if (it == per_job.end()) throw ConfigError("unknown job \"" + job + "\"");
    std::set<std::string> allowed = common;
    allowed.insert(it->second.begin(), it->second.end());
    check_keys(j, allowed, "config");

    if (job != "validate" || j.contains("potential")) {
        const json& pv = require_key(j, "potential", "config");
        if (pv.is_string()) {
            std::filesystem::path p = pv.get<std::string>();
            if (p.is_relative()) p = config_path.parent_path() / p;
            cfg.potential = load_potential(p.string());
            cfg.potential_source = p.string();
        } else if (pv.is_object()) {
            cfg.potential = potential_from_json_text(pv.dump());
            cfg.potential_source = "inline";
        } else {
            throw ConfigError("config: \"potential\" must be a path or an object");
        }
    } else {
        // validate carries its own fixed potentials
        cfg.potential.L = 1;
        cfg.potential.R = 0;
        cfg.potential.values = Eigen::MatrixXd::Zero(1, 1);
        cfg.potential_source = "builtin";
    }

    cfg.seed = j.value("seed", static_cast<uint64_t>(1));
    cfg.output_dir = j.value("output_dir", std::string("out"));
    cfg.threads = j.value("threads", 1);
    if (cfg.threads < 1) throw ConfigError("config: threads must be >= 1");
    cfg.raw = std::move(j);
    return cfg;
}

void run_job(const RunConfig& cfg) {
    const double t0 = now_s();
    Emitter em(cfg.output_dir);
    json derived;
    if (cfg.job == "bands") derived = job_bands(cfg, em);
    else if (cfg.job == "eigenmodes") derived = job_eigenmodes(cfg, em);
    else if (cfg.job == "evolve") derived = job_evolve(cfg, em);
    else if (cfg.job == "scatter") derived = job_scatter(cfg, em);
    else if (cfg.job == "validate") derived = job_validate(cfg, em);
    else throw ConfigError("unknown job \"" + cfg.job + "\"");

    json manifest{{"code_version", kCodeVersion},
                  {"job", cfg.job},
                  {"config", cfg.raw},
                  {"potential", potential_json(cfg.potential)},
                  {"potential_source", cfg.potential_source},
                  {"seed", cfg.seed},
                  {"threads", cfg.threads},
                  {"derived", derived},
                  {"digests", em.digests()},
                  {"stages_s", em.stages()},
                  {"wall_time_s", now_s() - t0},
                  {"warnings", em.warnings()}};
    write_text(cfg.output_dir / "manifest.json", manifest.dump(2) + "\n");
}

int run(const RunConfig& cfg) {
    try {
        run_job(cfg);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return 2;
    if (dynamic_cast<const IoError*>(&e)) return 1;
    if (dynamic_cast<const NumericalError*>(&e)) return 3;
    if (dynamic_cast<const json::exception*>(&e)) return 2;
    return 1;
}

}  // namespace stripbloch
