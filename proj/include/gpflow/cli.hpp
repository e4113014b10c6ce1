#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "gpflow/gfsi.hpp"
#include "gpflow/io.hpp"
#include "gpflow/oracle.hpp"

namespace gpflow::cli {

struct GlobalOptions {
    std::optional<std::string> output_dir;  // overrides the config value
    bool allow_indefinite = false;
    std::uint64_t seed = 0;  // randomized validation checks
};

namespace detail_cli {

struct Problem {
    RunConfig cfg;
    GridSpec grid;
    PhysicsParams params;
    SolverConfig solver;
};

inline Problem load_problem(const std::string& config_path,
                            const GlobalOptions& opts) {
    RunConfig cfg = parse_run_config(config_path);
    if (opts.output_dir) cfg.output_dir = *opts.output_dir;
    if (opts.allow_indefinite) cfg.allow_indefinite = true;
    GridSpec grid = make_grid(cfg);
    PhysicsParams params = make_params(cfg, grid);
    SolverConfig solver = make_solver_config(cfg);
    return Problem{std::move(cfg), grid, std::move(params), solver};
}

inline WaveField random_field(const GridSpec& g, std::mt19937_64& rng) {
    WaveField f(g);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (Complex& z : f.data()) z = Complex(dist(rng), dist(rng));
    return f;
}

// least-squares slope of log(err) vs log(eps)
inline double fitted_slope(const std::vector<double>& eps,
                           const std::vector<double>& err) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double x = std::log(eps[i]);
        const double y = std::log(std::max(err[i], 1e-300));
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

// Central differences of E against the gradient pairing. For K = 0 the
// map t -> E(psi + t phi) is quadratic and the central difference is exact
// up to rounding, so the check degenerates to direct agreement; otherwise
// the eps^2 error term is fitted (the map is an exact quartic, so any eps
// range above the rounding floor sees slope 2).
inline bool gradient_check_passes(const WaveField& psi, const WaveField& phi,
                                  const PhysicsParams& p, double& measure) {
    const double pairing = energy_gradient_pairing(psi, phi, p);
    const std::vector<double> eps{1e-1, 3e-2, 1e-2, 3e-3};
    std::vector<double> err;
    for (double e : eps) {
        WaveField plus = psi, minus = psi;
        add_scaled(plus, Complex(e, 0.0), phi);
        add_scaled(minus, Complex(-e, 0.0), phi);
        const double fd =
            (energy(plus, p).total - energy(minus, p).total) / (2.0 * e);
        err.push_back(std::abs(fd - pairing));
    }
    if (p.k_max() < 1e-6) {
        measure = *std::max_element(err.begin(), err.end());
        return measure <= 1e-8 * std::max(1.0, std::abs(pairing));
    }
    measure = fitted_slope(eps, err);
    return std::abs(measure - 2.0) <= 0.2;
}

}  // namespace detail_cli

/// gpflow solve <config>: run the ground-state iteration and emit
/// energy_series.csv / summary.csv (and field.csv when requested).
/// Exit codes: 0 converged, 2 stopped at max_steps, 1 error.
inline int cmd_solve(const std::string& config_path, const GlobalOptions& opts = {}) {
    try {
        auto prob = detail_cli::load_problem(config_path, opts);
        const WaveField psi0 = make_initial_data(prob.cfg, prob.grid);

        const auto a2 = classify_interaction(prob.params);
        if (a2 == InteractionClass::Indefinite)
            std::cout << "warning: interaction matrix is " << to_string(a2)
                      << "; the standing assumption on K fails\n";
        const CoercivityReport cr = coercivity_constants(prob.params, prob.grid);
        if (!cr.satisfied)
            std::cout << "warning: trap does not dominate rotation (A-type "
                         "assumption unsatisfied); dissipation bound unavailable\n";

        GroundStateResult res = solve_ground_state(psi0, prob.params, prob.solver);
        if (res.initial_energy > 0.0)
            std::cout << "advisory tau0 (C=" << prob.cfg.c_user << "): "
                      << format_double(heuristic_tau0(res.initial_energy,
                                                      prob.params, prob.cfg.c_user))
                      << " (not enforced)\n";

        const std::filesystem::path dir(prob.cfg.output_dir);
        write_energy_series(dir / "energy_series.csv", res.records);
        write_summary(dir / "summary.csv", res);
        if (prob.cfg.emit_fields) write_field_csv(dir / "field.csv", res.psi_g);

        std::cout << "E = " << format_double(res.energy.total)
                  << "  mu = " << format_double(res.mu) << "  steps = " << res.steps
                  << "  converged = " << format_bool(res.converged)
                  << "  stationarity = " << format_double(res.stationarity_residual)
                  << '\n';
        return res.converged ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

struct SweepCell {
    double k_scale = 1.0;
    double tau = 0.0;
};

struct SweepRow {
    double k11 = 0, k12 = 0, k22 = 0, tau = 0;
    double energy = std::numeric_limits<double>::quiet_NaN();
    long steps = 0;
    bool converged = false;
    bool monotone = false;
};

namespace detail_cli {

inline SweepRow run_sweep_cell(const Problem& base, const SweepCell& cell) {
    SweepRow row;
    PhysicsParams p = base.params;
    p.k11 *= cell.k_scale;
    p.k12 *= cell.k_scale;
    p.k22 *= cell.k_scale;
    row.k11 = p.k11;
    row.k12 = p.k12;
    row.k22 = p.k22;
    row.tau = cell.tau;
    SolverConfig solver = base.solver;
    solver.tau = cell.tau;
    try {
        const WaveField psi0 = make_initial_data(base.cfg, base.grid);
        GroundStateResult res = solve_ground_state(psi0, p, solver);
        row.energy = res.energy.total;
        row.steps = res.steps;
        row.converged = res.converged;
        row.monotone =
            dissipation_audit(res.initial_energy, res.records).monotone;
    } catch (const std::exception& e) {
        std::cerr << "sweep cell (k_scale=" << cell.k_scale << ", tau=" << cell.tau
                  << ") failed: " << e.what() << '\n';
    }
    return row;
}

}  // namespace detail_cli

/// gpflow sweep <config> --k ... --tau ...: grid of runs over interaction
/// scale times step size. k values multiply the base config's interaction
/// matrix. Cells run concurrently up to `jobs`; rows are written in cell
/// order regardless. Per-cell failures are recorded and the sweep
/// continues.
inline int cmd_sweep(const std::string& config_path, std::vector<double> k_scales,
                     std::vector<double> taus, int jobs = 1,
                     const GlobalOptions& opts = {}) {
    try {
        const auto base = detail_cli::load_problem(config_path, opts);
        if (k_scales.empty()) k_scales = {1.0};
        if (taus.empty()) taus = {base.solver.tau};
        if (jobs < 1) jobs = 1;

        std::vector<SweepCell> cells;
        for (double k : k_scales)
            for (double t : taus) cells.push_back({k, t});
        std::vector<SweepRow> rows(cells.size());

        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= cells.size()) break;
                rows[i] = detail_cli::run_sweep_cell(base, cells[i]);
            }
        };
        if (jobs == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }

        std::ofstream out = open_output(
            std::filesystem::path(base.cfg.output_dir) / "sweep.csv");
        out << "k11,k12,k22,tau,E,steps,converged,monotone\n";
        for (const auto& r : rows) {
            out << format_double(r.k11) << ',' << format_double(r.k12) << ','
                << format_double(r.k22) << ',' << format_double(r.tau) << ','
                << format_double(r.energy) << ',' << r.steps << ','
                << format_bool(r.converged) << ',' << format_bool(r.monotone)
                << '\n';
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

/// gpflow validate <config>: invariant suite on the configured problem.
/// Prints one PASS/FAIL/WARN row per check; exit 0 iff nothing failed.
inline int cmd_validate(const std::string& config_path,
                        const GlobalOptions& opts = {}) {
    bool all_pass = true;
    auto report = [&all_pass](const char* name, bool ok, const std::string& detail) {
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << name;
        if (!detail.empty()) std::cout << " (" << detail << ")";
        std::cout << '\n';
        all_pass = all_pass && ok;
    };
    try {
        const auto prob = detail_cli::load_problem(config_path, opts);
        std::mt19937_64 rng(opts.seed != 0 ? opts.seed : 0x5eed5eedULL);

        const auto a2 = classify_interaction(prob.params);
        if (a2 == InteractionClass::Indefinite)
            std::cout << "[WARN] interaction matrix: " << to_string(a2) << '\n';
        else
            std::cout << "[PASS] interaction matrix (" << to_string(a2) << ")\n";

        const CoercivityReport cr = coercivity_constants(prob.params, prob.grid);
        report("trap coercivity", cr.satisfied,
               "alpha=" + format_double(cr.alpha) + " C0=" + format_double(cr.c0));
        if (cr.satisfied)
            report("trap inequality pointwise scan",
                   a1_holds_pointwise(prob.params, prob.grid, cr.alpha), "");

        // operator symmetry on random pairs, relative to the natural scale
        {
            const WaveField probe = make_initial_data(prob.cfg, prob.grid);
            const FrozenHamiltonian hf =
                freeze_hamiltonian(prob.params, prob.grid, probe);
            double worst = 0.0;
            for (int i = 0; i < 20; ++i) {
                const WaveField u = detail_cli::random_field(prob.grid, rng);
                const WaveField v = detail_cli::random_field(prob.grid, rng);
                const WaveField hu = apply_h(hf, u);
                const WaveField hv = apply_h(hf, v);
                const double scale = l2_norm(hu) * l2_norm(v) +
                                     l2_norm(u) * l2_norm(hv);
                worst = std::max(worst,
                                 std::abs(inner_l2(hu, v) - inner_l2(u, hv)) / scale);
            }
            report("operator self-adjointness (20 pairs)", worst <= 1e-11,
                   "worst rel defect " + format_double(worst));
        }

        // gradient pairing vs central differences
        {
            bool ok = true;
            double worst_measure = 0.0;
            for (int i = 0; i < 5; ++i) {
                WaveField psi = detail_cli::random_field(prob.grid, rng);
                normalize_l2(psi);
                WaveField phi = detail_cli::random_field(prob.grid, rng);
                normalize_l2(phi);
                add_scaled(phi, Complex(1.0, 0.0), psi);
                normalize_l2(phi);
                double measure = 0.0;
                ok = detail_cli::gradient_check_passes(psi, phi, prob.params,
                                                       measure) && ok;
                worst_measure = std::max(worst_measure, measure);
            }
            report("energy gradient check (5 pairs)", ok,
                   prob.params.k_max() < 1e-6
                       ? "max |fd - pairing| = " + format_double(worst_measure)
                       : "observed order up to " + format_double(worst_measure));
        }

        // ten steps: mass conservation, |tilde| <= 1, lambda >= 0
        try {
            SolverConfig solver = prob.solver;
            solver.max_steps = 10;
            const WaveField psi0 = make_initial_data(prob.cfg, prob.grid);
            GroundStateResult res = solve_ground_state(psi0, prob.params, solver);
            bool mass_ok = true, tilde_ok = true, lambda_ok = true;
            for (const auto& r : res.records) {
                mass_ok = mass_ok && std::abs(r.mass - 1.0) <= 1e-12;
                tilde_ok = tilde_ok && r.tilde_l2 <= 1.0 + 1e-8;
                lambda_ok = lambda_ok && r.lambda >= -1e-8;
            }
            report("mass conservation over 10 steps", mass_ok, "");
            report("intermediate norm <= 1 over 10 steps", tilde_ok, "");
            report("multiplier >= 0 over 10 steps", lambda_ok, "");
            if (res.initial_energy > 0.0)
                std::cout << "[info] advisory tau0 (C=" << prob.cfg.c_user << ") = "
                          << format_double(heuristic_tau0(res.initial_energy,
                                                          prob.params,
                                                          prob.cfg.c_user))
                          << '\n';
        } catch (const std::exception& e) {
            report("ten-step invariants", false, e.what());
        }

        return all_pass ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace gpflow::cli
