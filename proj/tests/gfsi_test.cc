#include "gpflow/gfsi.hpp"

#include <gtest/gtest.h>

#include <random>

#include "gpflow/oracle.hpp"
#include "support.hpp"

namespace gpflow {
namespace {

using testing::gaussian_data;
using testing::grid_with_interior;
using testing::random_params;

PhysicsParams case1_params() {
    PhysicsParams p;
    p.k11 = 100.0;
    p.k12 = 94.0;
    p.k22 = 97.0;
    p.beta = -5.0;
    p.omega1 = p.omega2 = 0.5;
    return p;
}

TEST(GfsiStep, RequiresUnitMass) {
    GridSpec g = grid_with_interior(5, 2.0);
    WaveField psi = gaussian_data(g);  // mass far from 1 on this tiny domain
    scale(psi, Complex(3.0, 0.0));
    SolverConfig cfg;
    cfg.tau = 0.1;
    EXPECT_THROW(gfsi_step(psi, PhysicsParams{}, cfg), std::invalid_argument);
}

TEST(GfsiStep, LinearEigenvectorIsFixedPoint) {
    GridSpec g = grid_with_interior(10, 4.0);
    PhysicsParams p;
    p.beta = 0.3;
    const auto ground = oracle::linear_ground_state_dense(p, g);
    SolverConfig cfg;
    cfg.tau = 0.5;
    auto [next, rec] = gfsi_step(ground.state, p, cfg);
    EXPECT_LE(linf_diff(next, ground.state), 1e-9);
    EXPECT_NEAR(rec.lambda, ground.eigenvalue, 1e-8);
    EXPECT_NEAR(rec.mass, 1.0, 1e-12);
}

TEST(GfsiStep, MatchesDensePipeline) {
    std::mt19937_64 rng(51);
    for (int trial = 0; trial < 10; ++trial) {
        GridSpec g = grid_with_interior(6, 3.0);
        PhysicsParams p = random_params(rng);
        WaveField psi = testing::random_normalized(g, rng);
        SolverConfig cfg;
        cfg.tau = 0.02;
        auto [next, rec] = gfsi_step(psi, p, cfg);
        const WaveField dense_next = oracle::gfsi_step_dense(psi, p, cfg.tau);
        EXPECT_LE(linf_diff(next, dense_next), 1e-9);
    }
}

TEST(GfsiStep, RecordsTheoreticalDiagnostics) {
    GridSpec g(4.0, 0.25);
    PhysicsParams p = case1_params();
    WaveField psi = gaussian_data(g);
    normalize_l2(psi);
    SolverConfig cfg;
    cfg.tau = 0.5;
    StepScratch scratch;
    double prev_energy = energy(psi, p).total;
    const CoercivityReport cr = coercivity_constants(p, g);
    ASSERT_TRUE(cr.satisfied);
    for (int n = 0; n < 10; ++n) {
        auto [next, rec] = gfsi_step(psi, p, cfg, &scratch);
        EXPECT_NEAR(rec.mass, 1.0, 1e-12);
        EXPECT_LE(rec.tilde_l2, 1.0 + 1e-8);        // intermediate norm <= 1
        EXPECT_GE(rec.lambda, -1e-8);               // multiplier >= 0
        EXPECT_LE(rec.energy, prev_energy + 1e-12); // dissipation
        EXPECT_TRUE(rec.dissipation_ok);
        // H1 bound on the intermediate state: |tilde|_{H1}^2 <= (2/C0) E(psi^n)
        const double tilde_h1 =
            rec.tilde_l2 * rec.tilde_l2 * h1_seminorm_sq(next);
        EXPECT_LE(tilde_h1, (2.0 / cr.c0) * prev_energy + 1e-8);
        prev_energy = rec.energy;
        psi = std::move(next);
    }
}

TEST(GfsiStep, GlobalPhaseEquivariance) {
    GridSpec g = grid_with_interior(9, 3.0);
    PhysicsParams p;
    p.k11 = 8.1;
    p.k12 = -0.94;
    p.k22 = 7.9;
    p.beta = 0.2;
    WaveField base = gaussian_data(g);
    normalize_l2(base);
    const Complex phase = std::polar(1.0, 1.234);
    WaveField rotated = base;
    scale(rotated, phase);
    SolverConfig cfg;
    cfg.tau = 0.2;
    for (int n = 0; n < 5; ++n) {
        auto [nb, rb] = gfsi_step(base, p, cfg);
        auto [nr, rr] = gfsi_step(rotated, p, cfg);
        WaveField expected = nb;
        scale(expected, phase);
        EXPECT_LE(linf_diff(nr, expected), 1e-10);
        base = std::move(nb);
        rotated = std::move(nr);
    }
}

TEST(GfsiStep, BacktrackingRestoresDissipation) {
    // strong interaction at tau = 1: the fixed-step flow raises the energy
    // at several steps; the safeguarded flow must stay monotone
    GridSpec g(4.0, 0.25);
    PhysicsParams p;
    p.k11 = p.k22 = 2000.0;
    p.k12 = 1000.0;
    p.beta = -5.0;
    WaveField psi0 = gaussian_data(g);
    normalize_l2(psi0);

    SolverConfig raw;
    raw.tau = 1.0;
    raw.max_steps = 120;
    const GroundStateResult plain = solve_ground_state(psi0, p, raw);
    const auto plain_audit =
        dissipation_audit(plain.initial_energy, plain.records);
    ASSERT_FALSE(plain_audit.monotone) << "setup no longer overshoots";
    bool saw_increase = false;
    for (const auto& r : plain.records) saw_increase = saw_increase || !r.dissipation_ok;
    EXPECT_TRUE(saw_increase);

    SolverConfig guarded = raw;
    guarded.safeguard = BacktrackPolicy{};
    const GroundStateResult safe = solve_ground_state(psi0, p, guarded);
    EXPECT_TRUE(dissipation_audit(safe.initial_energy, safe.records).monotone);
    bool backtracked = false;
    for (const auto& r : safe.records) {
        EXPECT_TRUE(r.dissipation_ok);
        backtracked = backtracked || r.tau_used < raw.tau;
    }
    EXPECT_TRUE(backtracked);
}

TEST(SolveGroundState, HarmonicOscillatorLinearCase) {
    GridSpec g(8.0, 0.125);
    PhysicsParams p;
    p.potential = HarmonicPotential{1.0, false};
    WaveField psi0 = gaussian_data(g);
    SolverConfig cfg;
    cfg.tau = 0.5;
    const GroundStateResult res = solve_ground_state(psi0, p, cfg);
    EXPECT_TRUE(res.converged);
    EXPECT_NEAR(res.energy.total, 1.0, 5e-3);
    EXPECT_LT(res.stationarity_residual, 1e-5);
    EXPECT_NEAR(res.mu, res.energy.total, 1e-12);  // K = 0
    for (const auto& r : res.records) {
        EXPECT_NEAR(r.mass, 1.0, 1e-12);
        EXPECT_LE(r.tilde_l2, 1.0 + 1e-8);
        EXPECT_GE(r.lambda, -1e-8);
    }
    EXPECT_NEAR(res.lambda_final, res.lambda_residual_final, 1e-6);
    EXPECT_NEAR(res.lambda_final, res.mu, 1e-4);
}

TEST(SolveGroundState, RejectsBadInitialMass) {
    GridSpec g = grid_with_interior(8, 3.0);
    PhysicsParams p;
    WaveField psi0 = gaussian_data(g);
    scale(psi0, Complex(1.01, 0.0));
    SolverConfig cfg;
    cfg.tau = 0.5;
    EXPECT_THROW(solve_ground_state(psi0, p, cfg), std::invalid_argument);
}

TEST(SolveGroundState, NonConvergenceIsReportedNotThrown) {
    GridSpec g(4.0, 0.5);
    PhysicsParams p = case1_params();
    WaveField psi0 = gaussian_data(g);
    SolverConfig cfg;
    cfg.tau = 0.5;
    cfg.max_steps = 3;
    const GroundStateResult res = solve_ground_state(psi0, p, cfg);
    EXPECT_FALSE(res.converged);
    EXPECT_EQ(res.steps, 3);
    EXPECT_EQ(res.records.size(), 3u);
}

TEST(DissipationAudit, VeryStrongRepulsionIsNotMonotoneAtLargeTau) {
    // k11:k22:k12 = 10000:10000:8000 at tau = 1 converges but the energy
    // rises at some step
    GridSpec g(8.0, 0.125);
    PhysicsParams p;
    p.k11 = p.k22 = 10000.0;
    p.k12 = 8000.0;
    p.beta = -1.0;
    WaveField psi0 = gaussian_data(g);
    SolverConfig cfg;
    cfg.tau = 1.0;
    const GroundStateResult res = solve_ground_state(psi0, p, cfg);
    ASSERT_TRUE(res.converged);
    const CoercivityReport cr = coercivity_constants(p, g);
    const auto audit = dissipation_audit(res.initial_energy, res.records, &cr);
    EXPECT_FALSE(audit.monotone);
    EXPECT_TRUE(audit.first_monotonicity_violation.has_value());
}

TEST(DissipationAudit, SyntheticRecords) {
    std::vector<IterationRecord> recs(4);
    for (int i = 0; i < 4; ++i) {
        recs[i].n = i + 1;
        recs[i].energy = 5.0;  // constant energy: no violation
        recs[i].h1_increment_sq = 0.0;
    }
    CoercivityReport cr;
    cr.satisfied = true;
    cr.c0 = 0.375;
    auto audit = dissipation_audit(5.0, recs, &cr);
    EXPECT_TRUE(audit.monotone);
    EXPECT_FALSE(audit.first_monotonicity_violation.has_value());
    EXPECT_TRUE(audit.quantitative_checked);
    EXPECT_FALSE(audit.first_quantitative_violation.has_value());

    recs[2].energy = 5.5;  // bump at step 3
    audit = dissipation_audit(5.0, recs, &cr);
    EXPECT_FALSE(audit.monotone);
    EXPECT_EQ(audit.first_monotonicity_violation.value(), 3);

    // quantitative bound: decrease present but smaller than (C0/2)|inc|^2
    recs[2].energy = 5.0;
    recs[1].energy = 4.999;
    recs[2].energy = 4.998;
    recs[3].energy = 4.997;
    for (auto& r : recs) r.h1_increment_sq = 1.0;
    audit = dissipation_audit(5.0, recs, &cr);
    EXPECT_TRUE(audit.monotone);
    EXPECT_EQ(audit.first_quantitative_violation.value(), 1);
}

TEST(HeuristicTau, MinSelectionAndMonotonicity) {
    PhysicsParams p;
    p.k11 = 1.0;
    // tiny C: the interaction bound is huge, the mass bound wins
    const double e0 = 2.0;
    EXPECT_DOUBLE_EQ(heuristic_tau0(e0, p, 1e-6), 1.0 / (4.0 * e0));
    // K = 0: only the mass bound exists
    PhysicsParams free;
    EXPECT_DOUBLE_EQ(heuristic_tau0(e0, free, 10.0), 1.0 / (4.0 * e0));
    // monotone non-increasing in k_m
    double prev = std::numeric_limits<double>::infinity();
    for (double km : {1e3, 4e3, 5e3, 1e4, 1.5e4}) {
        PhysicsParams q;
        q.k11 = q.k22 = km;
        q.k12 = 0.8 * km;
        const double tau0 = heuristic_tau0(11.0, q, 0.05);
        EXPECT_LE(tau0, prev);
        prev = tau0;
    }
    EXPECT_THROW(heuristic_tau0(-1.0, p, 1.0), std::invalid_argument);
    EXPECT_THROW(heuristic_tau0(1.0, p, 0.0), std::invalid_argument);
}

}  // namespace
}  // namespace gpflow
