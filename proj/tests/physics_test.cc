#include "gpflow/physics.hpp"

#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

namespace gpflow {
namespace {

using testing::grid_with_interior;
using testing::random_field;

TEST(Potential, HarmonicWithJosephsonShift) {
    // Case-1 style: beta = -5, shift |beta| puts V(0,0) at 5
    GridSpec g(4.0, 1.0);
    PhysicsParams p;
    p.beta = -5.0;
    p.potential = HarmonicPotential{1.0, true};
    const auto v = eval_potential(p, g, 1);
    EXPECT_DOUBLE_EQ(v[3 * g.n_interior() + 3], 5.0);  // node (0,0)
}

TEST(Potential, PlainHarmonic) {
    GridSpec g(4.0, 1.0);
    PhysicsParams p;
    p.potential = HarmonicPotential{1.0, false};
    const auto v = eval_potential(p, g, 2);
    // node (1,1) has index 4 on each axis
    EXPECT_DOUBLE_EQ(v[4 * g.n_interior() + 4], 1.0);
}

TEST(Potential, CustomPassthrough) {
    GridSpec g = grid_with_interior(3);
    std::vector<double> v1(g.num_points()), v2(g.num_points());
    for (std::size_t i = 0; i < v1.size(); ++i) {
        v1[i] = 0.5 * i;
        v2[i] = -1.0 * i;
    }
    PhysicsParams p;
    p.potential = CustomPotential{g, v1, v2};
    EXPECT_EQ(eval_potential(p, g, 1), v1);
    EXPECT_EQ(eval_potential(p, g, 2), v2);
    GridSpec other = grid_with_interior(4);
    EXPECT_THROW(eval_potential(p, other, 1), std::invalid_argument);
}

TEST(Densities, ZeroInteraction) {
    std::mt19937_64 rng(1);
    GridSpec g = grid_with_interior(5);
    WaveField psi = random_field(g, rng);
    PhysicsParams p;  // K = 0
    const Densities d = densities(psi, p);
    for (double v : d.rho1) EXPECT_EQ(v, 0.0);
    for (double v : d.rho2) EXPECT_EQ(v, 0.0);
}

TEST(Densities, SingleComponentCaseOne) {
    std::mt19937_64 rng(2);
    GridSpec g = grid_with_interior(4);
    WaveField psi(g);
    for (int k = 0; k < 4; ++k)
        for (int j = 0; j < 4; ++j)
            psi.at(0, j, k) = Complex(0.1 * (j + 1), -0.2 * k);
    PhysicsParams p;
    p.k11 = 100.0;
    p.k12 = 94.0;
    p.k22 = 97.0;
    const Densities d = densities(psi, p);
    for (int k = 0; k < 4; ++k)
        for (int j = 0; j < 4; ++j) {
            const double dens = std::norm(psi.at(0, j, k));
            EXPECT_DOUBLE_EQ(d.rho1[k * 4 + j], 100.0 * dens);
            EXPECT_DOUBLE_EQ(d.rho2[k * 4 + j], 94.0 * dens);
        }
}

TEST(Densities, MatchesPointwiseOracle) {
    std::mt19937_64 rng(3);
    GridSpec g = grid_with_interior(6);
    WaveField psi = random_field(g, rng);
    PhysicsParams p = testing::random_params(rng);
    const Densities d = densities(psi, p);
    for (int k = 0; k < 6; ++k)
        for (int j = 0; j < 6; ++j) {
            const double d1 = std::norm(psi.at(0, j, k));
            const double d2 = std::norm(psi.at(1, j, k));
            EXPECT_NEAR(d.rho1[k * 6 + j], p.k11 * d1 + p.k12 * d2, 1e-14);
            EXPECT_NEAR(d.rho2[k * 6 + j], p.k12 * d1 + p.k22 * d2, 1e-14);
        }
}

TEST(Densities, CrossTermSymmetry) {
    // h^2 sum (k12 |psi2|^2) |psi1|^2 equals the same sum with the roles
    // swapped; both are quadrature of the same product.
    std::mt19937_64 rng(4);
    GridSpec g = grid_with_interior(7);
    WaveField psi = random_field(g, rng);
    double a = 0.0, b = 0.0;
    const double k12 = -0.94;
    for (int k = 0; k < 7; ++k)
        for (int j = 0; j < 7; ++j) {
            const double d1 = std::norm(psi.at(0, j, k));
            const double d2 = std::norm(psi.at(1, j, k));
            a += (k12 * d2) * d1;
            b += (k12 * d1) * d2;
        }
    EXPECT_NEAR(a, b, 1e-14 * std::max(1.0, std::abs(a)));
}

TEST(Coercivity, RotatingTrap) {
    GridSpec g(4.0, 0.25);
    PhysicsParams p;
    p.omega1 = p.omega2 = 0.5;
    p.beta = -5.0;
    p.potential = HarmonicPotential{1.0, true};
    const CoercivityReport r = coercivity_constants(p, g);
    EXPECT_TRUE(r.satisfied);
    EXPECT_DOUBLE_EQ(r.alpha, 3.0);
    EXPECT_DOUBLE_EQ(r.c0, 3.0 / 8.0);
    EXPECT_TRUE(a1_holds_pointwise(p, g, r.alpha));
}

TEST(Coercivity, NoRotation) {
    GridSpec g(2.0, 0.5);
    PhysicsParams p;
    const CoercivityReport r = coercivity_constants(p, g);
    EXPECT_TRUE(r.satisfied);
    EXPECT_TRUE(std::isinf(r.alpha));
    EXPECT_DOUBLE_EQ(r.c0, 0.5);
}

TEST(Coercivity, FastRotationUnsatisfied) {
    GridSpec g(2.0, 0.5);
    PhysicsParams p;
    p.omega1 = p.omega2 = 1.2;
    const CoercivityReport r = coercivity_constants(p, g);
    EXPECT_FALSE(r.satisfied);
    EXPECT_LT(r.alpha, 0.0);
}

TEST(Coercivity, MissingShiftUnsatisfied) {
    GridSpec g(2.0, 0.5);
    PhysicsParams p;
    p.beta = 1.0;
    p.potential = HarmonicPotential{1.0, false};  // no |beta| shift
    EXPECT_FALSE(coercivity_constants(p, g).satisfied);
}

TEST(Coercivity, CustomPotentialNotAnalyzed) {
    GridSpec g = grid_with_interior(3);
    PhysicsParams p;
    p.potential = CustomPotential{g, std::vector<double>(9, 1.0),
                                  std::vector<double>(9, 1.0)};
    const CoercivityReport r = coercivity_constants(p, g);
    EXPECT_FALSE(r.satisfied);
    EXPECT_TRUE(std::isnan(r.alpha));
}

TEST(InteractionMatrix, Classification) {
    PhysicsParams case1;
    case1.k11 = 100.0;
    case1.k12 = 94.0;
    case1.k22 = 97.0;
    EXPECT_EQ(classify_interaction(case1), InteractionClass::NonNegative);

    PhysicsParams case2;
    case2.k11 = 8.1;
    case2.k12 = -0.94;
    case2.k22 = 7.9;
    EXPECT_EQ(classify_interaction(case2), InteractionClass::PositiveDefinite);

    PhysicsParams bad;
    bad.k11 = 1.0;
    bad.k12 = -2.0;
    bad.k22 = 1.0;
    EXPECT_EQ(classify_interaction(bad), InteractionClass::Indefinite);
}

TEST(PhysicsParams, SymmetricAccessor) {
    PhysicsParams p;
    p.k12 = -0.97;
    EXPECT_EQ(p.k21(), p.k12);
    p.omega1 = -0.1;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace gpflow
