#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "gpflow/grid.hpp"

namespace gpflow {

/// V_i(x,y) = gamma (x^2+y^2)/2, optionally shifted by |beta| so the trap
/// dominates the Josephson coupling everywhere.
struct HarmonicPotential {
    double gamma = 1.0;
    bool add_abs_beta = true;
};

/// Per-component tabulated potential on a fixed grid.
struct CustomPotential {
    GridSpec grid;
    std::vector<double> v1;  // n^2 values, layout k*n + j
    std::vector<double> v2;
};

using Potential = std::variant<HarmonicPotential, CustomPotential>;

/// Model parameters of the coupled two-component condensate: symmetric
/// interaction matrix (k12 stored once), Josephson strength beta, and
/// non-negative rotation frequencies.
struct PhysicsParams {
    double k11 = 0.0;
    double k12 = 0.0;
    double k22 = 0.0;
    double beta = 0.0;
    double omega1 = 0.0;
    double omega2 = 0.0;
    Potential potential = HarmonicPotential{};

    double k21() const { return k12; }
    double k_max() const {
        return std::max({std::abs(k11), std::abs(k12), std::abs(k22)});
    }
    double omega_max() const { return std::max(omega1, omega2); }

    void validate() const {
        if (omega1 < 0.0 || omega2 < 0.0)
            throw std::invalid_argument("PhysicsParams: rotation frequencies must be >= 0");
    }
};

enum class InteractionClass { PositiveDefinite, NonNegative, Indefinite };

/// Classifies the 2x2 symmetric interaction matrix. "Indefinite" means the
/// standing assumption on K fails; callers surface that as a warning, not
/// an error. A matrix that is both non-negative and positive definite is
/// reported as non-negative (the stronger property for the densities).
inline InteractionClass classify_interaction(const PhysicsParams& p) {
    if (p.k11 >= 0.0 && p.k12 >= 0.0 && p.k22 >= 0.0)
        return InteractionClass::NonNegative;
    const double det = p.k11 * p.k22 - p.k12 * p.k12;
    if (p.k11 > 0.0 && det > 0.0) return InteractionClass::PositiveDefinite;
    return InteractionClass::Indefinite;
}

inline const char* to_string(InteractionClass c) {
    switch (c) {
        case InteractionClass::PositiveDefinite: return "positive definite";
        case InteractionClass::NonNegative: return "all entries non-negative";
        default: return "indefinite with negative entries";
    }
}

/// Samples V_i on the interior nodes of g. component is 1 or 2.
inline std::vector<double> eval_potential(const PhysicsParams& p,
                                          const GridSpec& g, int component) {
    if (component != 1 && component != 2)
        throw std::invalid_argument("eval_potential: component must be 1 or 2");
    if (const auto* harm = std::get_if<HarmonicPotential>(&p.potential)) {
        const int n = g.n_interior();
        std::vector<double> v(g.num_points());
        const double shift = harm->add_abs_beta ? std::abs(p.beta) : 0.0;
        for (int k = 0; k < n; ++k) {
            const double y = g.coord(k);
            for (int j = 0; j < n; ++j) {
                const double x = g.coord(j);
                v[static_cast<std::size_t>(k) * n + j] =
                    0.5 * harm->gamma * (x * x + y * y) + shift;
            }
        }
        return v;
    }
    const auto& tab = std::get<CustomPotential>(p.potential);
    if (!(tab.grid == g))
        throw std::invalid_argument("eval_potential: custom table grid mismatch");
    return component == 1 ? tab.v1 : tab.v2;
}

struct Densities {
    std::vector<double> rho1;  // k11 |psi1|^2 + k12 |psi2|^2
    std::vector<double> rho2;  // k12 |psi1|^2 + k22 |psi2|^2
};

inline Densities densities(const WaveField& psi, const PhysicsParams& p) {
    const std::size_t np = psi.grid().num_points();
    Densities d{std::vector<double>(np), std::vector<double>(np)};
    auto u1 = psi.component(0);
    auto u2 = psi.component(1);
    for (std::size_t i = 0; i < np; ++i) {
        const double d1 = std::norm(u1[i]);
        const double d2 = std::norm(u2[i]);
        d.rho1[i] = p.k11 * d1 + p.k12 * d2;
        d.rho2[i] = p.k12 * d1 + p.k22 * d2;
    }
    return d;
}

/// Constants of the trap-dominates-rotation assumption. alpha is the
/// largest constant with V_i >= (1+alpha)/2 omega_i^2 (x^2+y^2) + |beta|
/// (infinite when there is no rotation), and c0 = alpha / (2(1+alpha)) is
/// the coercivity constant entering the per-step dissipation bound.
struct CoercivityReport {
    double alpha = std::numeric_limits<double>::quiet_NaN();
    double c0 = 0.0;
    double a_psi_hint = 0.0;  // filled by the solver, 1/(4 E(Psi^0))
    bool satisfied = false;
};

/// Closed-form coercivity constants for the harmonic trap. Custom
/// potentials are not analyzed: the report comes back unsatisfied with
/// alpha unset, which only disables the quantitative dissipation audit.
inline CoercivityReport coercivity_constants(const PhysicsParams& p,
                                             const GridSpec& /*grid*/) {
    CoercivityReport r;
    const auto* harm = std::get_if<HarmonicPotential>(&p.potential);
    if (harm == nullptr) return r;
    const double shift = harm->add_abs_beta ? std::abs(p.beta) : 0.0;
    const bool shift_ok = shift >= std::abs(p.beta);
    const double wm = p.omega_max();
    r.alpha = wm > 0.0 ? harm->gamma / (wm * wm) - 1.0
                       : std::numeric_limits<double>::infinity();
    r.satisfied = shift_ok && r.alpha > 0.0;
    if (r.satisfied)
        r.c0 = std::isinf(r.alpha) ? 0.5 : r.alpha / (2.0 * (1.0 + r.alpha));
    return r;
}

/// Pointwise scan of the trap inequality on the interior nodes; used by
/// the validation suite to back the closed-form alpha.
inline bool a1_holds_pointwise(const PhysicsParams& p, const GridSpec& g,
                               double alpha, double tol = 1e-12) {
    for (int comp = 1; comp <= 2; ++comp) {
        const auto v = eval_potential(p, g, comp);
        const double w = comp == 1 ? p.omega1 : p.omega2;
        const double factor = std::isinf(alpha) && w == 0.0
                                  ? 0.0
                                  : 0.5 * (1.0 + alpha) * w * w;
        const int n = g.n_interior();
        for (int k = 0; k < n; ++k) {
            const double y = g.coord(k);
            for (int j = 0; j < n; ++j) {
                const double x = g.coord(j);
                const double rhs = factor * (x * x + y * y) + std::abs(p.beta);
                if (v[static_cast<std::size_t>(k) * n + j] < rhs - tol) return false;
            }
        }
    }
    return true;
}

}  // namespace gpflow
