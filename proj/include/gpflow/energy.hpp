#pragma once

#include <cassert>
#include <cmath>

#include "gpflow/grid.hpp"
#include "gpflow/operator.hpp"
#include "gpflow/physics.hpp"

namespace gpflow {

/// Additive pieces of the discrete energy functional. The kinetic term
/// uses the forward-difference H1 seminorm so that it coincides with the
/// 5-point Laplacian quadratic form; the rotation term uses the same
/// central differences as apply_lz.
struct EnergyBreakdown {
    double kinetic = 0.0;      // 1/2 |psi|_{H1,h}^2
    double potential = 0.0;    // sum_i h^2 sum V_i |psi_i|^2
    double interaction = 0.0;  // 1/2 h^2 sum (rho_1 |psi_1|^2 + rho_2 |psi_2|^2)
    double rotation = 0.0;     // -sum_i omega_i Re h^2 sum conj(psi_i) Lz psi_i
    double josephson = 0.0;    // 2 beta h^2 sum Re(psi_1 conj(psi_2))
    double total = 0.0;
};

inline EnergyBreakdown energy(const WaveField& psi, const PhysicsParams& p) {
    const GridSpec& g = psi.grid();
    const std::size_t np = g.num_points();
    const double h2 = g.cell_area();
    EnergyBreakdown e;

    e.kinetic = 0.5 * h1_seminorm_sq(psi);

    const Densities d = densities(psi, p);
    for (int c = 0; c < 2; ++c) {
        const auto v = eval_potential(p, g, c + 1);
        const auto u = psi.component(c);
        const double* rho = (c == 0 ? d.rho1 : d.rho2).data();
        double pot = 0.0, inter = 0.0;
        for (std::size_t i = 0; i < np; ++i) {
            const double dens = std::norm(u[i]);
            pot += v[i] * dens;
            inter += rho[i] * dens;
        }
        e.potential += h2 * pot;
        e.interaction += 0.5 * h2 * inter;
    }

    if (p.omega1 != 0.0 || p.omega2 != 0.0) {
        std::vector<Complex> lz(np);
        for (int c = 0; c < 2; ++c) {
            const double omega = c == 0 ? p.omega1 : p.omega2;
            if (omega == 0.0) continue;
            const auto u = psi.component(c);
            apply_lz(g, u, lz);
            Complex acc{};
            for (std::size_t i = 0; i < np; ++i) acc += std::conj(u[i]) * lz[i];
            // the pairing is real up to rounding (Lz is Hermitian)
            assert(std::abs(acc.imag()) * h2 < 1e-10 * std::max(1.0, std::abs(acc.real()) * h2));
            e.rotation -= omega * h2 * acc.real();
        }
    }

    if (p.beta != 0.0) {
        const auto u1 = psi.component(0);
        const auto u2 = psi.component(1);
        double acc = 0.0;
        for (std::size_t i = 0; i < np; ++i)
            acc += u1[i].real() * u2[i].real() + u1[i].imag() * u2[i].imag();
        e.josephson = 2.0 * p.beta * h2 * acc;
    }

    e.total = e.kinetic + e.potential + e.interaction + e.rotation + e.josephson;
    return e;
}

/// mu(psi) = E(psi) + 1/2 int (rho_1 |psi_1|^2 + rho_2 |psi_2|^2); for a
/// unit-mass field this equals <H_psi psi, psi>.
inline double chemical_potential(const EnergyBreakdown& e) {
    return e.total + e.interaction;
}

inline double chemical_potential(const WaveField& psi, const PhysicsParams& p) {
    return chemical_potential(energy(psi, p));
}

/// Directional pairing of the energy gradient, 2 <H_psi psi, phi>; matches
/// central finite differences of E to second order in the step.
inline double energy_gradient_pairing(const WaveField& psi, const WaveField& phi,
                                      const PhysicsParams& p) {
    check_same_grid(psi, phi, "energy_gradient_pairing");
    const FrozenHamiltonian hf = freeze_hamiltonian(p, psi.grid(), psi);
    const WaveField hpsi = apply_h(hf, psi);
    return 2.0 * inner_l2(hpsi, phi);
}

}  // namespace gpflow
