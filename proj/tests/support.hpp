#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "gpflow/grid.hpp"
#include "gpflow/physics.hpp"

namespace gpflow::testing {

/// Grid with exactly n interior points per axis on [-L,L].
inline GridSpec grid_with_interior(int n, double L = 1.0) {
    return GridSpec(L, 2.0 * L / (n + 1));
}

inline GridSpec zero_potential_grid_params(const GridSpec& g, PhysicsParams& p) {
    p.potential = CustomPotential{g, std::vector<double>(g.num_points(), 0.0),
                                  std::vector<double>(g.num_points(), 0.0)};
    return g;
}

inline WaveField random_field(const GridSpec& g, std::mt19937_64& rng,
                              double amplitude = 1.0) {
    WaveField f(g);
    std::uniform_real_distribution<double> dist(-amplitude, amplitude);
    for (Complex& z : f.data()) z = Complex(dist(rng), dist(rng));
    return f;
}

inline WaveField random_normalized(const GridSpec& g, std::mt19937_64& rng) {
    WaveField f = random_field(g, rng);
    normalize_l2(f);
    return f;
}

/// Mild random parameter draw that keeps I + tau H safely positive
/// definite for small tau (used by oracle agreement checks).
inline PhysicsParams random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> k(-2.0, 5.0);
    std::uniform_real_distribution<double> b(-3.0, 3.0);
    std::uniform_real_distribution<double> w(0.0, 1.0);
    std::uniform_real_distribution<double> gam(0.5, 2.0);
    PhysicsParams p;
    p.k11 = k(rng);
    p.k12 = k(rng);
    p.k22 = k(rng);
    p.beta = b(rng);
    p.omega1 = w(rng);
    p.omega2 = w(rng);
    p.potential = HarmonicPotential{gam(rng), true};
    return p;
}

/// Discrete sine mode sin(p pi (j+1)/(n+1)) sin(q pi (k+1)/(n+1)) placed in
/// one component; an exact eigenvector of the 5-point Laplacian.
inline WaveField sine_mode(const GridSpec& g, int p, int q, int comp = 0) {
    WaveField f(g);
    const int n = g.n_interior();
    const double denom = n + 1;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            f.at(comp, j, k) =
                std::sin(p * std::numbers::pi * (j + 1) / denom) *
                std::sin(q * std::numbers::pi * (k + 1) / denom);
    return f;
}

/// Eigenvalue of -lap_h for the (p,q) sine mode.
inline double laplace_eigenvalue(const GridSpec& g, int p, int q) {
    const double h = g.mesh_size();
    const double denom = 2.0 * (g.n_interior() + 1);
    auto lam1d = [&](int m) {
        const double s = std::sin(m * std::numbers::pi / denom);
        return 4.0 / (h * h) * s * s;
    };
    return lam1d(p) + lam1d(q);
}

/// Continuum-normalized Gaussian initial data (equal components), the
/// standard starting guess; vortex = true multiplies by (x + iy).
inline WaveField gaussian_data(const GridSpec& g, bool vortex = false) {
    WaveField psi(g);
    const int n = g.n_interior();
    const double amp = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    for (int k = 0; k < n; ++k) {
        const double y = g.coord(k);
        for (int j = 0; j < n; ++j) {
            const double x = g.coord(j);
            const double gauss = amp * std::exp(-(x * x + y * y) / 2.0);
            const Complex v = vortex ? Complex(x, y) * gauss : Complex(gauss, 0.0);
            psi.at(0, j, k) = v;
            psi.at(1, j, k) = v;
        }
    }
    return psi;
}

/// Extended-precision evaluation of the discrete energy functional, used
/// as the finite-difference oracle so that the eps^2 error term stays
/// above the evaluation noise down to eps = 1e-5. Mirrors the energy
/// definitions independently of the production path.
inline long double energy_long_double(const WaveField& psi,
                                      const PhysicsParams& p) {
    using CL = std::complex<long double>;
    const GridSpec& g = psi.grid();
    const int n = g.n_interior();
    const long double h = g.mesh_size();
    const long double h2 = h * h;
    auto val = [&](int c, int j, int k) -> CL {
        if (j < 0 || j >= n || k < 0 || k >= n) return {};
        const Complex z = psi.at(c, j, k);
        return CL(z.real(), z.imag());
    };
    long double kinetic = 0.0L, pot = 0.0L, inter = 0.0L, rot = 0.0L,
                jos = 0.0L;
    const auto v1 = eval_potential(p, g, 1);
    const auto v2 = eval_potential(p, g, 2);
    for (int c = 0; c < 2; ++c) {
        for (int k = 0; k < n; ++k)
            for (int j = -1; j < n; ++j)
                kinetic += 0.5L * std::norm(val(c, j + 1, k) - val(c, j, k));
        for (int j = 0; j < n; ++j)
            for (int k = -1; k < n; ++k)
                kinetic += 0.5L * std::norm(val(c, j, k + 1) - val(c, j, k));
    }
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) {
            const long double d1 = std::norm(val(0, j, k));
            const long double d2 = std::norm(val(1, j, k));
            pot += v1[k * n + j] * d1 + v2[k * n + j] * d2;
            const long double r1 = p.k11 * d1 + p.k12 * d2;
            const long double r2 = p.k12 * d1 + p.k22 * d2;
            inter += 0.5L * (r1 * d1 + r2 * d2);
            jos += 2.0L * p.beta * (val(0, j, k) * std::conj(val(1, j, k))).real();
        }
    for (int c = 0; c < 2; ++c) {
        const long double omega = c == 0 ? p.omega1 : p.omega2;
        if (omega == 0.0L) continue;
        CL acc{};
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) {
                const long double x = g.coord(j), y = g.coord(k);
                const CL dy = (val(c, j, k + 1) - val(c, j, k - 1)) / (2.0L * h);
                const CL dx = (val(c, j + 1, k) - val(c, j - 1, k)) / (2.0L * h);
                acc += std::conj(val(c, j, k)) * CL(0.0L, -1.0L) * (x * dy - y * dx);
            }
        rot -= omega * acc.real();
    }
    return kinetic + h2 * (pot + inter + rot + jos);
}

/// Random direction with a guaranteed component along psi, so the cubic
/// term of t -> E(psi + t phi) does not degenerate.
inline WaveField correlated_direction(const WaveField& psi,
                                      std::mt19937_64& rng) {
    WaveField phi = random_field(psi.grid(), rng);
    normalize_l2(phi);
    add_scaled(phi, Complex(1.0, 0.0), psi);
    normalize_l2(phi);
    return phi;
}

inline double fit_loglog_slope(const std::vector<double>& xs,
                               const std::vector<double>& ys) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = std::log(xs[i]);
        const double y = std::log(std::max(ys[i], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace gpflow::testing
