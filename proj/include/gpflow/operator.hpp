#pragma once

#include <cassert>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "gpflow/grid.hpp"
#include "gpflow/physics.hpp"

namespace gpflow {

/// Coupled Hamiltonian with the nonlinearity frozen at one iterate:
/// component i sees -1/2 lap + (V_i + rho_i) - omega_i Lz plus the beta
/// swap coupling to the other component. Immutable after construction.
struct FrozenHamiltonian {
    GridSpec grid;
    std::vector<double> veff1;  // V_1 + rho_1, layout k*n + j
    std::vector<double> veff2;
    double beta = 0.0;
    double omega1 = 0.0;
    double omega2 = 0.0;
    std::vector<double> xs;  // cached interior coordinates
    std::vector<double> ys;

    explicit FrozenHamiltonian(const GridSpec& g) : grid(g) {
        const int n = g.n_interior();
        xs.resize(n);
        ys.resize(n);
        for (int i = 0; i < n; ++i) xs[i] = ys[i] = g.coord(i);
    }
};

inline void check_frozen_fields(const FrozenHamiltonian& hf) {
    if (hf.veff1.size() != hf.grid.num_points() ||
        hf.veff2.size() != hf.grid.num_points())
        throw std::invalid_argument("FrozenHamiltonian: bad field sizes");
    for (double v : hf.veff1)
        if (!std::isfinite(v)) throw std::invalid_argument("FrozenHamiltonian: non-finite veff1");
    for (double v : hf.veff2)
        if (!std::isfinite(v)) throw std::invalid_argument("FrozenHamiltonian: non-finite veff2");
}

/// Freezes the densities at psi_n (the semi-implicit linearization point).
inline FrozenHamiltonian freeze_hamiltonian(const PhysicsParams& p,
                                            const GridSpec& g,
                                            const WaveField& psi_n) {
    if (!(psi_n.grid() == g))
        throw std::invalid_argument("freeze_hamiltonian: grid mismatch");
    FrozenHamiltonian hf(g);
    hf.beta = p.beta;
    hf.omega1 = p.omega1;
    hf.omega2 = p.omega2;
    hf.veff1 = eval_potential(p, g, 1);
    hf.veff2 = eval_potential(p, g, 2);
    const Densities d = densities(psi_n, p);
    for (std::size_t i = 0; i < hf.veff1.size(); ++i) {
        hf.veff1[i] += d.rho1[i];
        hf.veff2[i] += d.rho2[i];
    }
    check_frozen_fields(hf);
    return hf;
}

/// Frozen operator with zero densities (linear problem, K = 0 or psi = 0).
inline FrozenHamiltonian freeze_hamiltonian_linear(const PhysicsParams& p,
                                                   const GridSpec& g) {
    FrozenHamiltonian hf(g);
    hf.beta = p.beta;
    hf.omega1 = p.omega1;
    hf.omega2 = p.omega2;
    hf.veff1 = eval_potential(p, g, 1);
    hf.veff2 = eval_potential(p, g, 2);
    check_frozen_fields(hf);
    return hf;
}

/// 5-point Laplacian with zero Dirichlet ghost values,
/// (u_E + u_W + u_N + u_S - 4 u) / h^2.
inline void apply_laplacian(const GridSpec& g, std::span<const Complex> u,
                            std::span<Complex> out) {
    const int n = g.n_interior();
    assert(u.size() == g.num_points() && out.size() == g.num_points());
    const double inv_h2 = 1.0 / g.cell_area();
    for (int k = 0; k < n; ++k) {
        const Complex* row = u.data() + static_cast<std::size_t>(k) * n;
        const Complex* south = k > 0 ? row - n : nullptr;
        const Complex* north = k + 1 < n ? row + n : nullptr;
        Complex* o = out.data() + static_cast<std::size_t>(k) * n;
        for (int j = 0; j < n; ++j) {
            Complex s = -4.0 * row[j];
            if (j > 0) s += row[j - 1];
            if (j + 1 < n) s += row[j + 1];
            if (south) s += south[j];
            if (north) s += north[j];
            o[j] = s * inv_h2;
        }
    }
}

/// Angular momentum Lz = -i (x d/dy - y d/dx), second-order central
/// differences with zero ghost values. First index j <-> x, second k <-> y.
inline void apply_lz(const GridSpec& g, std::span<const Complex> u,
                     std::span<Complex> out) {
    const int n = g.n_interior();
    assert(u.size() == g.num_points() && out.size() == g.num_points());
    const double inv_2h = 1.0 / (2.0 * g.mesh_size());
    for (int k = 0; k < n; ++k) {
        const Complex* row = u.data() + static_cast<std::size_t>(k) * n;
        const Complex* south = k > 0 ? row - n : nullptr;
        const Complex* north = k + 1 < n ? row + n : nullptr;
        Complex* o = out.data() + static_cast<std::size_t>(k) * n;
        const double y = g.coord(k);
        for (int j = 0; j < n; ++j) {
            const double x = g.coord(j);
            const Complex dy = ((north ? north[j] : Complex{}) -
                                (south ? south[j] : Complex{})) * inv_2h;
            const Complex dx = ((j + 1 < n ? row[j + 1] : Complex{}) -
                                (j > 0 ? row[j - 1] : Complex{})) * inv_2h;
            const Complex w = x * dy - y * dx;
            o[j] = Complex(w.imag(), -w.real());  // -i * w
        }
    }
}

namespace detail {

struct RowArgs {
    const Complex* row;
    const Complex* south;  // null on the first row
    const Complex* north;  // null on the last row
    const Complex* other;
    const double* vrow;
    const double* xs;
    double y;
    double beta;
    double omega;
    int n;
    double half_inv_h2;
    double inv_2h;
    double shift;
    Complex* out;
};

// One row of out = u + shift * (H u) (or plain H u when Shifted = false).
// Edge columns are peeled so the inner loop carries no branches; the
// boundary rows get their own instantiation via HasSouth/HasNorth. When
// requested, the real pairing sum Re(u conj(out)) is accumulated in the
// same pass (the Krylov solver fuses its p.Ap product into the matvec).
template <bool Shifted, bool Rotating, bool HasSouth, bool HasNorth,
          bool AccumulateDot>
inline double apply_h_row(const RowArgs& a) {
    double dot = 0.0;
    auto cell = [&](int j, const Complex west, const Complex east) {
        const Complex down = HasSouth ? a.south[j] : Complex{};
        const Complex up = HasNorth ? a.north[j] : Complex{};
        Complex acc =
            a.half_inv_h2 * (4.0 * a.row[j] - west - east - down - up);
        acc += a.vrow[j] * a.row[j];
        acc += a.beta * a.other[j];
        if constexpr (Rotating) {
            const Complex dy = (up - down) * a.inv_2h;
            const Complex dx = (east - west) * a.inv_2h;
            const Complex w = a.xs[j] * dy - a.y * dx;
            // -omega Lz u = i omega (x dy - y dx)
            acc += a.omega * Complex(-w.imag(), w.real());
        }
        if constexpr (Shifted) acc = a.row[j] + a.shift * acc;
        if constexpr (AccumulateDot)
            dot += a.row[j].real() * acc.real() + a.row[j].imag() * acc.imag();
        a.out[j] = acc;
    };
    if (a.n == 1) {
        cell(0, Complex{}, Complex{});
        return dot;
    }
    cell(0, Complex{}, a.row[1]);
    for (int j = 1; j + 1 < a.n; ++j) cell(j, a.row[j - 1], a.row[j + 1]);
    cell(a.n - 1, a.row[a.n - 2], Complex{});
    return dot;
}

template <bool Shifted, bool Rotating, bool AccumulateDot>
inline double apply_h_rows(const FrozenHamiltonian& hf, int c,
                           const WaveField& u, WaveField& out, double shift) {
    const int n = hf.grid.n_interior();
    const double h = hf.grid.mesh_size();
    auto uc = u.component(c);
    auto uo = u.component(1 - c);
    auto oc = out.component(c);
    const double* veff = (c == 0 ? hf.veff1 : hf.veff2).data();
    RowArgs a{};
    a.xs = hf.xs.data();
    a.beta = hf.beta;
    a.omega = c == 0 ? hf.omega1 : hf.omega2;
    a.n = n;
    a.half_inv_h2 = 0.5 / (h * h);
    a.inv_2h = 1.0 / (2.0 * h);
    a.shift = shift;
    double dot = 0.0;
    for (int k = 0; k < n; ++k) {
        const std::size_t base = static_cast<std::size_t>(k) * n;
        a.row = uc.data() + base;
        a.south = k > 0 ? a.row - n : nullptr;
        a.north = k + 1 < n ? a.row + n : nullptr;
        a.other = uo.data() + base;
        a.vrow = veff + base;
        a.out = oc.data() + base;
        a.y = hf.ys[k];
        if (a.south && a.north)
            dot += apply_h_row<Shifted, Rotating, true, true, AccumulateDot>(a);
        else if (a.north)
            dot += apply_h_row<Shifted, Rotating, false, true, AccumulateDot>(a);
        else if (a.south)
            dot += apply_h_row<Shifted, Rotating, true, false, AccumulateDot>(a);
        else
            dot += apply_h_row<Shifted, Rotating, false, false, AccumulateDot>(a);
    }
    return dot;
}

template <bool Shifted, bool AccumulateDot = false>
inline double apply_h_kernel(const FrozenHamiltonian& hf, const WaveField& u,
                             WaveField& out, double shift) {
    double dot = 0.0;
    for (int c = 0; c < 2; ++c) {
        const double omega = c == 0 ? hf.omega1 : hf.omega2;
        if (omega != 0.0)
            dot += apply_h_rows<Shifted, true, AccumulateDot>(hf, c, u, out, shift);
        else
            dot += apply_h_rows<Shifted, false, AccumulateDot>(hf, c, u, out, shift);
    }
    return dot;
}

}  // namespace detail

/// out = H u (frozen coupled Hamiltonian, matrix-free).
inline void apply_h(const FrozenHamiltonian& hf, const WaveField& u,
                    WaveField& out) {
    if (!(u.grid() == hf.grid) || !(out.grid() == hf.grid))
        throw std::invalid_argument("apply_h: grid mismatch");
    detail::apply_h_kernel<false>(hf, u, out, 0.0);
}

inline WaveField apply_h(const FrozenHamiltonian& hf, const WaveField& u) {
    WaveField out(u.grid());
    apply_h(hf, u, out);
    return out;
}

/// out = (I + tau H) u. tau must be positive.
inline void apply_shifted(const FrozenHamiltonian& hf, double tau,
                          const WaveField& u, WaveField& out) {
    if (!(tau > 0.0)) throw std::invalid_argument("apply_shifted: tau must be > 0");
    if (!(u.grid() == hf.grid) || !(out.grid() == hf.grid))
        throw std::invalid_argument("apply_shifted: grid mismatch");
    detail::apply_h_kernel<true>(hf, u, out, tau);
}

inline WaveField apply_shifted(const FrozenHamiltonian& hf, double tau,
                               const WaveField& u) {
    WaveField out(u.grid());
    apply_shifted(hf, tau, u, out);
    return out;
}

/// Dense row-major square matrix of the flattened operator; oracle support
/// for small grids only.
struct DenseMatrix {
    int dim = 0;
    std::vector<Complex> a;

    Complex& at(int r, int c) { return a[static_cast<std::size_t>(r) * dim + c]; }
    const Complex& at(int r, int c) const {
        return a[static_cast<std::size_t>(r) * dim + c];
    }
};

/// Explicit 2N x 2N matrix of the frozen Hamiltonian in the flattening
/// order c*N + k*n + j. Guarded to small grids; Hermitian by construction.
inline DenseMatrix assemble_dense(const FrozenHamiltonian& hf) {
    const int n = hf.grid.n_interior();
    if (n > 32)
        throw std::invalid_argument("assemble_dense: grid too large (n_interior > 32)");
    const int N = n * n;
    DenseMatrix m;
    m.dim = 2 * N;
    m.a.assign(static_cast<std::size_t>(m.dim) * m.dim, Complex{});

    const double h = hf.grid.mesh_size();
    const double half_inv_h2 = 0.5 / (h * h);
    const double inv_2h = 1.0 / (2.0 * h);
    for (int c = 0; c < 2; ++c) {
        const double* veff = (c == 0 ? hf.veff1 : hf.veff2).data();
        const double omega = c == 0 ? hf.omega1 : hf.omega2;
        for (int k = 0; k < n; ++k) {
            const double y = hf.ys[k];
            for (int j = 0; j < n; ++j) {
                const double x = hf.xs[j];
                const int r = c * N + k * n + j;
                m.at(r, r) += 4.0 * half_inv_h2 + veff[k * n + j];
                // -1/2 lap couplings
                if (j > 0) m.at(r, r - 1) += -half_inv_h2;
                if (j + 1 < n) m.at(r, r + 1) += -half_inv_h2;
                if (k > 0) m.at(r, r - n) += -half_inv_h2;
                if (k + 1 < n) m.at(r, r + n) += -half_inv_h2;
                // -omega Lz = i omega (x d/dy - y d/dx)
                if (omega != 0.0) {
                    const Complex iw(0.0, omega);
                    if (k + 1 < n) m.at(r, r + n) += iw * (x * inv_2h);
                    if (k > 0) m.at(r, r - n) -= iw * (x * inv_2h);
                    if (j + 1 < n) m.at(r, r + 1) -= iw * (y * inv_2h);
                    if (j > 0) m.at(r, r - 1) += iw * (y * inv_2h);
                }
                // Josephson swap block
                const int other = (1 - c) * N + k * n + j;
                m.at(r, other) += hf.beta;
            }
        }
    }
    return m;
}

/// max |A - A^H| entry; assembly should keep this at exactly zero.
inline double hermiticity_defect(const DenseMatrix& m) {
    double worst = 0.0;
    for (int r = 0; r < m.dim; ++r)
        for (int c = r; c < m.dim; ++c)
            worst = std::max(worst, std::abs(m.at(r, c) - std::conj(m.at(c, r))));
    return worst;
}

}  // namespace gpflow
