#pragma once

// Brute-force reference implementations backing the test suite. None of
// this is on the solver hot path; grids are guarded to oracle sizes.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gpflow/grid.hpp"
#include "gpflow/linalg.hpp"
#include "gpflow/operator.hpp"
#include "gpflow/physics.hpp"

namespace gpflow::oracle {

struct LinearGroundState {
    double eigenvalue = 0.0;
    WaveField state;
};

struct LinearGroundSpace {
    double eigenvalue = 0.0;
    std::vector<WaveField> basis;  // L2-orthonormal, possibly degenerate
};

namespace detail {

inline Eigen::MatrixXcd dense_matrix(const FrozenHamiltonian& hf) {
    DenseMatrix m = assemble_dense(hf);
    using Mat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    return Eigen::Map<Mat>(m.a.data(), m.dim, m.dim);
}

}  // namespace detail

/// Smallest eigenspace of the dense linear Hamiltonian (K must be zero so
/// the eigenproblem is genuinely linear). Eigenvectors are orthonormal in
/// the discrete L2 inner product.
inline LinearGroundSpace linear_ground_space_dense(const PhysicsParams& p,
                                                   const GridSpec& g,
                                                   double degeneracy_rtol = 1e-9) {
    if (p.k11 != 0.0 || p.k12 != 0.0 || p.k22 != 0.0)
        throw std::invalid_argument("linear_ground_space_dense: requires K = 0");
    const FrozenHamiltonian hf = freeze_hamiltonian_linear(p, g);
    const Eigen::MatrixXcd a = detail::dense_matrix(hf);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("linear_ground_space_dense: eigensolver failed");

    LinearGroundSpace out;
    out.eigenvalue = es.eigenvalues()(0);
    const double window = degeneracy_rtol * std::max(1.0, std::abs(out.eigenvalue));
    const double inv_h = 1.0 / g.mesh_size();
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        if (es.eigenvalues()(i) - out.eigenvalue > window) break;
        WaveField v(g);
        Eigen::Map<Eigen::VectorXcd>(v.data().data(), a.rows()) =
            es.eigenvectors().col(i) * inv_h;  // unit Euclidean -> unit L2
        out.basis.push_back(std::move(v));
    }
    return out;
}

inline LinearGroundState linear_ground_state_dense(const PhysicsParams& p,
                                                   const GridSpec& g) {
    LinearGroundSpace space = linear_ground_space_dense(p, g);
    return {space.eigenvalue, std::move(space.basis.front())};
}

/// One GFSI step through the dense factorization path (solve + normalize),
/// mirroring gfsi_step without any Krylov machinery.
inline WaveField gfsi_step_dense(const WaveField& psi_n, const PhysicsParams& p,
                                 double tau) {
    const FrozenHamiltonian hf = freeze_hamiltonian(p, psi_n.grid(), psi_n);
    WaveField tilde = dense_solve_shifted(hf, tau, psi_n);
    normalize_l2(tilde);
    return tilde;
}

/// min over a global phase of |a - e^{i theta} b|_{L2}.
inline double phase_aligned_distance(const WaveField& a, const WaveField& b) {
    const double na2 = l2_norm_sq(a);
    const double nb2 = l2_norm_sq(b);
    const double overlap = std::abs(inner_complex(a, b));
    return std::sqrt(std::max(0.0, na2 + nb2 - 2.0 * overlap));
}

/// L2 distance from psi to its projection onto span(basis); the
/// phase-aligned comparison generalized to a degenerate eigenspace.
inline double projection_distance(const WaveField& psi,
                                  const std::vector<WaveField>& basis) {
    WaveField residual = psi;
    for (const WaveField& v : basis) {
        const Complex coeff = inner_complex(residual, v);
        add_scaled(residual, -coeff, v);
    }
    return l2_norm(residual);
}

}  // namespace gpflow::oracle
