#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "gpflow/grid.hpp"
#include "gpflow/operator.hpp"

namespace gpflow {

struct KrylovConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    long max_iters = 0;  // 0: 10 * (number of unknowns)
    enum class Precond { None, Diagonal } precond = Precond::None;
    // Fall back to MINRES instead of erroring out when the shifted
    // operator turns out indefinite (tau beyond the coercive range).
    bool allow_indefinite = false;

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
            throw std::invalid_argument("KrylovConfig: tolerances must be positive");
    }
};

struct SolveReport {
    long iterations = 0;
    double final_residual = 0.0;  // L2-weighted
    bool converged = false;
    bool used_minres = false;
};

class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& msg, SolveReport r)
        : std::runtime_error(msg), report(r) {}
    SolveReport report;
};

namespace detail {

// Raw real pairing sum Re(u conj(v)); callers weight by h^2 themselves.
inline double raw_dot(const WaveField& u, const WaveField& v) {
    const Complex* a = u.data().data();
    const Complex* b = v.data().data();
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        acc += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    return acc;
}

// r := rhs - r in place; returns the raw squared norm of the result.
inline double flip_to_residual(WaveField& r, const WaveField& rhs) {
    Complex* rd = r.data().data();
    const Complex* bd = rhs.data().data();
    double acc = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        rd[i] = bd[i] - rd[i];
        acc += rd[i].real() * rd[i].real() + rd[i].imag() * rd[i].imag();
    }
    return acc;
}

// x += a p; r -= a ap; returns the raw squared norm of the new residual.
// One pass keeps the solver memory-bound loop count down.
inline double cg_update(WaveField& x, WaveField& r, const WaveField& p,
                        const WaveField& ap, double a) {
    Complex* xd = x.data().data();
    Complex* rd = r.data().data();
    const Complex* pd = p.data().data();
    const Complex* apd = ap.data().data();
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xd[i] += a * pd[i];
        rd[i] -= a * apd[i];
        acc += rd[i].real() * rd[i].real() + rd[i].imag() * rd[i].imag();
    }
    return acc;
}

// p = z + b p
inline void cg_direction(WaveField& p, const WaveField& z, double b) {
    Complex* pd = p.data().data();
    const Complex* zd = z.data().data();
    for (std::size_t i = 0; i < p.size(); ++i) pd[i] = zd[i] + b * pd[i];
}

inline std::vector<double> shifted_diagonal(const FrozenHamiltonian& hf, double tau) {
    const std::size_t np = hf.grid.num_points();
    std::vector<double> d(2 * np);
    const double lap_diag = 2.0 / hf.grid.cell_area();  // -1/2 * (-4/h^2)
    for (std::size_t i = 0; i < np; ++i) {
        d[i] = 1.0 + tau * (lap_diag + hf.veff1[i]);
        d[np + i] = 1.0 + tau * (lap_diag + hf.veff2[i]);
    }
    return d;
}

// MINRES on the real pairing; no positive definiteness required. Used only
// as the opt-in fallback when CG detects an indefinite shift.
inline SolveReport minres_shifted(const FrozenHamiltonian& hf, double tau,
                                  const WaveField& rhs, const KrylovConfig& cfg,
                                  WaveField& x, long max_iters) {
    const double h = hf.grid.mesh_size();
    const double rhs_norm = l2_norm(rhs);
    const double target = cfg.rel_tol * rhs_norm + cfg.abs_tol;

    WaveField r1(rhs.grid());
    apply_shifted(hf, tau, x, r1);
    scale(r1, Complex(-1.0, 0.0));
    add_scaled(r1, Complex(1.0, 0.0), rhs);

    double beta1 = h * std::sqrt(raw_dot(r1, r1));
    SolveReport rep;
    rep.used_minres = true;
    if (beta1 <= target) {
        rep.converged = true;
        rep.final_residual = beta1;
        return rep;
    }

    WaveField r2 = r1, v(rhs.grid()), w(rhs.grid()), w1(rhs.grid()), w2(rhs.grid());
    WaveField y = r1;
    double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0;
    double phibar = beta1, cs = -1.0, sn = 0.0;

    for (long it = 1; it <= max_iters; ++it) {
        if (beta <= 1e-300) break;  // Lanczos breakdown: subspace exhausted
        // Lanczos step (weighted inner products via the h factor)
        v = y;
        scale(v, Complex(1.0 / beta, 0.0));
        apply_shifted(hf, tau, v, y);
        if (it >= 2) add_scaled(y, Complex(-beta / oldb, 0.0), r1);
        const double alfa = h * h * raw_dot(v, y);
        add_scaled(y, Complex(-alfa / beta, 0.0), r2);
        r1 = r2;
        r2 = y;
        oldb = beta;
        beta = h * std::sqrt(raw_dot(r2, r2));

        // QR update
        const double oldeps = epsln;
        const double delta = cs * dbar + sn * alfa;
        const double gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        const double gamma = std::max(std::hypot(gbar, beta), 1e-300);
        cs = gbar / gamma;
        sn = beta / gamma;
        const double phi = cs * phibar;
        phibar = sn * phibar;

        // update solution
        w1 = w2;
        w2 = w;
        w = v;
        add_scaled(w, Complex(-oldeps, 0.0), w1);
        add_scaled(w, Complex(-delta, 0.0), w2);
        scale(w, Complex(1.0 / gamma, 0.0));
        add_scaled(x, Complex(phi, 0.0), w);

        rep.iterations = it;
        rep.final_residual = phibar;
        if (phibar <= target) {
            rep.converged = true;
            break;
        }
    }
    // true residual check
    apply_shifted(hf, tau, x, y);
    scale(y, Complex(-1.0, 0.0));
    add_scaled(y, Complex(1.0, 0.0), rhs);
    rep.final_residual = h * std::sqrt(raw_dot(y, y));
    rep.converged = rep.final_residual <= target * (1.0 + 1e-2);
    return rep;
}

}  // namespace detail

/// Solves (I + tau H) x = rhs by conjugate gradients on the complex space
/// with the real L2 pairing (valid: the shifted operator is Hermitian, so
/// the pairing is symmetric and CG applies verbatim). Residual tolerances
/// are L2-weighted, hence mesh-independent. A non-positive curvature
/// p^H A p aborts with "indefinite shift" unless cfg.allow_indefinite, in
/// which case a MINRES fallback solves the same system.
inline std::pair<WaveField, SolveReport> solve_shifted(
    const FrozenHamiltonian& hf, double tau, const WaveField& rhs,
    const KrylovConfig& cfg = {}, const WaveField* initial_guess = nullptr) {
    if (!(tau > 0.0)) throw std::invalid_argument("solve_shifted: tau must be > 0");
    if (!(rhs.grid() == hf.grid))
        throw std::invalid_argument("solve_shifted: grid mismatch");
    cfg.validate();

    const double h = hf.grid.mesh_size();
    const long unknowns = static_cast<long>(rhs.size());
    const long max_iters = cfg.max_iters > 0 ? cfg.max_iters : 10 * unknowns;
    const double rhs_norm = l2_norm(rhs);
    const double target = cfg.rel_tol * rhs_norm + cfg.abs_tol;

    WaveField x = initial_guess != nullptr ? *initial_guess : rhs;
    if (initial_guess != nullptr && !(x.grid() == hf.grid))
        throw std::invalid_argument("solve_shifted: initial guess grid mismatch");

    const bool jacobi = cfg.precond == KrylovConfig::Precond::Diagonal;
    std::vector<double> diag;
    if (jacobi) {
        diag = detail::shifted_diagonal(hf, tau);
        for (double d : diag)
            if (!(d > 0.0))
                throw SolveError("indefinite shift; reduce tau (non-positive diagonal)", {});
    }

    WaveField r(rhs.grid()), p(rhs.grid()), ap(rhs.grid()), z(rhs.grid());
    // z = r / diag for Jacobi; without preconditioning z aliases r
    auto precondition = [&]() -> const WaveField& {
        if (!jacobi) return r;
        const Complex* a = r.data().data();
        Complex* b = z.data().data();
        for (std::size_t i = 0; i < r.size(); ++i) b[i] = a[i] / diag[i];
        return z;
    };

    apply_shifted(hf, tau, x, r);
    double rr = detail::flip_to_residual(r, rhs);  // r = rhs - A x

    SolveReport rep;
    double res = h * std::sqrt(rr);
    if (res <= target) {
        rep.converged = true;
        rep.final_residual = res;
        return {std::move(x), rep};
    }

    p = precondition();
    double rz = jacobi ? detail::raw_dot(r, p) : rr;

    for (long it = 1; it <= max_iters; ++it) {
        // matvec with the p.Ap pairing fused into the same pass
        const double pap =
            detail::apply_h_kernel<true, true>(hf, p, ap, tau);
        if (!(pap > 0.0)) {
            rep.iterations = it;
            rep.final_residual = res;
            if (!cfg.allow_indefinite)
                throw SolveError("indefinite shift; reduce tau", rep);
            WaveField xm = initial_guess != nullptr ? *initial_guess : rhs;
            SolveReport mrep = detail::minres_shifted(hf, tau, rhs, cfg, xm,
                                                      max_iters);
            mrep.iterations += it;
            if (!mrep.converged)
                throw SolveError("linear solve did not converge (minres fallback)", mrep);
            return {std::move(xm), mrep};
        }
        const double alpha = rz / pap;
        rr = detail::cg_update(x, r, p, ap, alpha);
        res = h * std::sqrt(rr);
        rep.iterations = it;
        if (res <= target) {
            // guard against recurrence drift with one true-residual check
            apply_shifted(hf, tau, x, ap);
            const double true_rr = detail::flip_to_residual(ap, rhs);
            const double true_res = h * std::sqrt(true_rr);
            if (true_res <= target) {
                rep.converged = true;
                rep.final_residual = true_res;
                return {std::move(x), rep};
            }
            r = ap;  // refreshed residual, keep iterating
            rr = true_rr;
            res = true_res;
            p = precondition();
            rz = jacobi ? detail::raw_dot(r, p) : rr;
            continue;
        }
        const WaveField& zr = precondition();
        const double rz_new = jacobi ? detail::raw_dot(r, zr) : rr;
        const double beta = rz_new / rz;
        rz = rz_new;
        detail::cg_direction(p, zr, beta);
    }

    rep.final_residual = res;
    rep.converged = false;
    throw SolveError("linear solve did not converge within max_iters", rep);
}

/// Direct dense solve of (I + tau H) x = rhs for oracle-size grids.
/// Asserts Hermiticity of the assembled matrix before factorizing and
/// validates the residual afterwards.
inline WaveField dense_solve_shifted(const FrozenHamiltonian& hf, double tau,
                                     const WaveField& rhs) {
    if (!(tau > 0.0))
        throw std::invalid_argument("dense_solve_shifted: tau must be > 0");
    if (!(rhs.grid() == hf.grid))
        throw std::invalid_argument("dense_solve_shifted: grid mismatch");

    DenseMatrix hm = assemble_dense(hf);
    if (hermiticity_defect(hm) > 1e-13)
        throw std::runtime_error("dense_solve_shifted: assembled matrix not Hermitian");

    using Mat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<Mat> a(hm.a.data(), hm.dim, hm.dim);
    Mat shifted = tau * a;
    shifted.diagonal().array() += Complex(1.0, 0.0);

    Eigen::Map<const Eigen::VectorXcd> b(rhs.data().data(), hm.dim);
    Eigen::VectorXcd x = shifted.partialPivLu().solve(b);

    const double resid = (shifted * x - b).norm() * hf.grid.mesh_size();
    const double rhs_norm = l2_norm(rhs);
    if (!(resid <= 1e-12 * std::max(rhs_norm, 1e-300)))
        throw std::runtime_error("dense_solve_shifted: singular or ill-conditioned matrix");

    WaveField out(rhs.grid());
    Eigen::Map<Eigen::VectorXcd>(out.data().data(), hm.dim) = x;
    return out;
}

}  // namespace gpflow
