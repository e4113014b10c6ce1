#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace gpflow {

using Complex = std::complex<double>;

/// Uniform tensor grid on [-L,L] x [-L,L] with homogeneous Dirichlet
/// boundary. Only interior nodes are represented; boundary values are
/// implicitly zero everywhere. The interior has n = 2L/h - 1 nodes per
/// axis at coordinates -L + (i+1)h, i = 0..n-1. 2L/h must be an integer.
class GridSpec {
public:
    GridSpec(double half_width, double mesh_size)
        : half_width_(half_width), mesh_size_(mesh_size) {
        if (!(half_width > 0.0) || !(mesh_size > 0.0))
            throw std::invalid_argument("GridSpec: L and h must be positive");
        const double ratio = 2.0 * half_width / mesh_size;
        const double rounded = std::round(ratio);
        if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
            throw std::invalid_argument("GridSpec: 2L/h must be an integer");
        if (rounded < 2.0)
            throw std::invalid_argument("GridSpec: no interior points");
        n_ = static_cast<int>(rounded) - 1;
    }

    double half_width() const { return half_width_; }
    double mesh_size() const { return mesh_size_; }
    int n_interior() const { return n_; }
    std::size_t num_points() const {
        return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
    }
    /// Quadrature weight of one interior node (h^2).
    double cell_area() const { return mesh_size_ * mesh_size_; }
    /// Coordinate of 0-based interior index along either axis.
    double coord(int idx) const { return -half_width_ + (idx + 1) * mesh_size_; }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
    double half_width_;
    double mesh_size_;
    int n_;
};

/// Two-component complex field on the interior of a GridSpec.
///
/// Storage is a single flat array, component-major and then row-major in
/// (y,x): data[c*N + k*n + j] where j <-> x (fastest), k <-> y, N = n^2.
/// This is also the unknown ordering used for dense assembly and the
/// Krylov vectors.
class WaveField {
public:
    explicit WaveField(const GridSpec& grid)
        : grid_(grid), data_(2 * grid.num_points(), Complex(0.0, 0.0)) {}

    const GridSpec& grid() const { return grid_; }
    std::size_t size() const { return data_.size(); }  // 2N

    std::span<Complex> component(int c) {
        return {data_.data() + static_cast<std::size_t>(c) * grid_.num_points(),
                grid_.num_points()};
    }
    std::span<const Complex> component(int c) const {
        return {data_.data() + static_cast<std::size_t>(c) * grid_.num_points(),
                grid_.num_points()};
    }

    Complex& at(int c, int j, int k) {
        return data_[static_cast<std::size_t>(c) * grid_.num_points() +
                     static_cast<std::size_t>(k) * grid_.n_interior() + j];
    }
    const Complex& at(int c, int j, int k) const {
        return data_[static_cast<std::size_t>(c) * grid_.num_points() +
                     static_cast<std::size_t>(k) * grid_.n_interior() + j];
    }

    std::vector<Complex>& data() { return data_; }
    const std::vector<Complex>& data() const { return data_; }

private:
    GridSpec grid_;
    std::vector<Complex> data_;
};

inline void check_same_grid(const WaveField& a, const WaveField& b,
                            const char* what) {
    if (!(a.grid() == b.grid()))
        throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

/// h^2-weighted squared L2 norm, summed over both components.
/// Summation runs in sequential index order (deterministic).
inline double l2_norm_sq(const WaveField& f) {
    double acc = 0.0;
    for (const Complex& z : f.data()) acc += std::norm(z);
    return f.grid().cell_area() * acc;
}

inline double l2_norm(const WaveField& f) { return std::sqrt(l2_norm_sq(f)); }

/// Real L2 pairing (u,v) = h^2 Re sum u conj(v), summed over components.
inline double inner_l2(const WaveField& f, const WaveField& g) {
    check_same_grid(f, g, "inner_l2");
    const Complex* a = f.data().data();
    const Complex* b = g.data().data();
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        acc += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    return f.grid().cell_area() * acc;
}

/// Full complex L2 pairing h^2 sum u conj(v) (used by oracle comparisons).
inline Complex inner_complex(const WaveField& f, const WaveField& g) {
    check_same_grid(f, g, "inner_complex");
    const Complex* a = f.data().data();
    const Complex* b = g.data().data();
    Complex acc(0.0, 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) acc += a[i] * std::conj(b[i]);
    return f.grid().cell_area() * acc;
}

/// Squared discrete H1_0 seminorm: h^2 sum over all forward-difference
/// edges of |D+ f|^2, both components and both axes. Edges to the zero
/// Dirichlet boundary are included, so <-lap_h u, u>_{L2} equals this
/// value up to rounding.
inline double h1_seminorm_sq(const WaveField& f) {
    const int n = f.grid().n_interior();
    double acc = 0.0;
    for (int c = 0; c < 2; ++c) {
        auto u = f.component(c);
        for (int k = 0; k < n; ++k) {
            const Complex* row = u.data() + static_cast<std::size_t>(k) * n;
            acc += std::norm(row[0]);
            for (int j = 0; j + 1 < n; ++j) acc += std::norm(row[j + 1] - row[j]);
            acc += std::norm(row[n - 1]);
        }
        for (int j = 0; j < n; ++j) {
            acc += std::norm(u[j]);
            for (int k = 0; k + 1 < n; ++k)
                acc += std::norm(u[static_cast<std::size_t>(k + 1) * n + j] -
                                 u[static_cast<std::size_t>(k) * n + j]);
            acc += std::norm(u[static_cast<std::size_t>(n - 1) * n + j]);
        }
    }
    return acc;  // h^2 * |diff/h|^2: the mesh factors cancel
}

/// Max complex modulus over all nodes of both components (joint max).
inline double linf_norm(const WaveField& f) {
    double m = 0.0;
    for (const Complex& z : f.data()) m = std::max(m, std::abs(z));
    return m;
}

inline bool all_finite(const WaveField& f) {
    for (const Complex& z : f.data())
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

// Small vector algebra shared by the solvers and tests.

inline void scale(WaveField& f, Complex a) {
    for (Complex& z : f.data()) z *= a;
}

/// y += a x
inline void add_scaled(WaveField& y, Complex a, const WaveField& x) {
    check_same_grid(y, x, "add_scaled");
    Complex* yd = y.data().data();
    const Complex* xd = x.data().data();
    for (std::size_t i = 0; i < y.size(); ++i) yd[i] += a * xd[i];
}

/// Rescales f to unit L2 norm; returns the previous norm.
inline double normalize_l2(WaveField& f) {
    const double nrm = l2_norm(f);
    if (!(nrm > 0.0))
        throw std::invalid_argument("normalize_l2: zero field");
    scale(f, Complex(1.0 / nrm, 0.0));
    return nrm;
}

inline double linf_diff(const WaveField& a, const WaveField& b) {
    check_same_grid(a, b, "linf_diff");
    const Complex* x = a.data().data();
    const Complex* y = b.data().data();
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
    return m;
}

}  // namespace gpflow
