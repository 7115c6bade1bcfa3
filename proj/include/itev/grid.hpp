#pragma once

// Chebyshev-Gauss-Lobatto collocation on [a, b].

#include <cmath>

#include "itev/contrast.hpp"
#include "itev/errors.hpp"
#include "itev/types.hpp"

namespace itev {

/// n + 1 Chebyshev points in ascending order with dense differentiation
/// matrices and Clenshaw-Curtis weights.
struct CollocationGrid {
    Domain1D domain;
    int n = 0;
    RealVector nodes;
    RealMatrix D1;
    RealMatrix D2;
    RealVector quadrature_weights;

    Eigen::Index size() const noexcept { return n + 1; }
    Eigen::Index interior_size() const noexcept { return n - 1; }
};

namespace detail {

/// Clenshaw-Curtis weights on [-1, 1] for the points -cos(j pi / n).
inline RealVector clenshaw_curtis_weights(int n) {
    RealVector w = RealVector::Zero(n + 1);
    const Real nn = static_cast<Real>(n);
    RealVector v = RealVector::Ones(n - 1);
    if (n % 2 == 0) {
        w(0) = w(n) = 1.0 / (nn * nn - 1.0);
        for (int k = 1; k < n / 2; ++k) {
            for (int j = 1; j < n; ++j) v(j - 1) -= 2.0 * std::cos(2.0 * k * j * pi / nn) / (4.0 * k * k - 1.0);
        }
        for (int j = 1; j < n; ++j) v(j - 1) -= std::cos(j * pi) / (nn * nn - 1.0);
    } else {
        w(0) = w(n) = 1.0 / (nn * nn);
        for (int k = 1; k <= (n - 1) / 2; ++k) {
            for (int j = 1; j < n; ++j) v(j - 1) -= 2.0 * std::cos(2.0 * k * j * pi / nn) / (4.0 * k * k - 1.0);
        }
    }
    w.segment(1, n - 1) = 2.0 * v / nn;
    return w;
}

}  // namespace detail

inline CollocationGrid build_grid(const Domain1D& domain, int n) {
    domain.validate();
    if (n < 8) throw ConfigError("collocation grid needs n >= 8");
    if (n > 512) throw ConfigError("collocation grid is dense; n > 512 is not supported");

    CollocationGrid grid;
    grid.domain = domain;
    grid.n = n;
    const Real nn = static_cast<Real>(n);
    const Eigen::Index size = n + 1;

    RealVector t(size);
    for (int j = 0; j <= n; ++j) t(j) = -std::cos(j * pi / nn);
    // Symmetrize so that reflection x -> a + b - x maps nodes onto nodes exactly.
    for (int j = 0; j <= n / 2; ++j) {
        const Real s = 0.5 * (t(n - j) - t(j));
        t(j) = -s;
        t(n - j) = s;
    }
    if (n % 2 == 0) t(n / 2) = 0.0;

    // Differentiation matrix on [-1, 1]; differences via the sine product form and
    // the diagonal from the negative sum trick.
    RealMatrix D = RealMatrix::Zero(size, size);
    auto weight = [n](int j) { return ((j == 0 || j == n) ? 2.0 : 1.0) * ((j % 2 == 0) ? 1.0 : -1.0); };
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            if (i == j) continue;
            // t_i - t_j = cos(j pi/n) - cos(i pi/n) = 2 sin((i+j) pi/2n) sin((i-j) pi/2n)
            const Real diff = 2.0 * std::sin((i + j) * pi / (2.0 * nn)) * std::sin((i - j) * pi / (2.0 * nn));
            D(i, j) = weight(i) / (weight(j) * diff);
        }
    }
    for (int i = 0; i <= n; ++i) D(i, i) = -D.row(i).sum();

    const Real scale = 2.0 / domain.length();
    grid.nodes = domain.a + 0.5 * domain.length() * (t.array() + 1.0);
    grid.nodes(0) = domain.a;
    grid.nodes(n) = domain.b;
    grid.D1 = scale * D;
    grid.D2 = grid.D1 * grid.D1;
    grid.quadrature_weights = 0.5 * domain.length() * detail::clenshaw_curtis_weights(n);
    return grid;
}

/// Discrete L2 inner product sum_j w_j conj(x_j) y_j.
inline Complex inner(const CollocationGrid& grid, const ComplexVector& x, const ComplexVector& y) {
    return (grid.quadrature_weights.cast<Complex>().array() * x.conjugate().array() * y.array()).sum();
}

/// Quadrature of a nodal function.
inline Complex integrate(const CollocationGrid& grid, const ComplexVector& f) {
    return grid.quadrature_weights.cast<Complex>().dot(f);
}

inline Real integrate(const CollocationGrid& grid, const RealVector& f) {
    return grid.quadrature_weights.dot(f);
}

inline Real l2_norm_squared(const CollocationGrid& grid, const ComplexVector& f) {
    return grid.quadrature_weights.dot(f.cwiseAbs2());
}

inline Real l2_norm(const CollocationGrid& grid, const ComplexVector& f) {
    return std::sqrt(l2_norm_squared(grid, f));
}

/// Discrete H2_0 norm: ||u||^2 + ||D2 u||^2.
inline Real h2_norm(const CollocationGrid& grid, const ComplexVector& u) {
    const ComplexVector lap = grid.D2.cast<Complex>() * u;
    return std::sqrt(l2_norm_squared(grid, u) + l2_norm_squared(grid, lap));
}

/// Samples a contrast at the nodes.
inline ComplexVector sample(const CollocationGrid& grid, const Contrast& m) {
    ComplexVector out(grid.size());
    for (Eigen::Index j = 0; j < grid.size(); ++j) out(j) = m(grid.nodes(j));
    return out;
}

}  // namespace itev
