#pragma once

// Discrete pencil A - lambda M for
//   (D2 - lambda (1+m)) u + m v = f,   (D2 - lambda) v = g,
//   u = u' = 0 at both endpoints, no condition on v.
//
// Unknowns are stacked as x = [u_0 .. u_n, v_0 .. v_n]. Rows:
//   [0, n+3)        u-group: Dirichlet a, interior u-equations 1..n-1, Dirichlet b,
//                   Neumann a, Neumann b
//   [n+3, 2n+2)     interior v-equations 1..n-1
// u carries 4 boundary rows and n-1 collocation rows, v only n-1 collocation rows,
// so the u-block is over-determined by two and the v-block under-determined by two.

#include <array>
#include <fstream>
#include <iomanip>
#include <string>
#include <vector>

#include "itev/contrast.hpp"
#include "itev/errors.hpp"
#include "itev/grid.hpp"
#include "itev/types.hpp"

namespace itev {

/// Which operator multiplies lambda: I_m = diag(1+m, 1) or the identity.
enum class Weighting { contrast, identity };

inline const char* to_string(Weighting w) { return w == Weighting::contrast ? "contrast" : "identity"; }

/// A pair (u, v) of nodal vectors.
struct StatePair {
    ComplexVector u;
    ComplexVector v;

    static StatePair zero(Eigen::Index size) {
        return {ComplexVector::Zero(size), ComplexVector::Zero(size)};
    }

    ComplexVector stacked() const {
        ComplexVector x(u.size() + v.size());
        x << u, v;
        return x;
    }

    static StatePair split(const ComplexVector& x) {
        const Eigen::Index half = x.size() / 2;
        return {x.head(half), x.tail(half)};
    }
};

struct PencilBlocks {
    CollocationGrid grid;
    Weighting weighting = Weighting::contrast;
    ComplexMatrix A;
    ComplexMatrix M;
    std::vector<Eigen::Index> u_rows;   // interior u-equations, node i -> u_rows[i-1]
    std::vector<Eigen::Index> v_rows;   // interior v-equations
    std::array<Eigen::Index, 4> bc_rows{};  // u(a), u(b), u'(a), u'(b)
    std::array<Real, 4> bc_scale{};        // row scaling applied to the boundary rows
    std::vector<Eigen::Index> u_cols;
    std::vector<Eigen::Index> v_cols;
    ComplexVector contrast_on_grid;

    Eigen::Index dimension() const noexcept { return A.rows(); }

    /// Same A with M rebuilt for another weighting.
    PencilBlocks with_weighting(Weighting w) const {
        PencilBlocks out = *this;
        out.weighting = w;
        out.M.setZero();
        const int n = grid.n;
        for (int i = 1; i < n; ++i) {
            out.M(u_rows[i - 1], u_cols[i]) = w == Weighting::contrast ? 1.0 + contrast_on_grid(i) : Complex{1.0};
            out.M(v_rows[i - 1], v_cols[i]) = 1.0;
        }
        return out;
    }

    /// Lambda-weight on the data rows, (1+m) on u-rows and 1 on v-rows (or all ones).
    ComplexVector data_weight() const {
        const int n = grid.n;
        ComplexVector d(2 * (n - 1));
        for (int i = 1; i < n; ++i) {
            d(i - 1) = weighting == Weighting::contrast ? 1.0 + contrast_on_grid(i) : Complex{1.0};
            d(n - 2 + i) = 1.0;
        }
        return d;
    }

    /// Embeds interior data (f on u-rows, g on v-rows) into the row space; boundary rows stay 0.
    ComplexMatrix data_embedding() const {
        const int n = grid.n;
        ComplexMatrix E = ComplexMatrix::Zero(dimension(), 2 * (n - 1));
        for (int i = 1; i < n; ++i) {
            E(u_rows[i - 1], i - 1) = 1.0;
            E(v_rows[i - 1], n - 2 + i) = 1.0;
        }
        return E;
    }

    /// Right-hand side with nodal f, g placed on the interior rows.
    ComplexVector right_hand_side(const ComplexVector& f, const ComplexVector& g) const {
        check_nodal(f, "f");
        check_nodal(g, "g");
        ComplexVector rhs = ComplexVector::Zero(dimension());
        for (int i = 1; i < grid.n; ++i) {
            rhs(u_rows[i - 1]) = f(i);
            rhs(v_rows[i - 1]) = g(i);
        }
        return rhs;
    }

    void check_nodal(const ComplexVector& x, const char* name) const {
        if (x.size() != grid.size()) {
            throw InputError(std::string(name) + " must have one value per collocation node");
        }
    }
};

inline PencilBlocks build_pencil(const CollocationGrid& grid, const Contrast& contrast,
                                 Weighting weighting = Weighting::contrast) {
    contrast.check_evaluable(grid.domain);
    const int n = grid.n;
    const Eigen::Index size = grid.size();
    const Eigen::Index dim = 2 * size;

    PencilBlocks p;
    p.grid = grid;
    p.weighting = weighting;
    p.contrast_on_grid = sample(grid, contrast);
    for (Eigen::Index j = 0; j < size; ++j) {
        const Complex m = p.contrast_on_grid(j);
        if (!std::isfinite(m.real()) || !std::isfinite(m.imag())) {
            throw InputError("contrast is not evaluable at every collocation node");
        }
    }

    for (Eigen::Index j = 0; j < size; ++j) {
        p.u_cols.push_back(j);
        p.v_cols.push_back(size + j);
    }
    for (int i = 1; i < n; ++i) {
        p.u_rows.push_back(i);
        p.v_rows.push_back(n + 2 + i);
    }
    p.bc_rows = {0, n, n + 1, n + 2};

    // Boundary rows are scaled to the size of the collocation rows; they carry no lambda.
    const Real d2_scale = grid.D2.cwiseAbs().maxCoeff();
    const Real d1_scale = grid.D1.cwiseAbs().maxCoeff();
    p.bc_scale = {d2_scale, d2_scale, d2_scale / d1_scale, d2_scale / d1_scale};

    p.A = ComplexMatrix::Zero(dim, dim);
    p.A(p.bc_rows[0], 0) = p.bc_scale[0];
    p.A(p.bc_rows[1], n) = p.bc_scale[1];
    p.A.block(p.bc_rows[2], 0, 1, size) = p.bc_scale[2] * grid.D1.row(0).cast<Complex>();
    p.A.block(p.bc_rows[3], 0, 1, size) = p.bc_scale[3] * grid.D1.row(n).cast<Complex>();
    for (int i = 1; i < n; ++i) {
        p.A.block(p.u_rows[i - 1], 0, 1, size) = grid.D2.row(i).cast<Complex>();
        p.A(p.u_rows[i - 1], size + i) = p.contrast_on_grid(i);
        p.A.block(p.v_rows[i - 1], size, 1, size) = grid.D2.row(i).cast<Complex>();
    }
    p.M = ComplexMatrix::Zero(dim, dim);
    p = p.with_weighting(weighting);

    if (p.u_rows.size() + p.v_rows.size() + p.bc_rows.size() != static_cast<std::size_t>(dim)) {
        throw InternalError("pencil row bookkeeping does not partition the rows");
    }
    return p;
}

struct PencilResidual {
    ComplexVector residual_f;  // nodal, zero at the endpoints
    ComplexVector residual_g;  // nodal, zero at the endpoints
    std::array<Complex, 4> bc_residual{};  // u(a), u(b), u'(a), u'(b)
};

/// (A - lambda M) x split by row groups.
inline PencilResidual apply_pencil(const PencilBlocks& pencil, Complex lambda, const StatePair& state) {
    pencil.check_nodal(state.u, "u");
    pencil.check_nodal(state.v, "v");
    const ComplexVector r = (pencil.A - lambda * pencil.M) * state.stacked();
    PencilResidual out;
    out.residual_f = ComplexVector::Zero(pencil.grid.size());
    out.residual_g = ComplexVector::Zero(pencil.grid.size());
    for (int i = 1; i < pencil.grid.n; ++i) {
        out.residual_f(i) = r(pencil.u_rows[i - 1]);
        out.residual_g(i) = r(pencil.v_rows[i - 1]);
    }
    for (std::size_t k = 0; k < 4; ++k) out.bc_residual[k] = r(pencil.bc_rows[k]) / pencil.bc_scale[k];
    return out;
}

/// Writes A and M in coordinate (matrix-market style) form for debugging.
inline void export_matrix_market(const PencilBlocks& pencil, const std::string& path_prefix) {
    auto dump = [](const ComplexMatrix& X, const std::string& path) {
        std::ofstream os(path);
        if (!os) throw InputError("cannot open " + path);
        Eigen::Index nnz = 0;
        for (Eigen::Index j = 0; j < X.cols(); ++j)
            for (Eigen::Index i = 0; i < X.rows(); ++i) nnz += X(i, j) != Complex{0.0};
        os << "%%MatrixMarket matrix coordinate complex general\n";
        os << X.rows() << ' ' << X.cols() << ' ' << nnz << '\n';
        os << std::setprecision(17);
        for (Eigen::Index j = 0; j < X.cols(); ++j)
            for (Eigen::Index i = 0; i < X.rows(); ++i)
                if (X(i, j) != Complex{0.0})
                    os << i + 1 << ' ' << j + 1 << ' ' << X(i, j).real() << ' ' << X(i, j).imag() << '\n';
    };
    dump(pencil.A, path_prefix + "_A.mtx");
    dump(pencil.M, path_prefix + "_M.mtx");
}

}  // namespace itev
