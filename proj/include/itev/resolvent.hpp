#pragma once

// Factorizations of A - lambda M, the four resolvent blocks, and the
// factorization identity relating the weighted and unweighted pencils.

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "itev/contrast.hpp"
#include "itev/errors.hpp"
#include "itev/grid.hpp"
#include "itev/pencil.hpp"
#include "itev/types.hpp"

namespace itev {

inline constexpr Real default_condition_cap = 1e14;

/// LU of A - lambda M with a 1-norm condition estimate.
template <typename Scalar = Complex>
class LuFactorization {
public:
    using Matrix = DenseMatrix<Scalar>;
    using Vector = DenseVector<Scalar>;

    LuFactorization(const Matrix& shifted, Real condition_cap = default_condition_cap) {
        if (shifted.rows() != shifted.cols()) throw InternalError("factorization needs a square matrix");
        lu_.compute(shifted);
        const auto rc = static_cast<Real>(lu_.rcond());
        condition_ = rc > 0 ? 1.0 / rc : std::numeric_limits<Real>::infinity();
        if (!std::isfinite(condition_) || condition_ > condition_cap) {
            throw NearSingularError("lambda is (near) an eigenvalue: condition estimate exceeds cap", condition_);
        }
    }

    Real condition() const noexcept { return condition_; }
    Eigen::Index size() const noexcept { return lu_.rows(); }

    template <typename Rhs>
    auto solve(const Eigen::MatrixBase<Rhs>& rhs) const {
        return lu_.solve(rhs);
    }

private:
    Eigen::PartialPivLU<Matrix> lu_;
    Real condition_ = 0;
};

/// Factorization bound to the pencil it came from.
struct PencilFactorization {
    const PencilBlocks* pencil = nullptr;
    Complex lambda;
    LuFactorization<Complex> lu;

    Real condition() const noexcept { return lu.condition(); }
};

inline PencilFactorization factorize(const PencilBlocks& pencil, Complex lambda,
                                     Real condition_cap = default_condition_cap) {
    const ComplexMatrix shifted = pencil.A - lambda * pencil.M;
    return PencilFactorization{&pencil, lambda, LuFactorization<Complex>(shifted, condition_cap)};
}

/// Solves (A - lambda M)(u, v) = (f, g, 0). f and g are nodal; only interior values enter.
inline StatePair solve(const PencilFactorization& fac, const ComplexVector& f, const ComplexVector& g) {
    const ComplexVector rhs = fac.pencil->right_hand_side(f, g);
    const ComplexVector x = fac.lu.solve(rhs);
    return StatePair::split(x);
}

/// Singular values of a dense matrix, descending.
inline RealVector singular_values(const ComplexMatrix& X) {
    if (X.size() == 0) return RealVector();
    Eigen::BDCSVD<ComplexMatrix> svd(X);
    return svd.singularValues();
}

inline Real spectral_norm(const ComplexMatrix& X) {
    const RealVector s = singular_values(X);
    return s.size() ? s(0) : 0.0;
}

/// Matrix of a map from interior nodal data to nodal output, expressed in
/// discrete L2 coordinates on both sides: W_out^{1/2} R W_in^{-1/2}.
inline ComplexMatrix l2_coordinates(const CollocationGrid& grid, const ComplexMatrix& R) {
    const RealVector sw = grid.quadrature_weights.cwiseSqrt();
    const RealVector sw_in = sw.segment(1, grid.n - 1);
    if (R.rows() != grid.size() || R.cols() != sw_in.size()) {
        throw InternalError("block does not map interior data to nodal values");
    }
    return sw.asDiagonal() * R * sw_in.cwiseInverse().asDiagonal();
}

/// Operator norm in discrete L2 of a map from interior data to nodal values.
inline Real l2_operator_norm(const CollocationGrid& grid, const ComplexMatrix& R) {
    return spectral_norm(l2_coordinates(grid, R));
}

struct ResolventBlocks {
    Complex lambda;
    ComplexMatrix R11;  // f -> u
    ComplexMatrix R12;  // g -> u
    ComplexMatrix R21;  // f -> v
    ComplexMatrix R22;  // g -> v
    ComplexMatrix phi_R21;
    ComplexMatrix phi_R22;
};

/// Blocks of (A - lambda M)^{-1} between interior data and nodal states. Use
/// the identity weighting for the blocks of (B - lambda I)^{-1}.
inline ResolventBlocks extract_blocks(const PencilBlocks& pencil, Complex lambda, const CutoffFunction& cutoff,
                                      Real condition_cap = default_condition_cap) {
    const PencilFactorization fac = factorize(pencil, lambda, condition_cap);
    const int n = pencil.grid.n;
    const Eigen::Index size = pencil.grid.size();
    const ComplexMatrix X = fac.lu.solve(pencil.data_embedding());
    const Eigen::Index k = n - 1;

    ResolventBlocks rb;
    rb.lambda = lambda;
    rb.R11 = X.block(0, 0, size, k);
    rb.R12 = X.block(0, k, size, k);
    rb.R21 = X.block(size, 0, size, k);
    rb.R22 = X.block(size, k, size, k);
    const RealVector phi = cutoff.sample(pencil.grid.nodes);
    rb.phi_R21 = phi.asDiagonal() * rb.R21;
    rb.phi_R22 = phi.asDiagonal() * rb.R22;
    return rb;
}

/// Max entrywise discrepancy between A - l0 M_w and (A - l0 M_u)(I - l0 (A - l0 M_u)^{-1} diag(m, 0)),
/// where M_w carries (1+m) and M_u the identity on the interior rows. Evaluated in Scalar arithmetic.
template <typename Scalar = std::complex<long double>>
Real verify_factorization_identity(const PencilBlocks& pencil, Real lambda0, const Contrast& contrast) {
    using Matrix = DenseMatrix<Scalar>;
    using RealS = typename Scalar::value_type;
    const PencilBlocks unweighted = pencil.with_weighting(Weighting::identity);
    const ComplexVector m = sample(pencil.grid, contrast);

    const Eigen::Index dim = pencil.dimension();
    Matrix A = pencil.A.cast<Scalar>();
    Matrix Mu = unweighted.M.cast<Scalar>();
    Matrix Dm = Matrix::Zero(dim, dim);
    for (int i = 1; i < pencil.grid.n; ++i) {
        Dm(pencil.u_rows[i - 1], pencil.u_cols[i]) = Scalar(m(i).real(), m(i).imag());
    }
    const Matrix Mw = Mu + Dm;
    const RealS l0 = static_cast<RealS>(lambda0);

    const Matrix Bu = A - l0 * Mu;
    const LuFactorization<Scalar> lu(Bu);
    const Matrix factor = Matrix::Identity(dim, dim) - l0 * Matrix(lu.solve(Dm));
    const Matrix lhs = A - l0 * Mw;
    const Matrix rhs = Bu * factor;
    return static_cast<Real>((lhs - rhs).cwiseAbs().maxCoeff());
}

}  // namespace itev
