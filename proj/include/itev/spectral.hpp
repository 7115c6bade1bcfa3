#pragma once

// Contour integrals of the pencil resolvent: spectral projectors, multiplicities
// and eigenpairs inside a circle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "itev/errors.hpp"
#include "itev/pencil.hpp"
#include "itev/resolvent.hpp"
#include "itev/types.hpp"

namespace itev {

/// Circle with trapezoidal nodes center + radius * exp(2 pi i j / n_quad).
struct Contour {
    Complex center{0.0};
    Real radius = 1.0;
    int n_quad = 64;

    Contour() = default;
    Contour(Complex c, Real r, int nq = 64) : center(c), radius(r), n_quad(nq) { validate(); }

    void validate() const {
        if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("contour radius must be positive");
        if (!std::isfinite(center.real()) || !std::isfinite(center.imag())) {
            throw ConfigError("contour center must be finite");
        }
        if (n_quad < 16 || n_quad % 2 != 0) throw ConfigError("n_quad must be even and at least 16");
    }

    Complex node(int j, int count) const {
        return center + std::polar(radius, 2.0 * pi * static_cast<Real>(j) / static_cast<Real>(count));
    }
    std::vector<Complex> nodes() const {
        std::vector<Complex> out(static_cast<std::size_t>(n_quad));
        for (int j = 0; j < n_quad; ++j) out[static_cast<std::size_t>(j)] = node(j, n_quad);
        return out;
    }
    /// Trapezoidal weight of dz / (2 pi i) at node j.
    Complex weight(int j, int count) const { return (node(j, count) - center) / static_cast<Real>(count); }

    Real length() const noexcept { return 2.0 * pi * radius; }
    bool strictly_inside(Complex z, Real rel_margin) const {
        return std::abs(z - center) < radius * (1.0 - rel_margin);
    }
};

struct QuadratureOptions {
    Real saturation_tol = 1e-8;   // max entrywise change between n and 2n nodes, relative to max(1, |X|)
    int max_quad = 1024;
    Real condition_cap = default_condition_cap;
};

/// (1/2 pi i) * contour integral of z^p (zM - A)^{-1} B for p = 0 (and p = 1).
struct ContourMoments {
    ComplexMatrix zeroth;
    ComplexMatrix first;
    int n_quad = 0;
    Real last_change = 0.0;
    bool converged = false;
};

namespace detail {

/// Raw trapezoid sums over the nodes j = offset, offset + stride, ... of a count-point rule.
inline void accumulate_nodes(const PencilBlocks& pencil, const Contour& contour, const ComplexMatrix& B,
                             int count, int offset, int stride, bool first, Real condition_cap,
                             ComplexMatrix& s0, ComplexMatrix& s1) {
    for (int j = offset; j < count; j += stride) {
        const Complex z = contour.node(j, count);
        const Complex scale = z - contour.center;
        ComplexMatrix shifted = z * pencil.M - pencil.A;
        try {
            const LuFactorization<Complex> lu(shifted, condition_cap);
            const ComplexMatrix X = lu.solve(B);
            s0 += scale * X;
            if (first) s1 += (scale * z) * X;
        } catch (const NearSingularError&) {
            throw ContourGrazeError("contour grazes the spectrum near z = (" + std::to_string(z.real()) + ", " +
                                        std::to_string(z.imag()) + "); adjust the radius",
                                    contour.radius * 1.1);
        }
    }
}

inline Real max_abs(const ComplexMatrix& X) { return X.size() ? X.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace detail

/// Trapezoid moments with node doubling until the zeroth moment settles.
inline ContourMoments contour_moments(const PencilBlocks& pencil, const Contour& contour, const ComplexMatrix& B,
                                      bool first_moment, const QuadratureOptions& opts = {}) {
    contour.validate();
    if (B.rows() != pencil.dimension()) throw InternalError("moment right-hand side has the wrong row count");
    ComplexMatrix s0 = ComplexMatrix::Zero(B.rows(), B.cols());
    ComplexMatrix s1 = first_moment ? ComplexMatrix::Zero(B.rows(), B.cols()) : ComplexMatrix();
    int count = contour.n_quad;
    detail::accumulate_nodes(pencil, contour, B, count, 0, 1, first_moment, opts.condition_cap, s0, s1);

    ContourMoments out;
    ComplexMatrix previous = s0 / static_cast<Real>(count);
    while (true) {
        const int next = 2 * count;
        if (next > opts.max_quad) break;
        detail::accumulate_nodes(pencil, contour, B, next, 1, 2, first_moment, opts.condition_cap, s0, s1);
        count = next;
        ComplexMatrix current = s0 / static_cast<Real>(count);
        out.last_change = detail::max_abs(current - previous);
        const bool done = out.last_change <= opts.saturation_tol * std::max(1.0, detail::max_abs(current));
        previous = std::move(current);
        if (done) {
            out.converged = true;
            break;
        }
    }
    out.n_quad = count;
    out.zeroth = std::move(previous);
    if (first_moment) out.first = s1 / static_cast<Real>(count);
    return out;
}

struct RankOptions {
    Real rel_tol = 1e-8;    // singular values above rel_tol * sigma_1 count
    Real abs_floor = 1e-10; // rank 0 if sigma_1 is below this
};

/// Singular values above rel_tol * max(sigma_1, scale) count. scale is the size a genuine
/// spectral component would have, so a quadrature leak far below it cannot pull the
/// threshold down into round-off.
inline int numerical_rank(const RealVector& sigma, const RankOptions& opts = {}, Real scale = 0.0) {
    if (sigma.size() == 0 || !(sigma(0) >= opts.abs_floor * std::max(Real{1}, scale))) return 0;
    const Real ref = std::max(sigma(0), scale);
    int rank = 0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) rank += sigma(i) > opts.rel_tol * ref;
    return rank;
}

struct SpectralProjection {
    ComplexMatrix P;
    int rank = 0;
    RealVector singular_values;
    Real idempotency_defect = 0.0;  // ||P^2 - P|| / max(||P||, 1)
    Real norm = 0.0;
    int n_quad = 0;
    bool quadrature_converged = false;
};

inline int multiplicity(const SpectralProjection& projection, const RankOptions& opts = {}) {
    return numerical_rank(projection.singular_values, opts, 1.0);
}

/// P = (1/2 pi i) * contour integral of (zM - A)^{-1} M dz.
inline SpectralProjection spectral_projector(const PencilBlocks& pencil, const Contour& contour,
                                             const QuadratureOptions& quad = {}, const RankOptions& rank = {}) {
    const ContourMoments mom = contour_moments(pencil, contour, pencil.M, false, quad);
    SpectralProjection sp;
    sp.P = mom.zeroth;
    sp.n_quad = mom.n_quad;
    sp.quadrature_converged = mom.converged;
    sp.singular_values = singular_values(sp.P);
    sp.norm = sp.singular_values.size() ? sp.singular_values(0) : 0.0;
    sp.rank = numerical_rank(sp.singular_values, rank, 1.0);  // a nonzero projector has norm >= 1
    sp.idempotency_defect = spectral_norm(sp.P * sp.P - sp.P) / std::max(sp.norm, 1.0);
    return sp;
}

/// Relative residual ||(A - lambda M) x|| / (||A x|| + |lambda| ||M x||).
inline Real eigen_residual(const PencilBlocks& pencil, Complex lambda, const ComplexVector& x) {
    const ComplexVector Ax = pencil.A * x;
    const ComplexVector Mx = pencil.M * x;
    const Real den = Ax.norm() + std::abs(lambda) * Mx.norm();
    return den > 0.0 ? (Ax - lambda * Mx).norm() / den : std::numeric_limits<Real>::infinity();
}

struct EigenOptions {
    int probe_rank = 8;
    std::uint64_t seed = 0;
    Real cluster_rel_tol = 1e-3;    // Ritz values closer than this * max(1, |lambda|) form one eigenvalue
    Real boundary_rel_tol = 1e-8;   // within this * radius of the circle: boundary-ambiguous
    Real residual_cap = 1e-7;       // eigenvectors above this residual are dropped
    QuadratureOptions quadrature;
    RankOptions rank;
};

struct Eigenpair {
    Complex lambda;
    int algebraic_multiplicity = 1;  // Ritz values merged into this eigenvalue
    bool boundary_ambiguous = false;
    std::vector<StatePair> vectors;  // orthonormal basis of the computed eigenspace
    std::vector<Real> residuals;
    std::vector<Complex> ritz_values;
};

struct EigenResult {
    Contour contour;
    int discretization_n = 0;
    std::vector<Eigenpair> eigenpairs;  // strictly inside, plus boundary-ambiguous ones flagged
    int multiplicity_total = 0;         // sum of algebraic multiplicities of the eigenpairs
    int subspace_rank = 0;              // rank of the moment matrix; exceeds the total when
                                        // eigenvalues just outside leak through the quadrature
    RealVector singular_values;
    int n_quad = 0;
    bool quadrature_converged = false;
    std::vector<Complex> rejected;      // Ritz clusters without an eigenvector under the residual cap

    std::vector<Complex> eigenvalues() const {
        std::vector<Complex> out;
        for (const auto& e : eigenpairs) out.push_back(e.lambda);
        return out;
    }
    /// Worst residual per eigenvalue.
    std::vector<Real> residuals() const {
        std::vector<Real> out;
        for (const auto& e : eigenpairs) {
            Real worst = 0.0;
            for (Real r : e.residuals) worst = std::max(worst, r);
            out.push_back(worst);
        }
        return out;
    }
};

/// Seeded complex Gaussian block.
inline ComplexMatrix random_probe(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<Real> normal(0.0, 1.0);
    ComplexMatrix V(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) {
            const Real re = normal(rng);
            const Real im = normal(rng);
            V(i, j) = Complex(re, im);
        }
    return V;
}

namespace detail {

inline bool complex_less(const Complex& x, const Complex& y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
}

/// Eigenvectors for a merged eigenvalue: the right singular vectors of (A - lambda M) Q
/// on the Ritz subspace Q whose residual is below the cap; the best one is always kept.
inline void extract_vectors(const PencilBlocks& pencil, Eigenpair& pair, const ComplexMatrix& ritz_vectors,
                            Real residual_cap) {
    const Eigen::HouseholderQR<ComplexMatrix> qr(ritz_vectors);
    const Eigen::Index k = ritz_vectors.cols();
    const ComplexMatrix Q = qr.householderQ() * ComplexMatrix::Identity(ritz_vectors.rows(), k);
    const ComplexMatrix T = (pencil.A - pair.lambda * pencil.M) * Q;
    Eigen::JacobiSVD<ComplexMatrix> svd(T, Eigen::ComputeThinV);
    const ComplexMatrix& V = svd.matrixV();

    std::vector<ComplexVector> kept;
    std::vector<Real> res;
    for (Eigen::Index j = k - 1; j >= 0; --j) {
        ComplexVector x = Q * V.col(j);
        Real r = eigen_residual(pencil, pair.lambda, x);
        if (kept.empty() && r > residual_cap) {
            // One step of inverse iteration from the best candidate.
            const ComplexMatrix shifted = pencil.A - pair.lambda * pencil.M;
            Eigen::PartialPivLU<ComplexMatrix> lu(shifted);
            ComplexVector y = lu.solve(pencil.M * x);
            if (y.allFinite() && y.norm() > 0.0) {
                y /= y.norm();
                const Real ry = eigen_residual(pencil, pair.lambda, y);
                if (ry < r) {
                    x = y;
                    r = ry;
                }
            }
        }
        if (r <= residual_cap || kept.empty()) {
            kept.push_back(x);
            res.push_back(r);
        }
        if (r > residual_cap) break;
    }
    for (std::size_t i = 0; i < kept.size(); ++i) {
        ComplexVector x = kept[i];
        // Fix the phase so the largest entry is real positive; keeps output deterministic.
        Eigen::Index imax = 0;
        x.cwiseAbs().maxCoeff(&imax);
        x *= std::abs(x(imax)) / x(imax);
        pair.vectors.push_back(StatePair::split(x));
        pair.residuals.push_back(res[i]);
    }
}

}  // namespace detail

/// Eigenvalues inside a circle from the first two contour moments of a seeded probe block.
inline EigenResult eigs_in_contour(const PencilBlocks& pencil, const Contour& contour, const EigenOptions& opts = {}) {
    contour.validate();
    if (opts.probe_rank < 1 || opts.probe_rank > 32) throw ConfigError("probe_rank must lie in [1, 32]");
    if (opts.probe_rank > pencil.dimension()) throw ConfigError("probe_rank exceeds the pencil dimension");

    const ComplexMatrix V = random_probe(pencil.dimension(), opts.probe_rank, opts.seed);
    const ContourMoments mom = contour_moments(pencil, contour, pencil.M * V, true, opts.quadrature);

    EigenResult result;
    result.contour = contour;
    result.discretization_n = pencil.grid.n;
    result.n_quad = mom.n_quad;
    result.quadrature_converged = mom.converged;

    Eigen::JacobiSVD<ComplexMatrix> svd(mom.zeroth, Eigen::ComputeThinU | Eigen::ComputeThinV);
    result.singular_values = svd.singularValues();
    // The moment is P applied to the probe: both genuine content and round-off scale with it.
    const int k = numerical_rank(result.singular_values, opts.rank, spectral_norm(ComplexMatrix(pencil.M * V)));
    result.subspace_rank = k;
    if (k == 0) return result;
    if (k == opts.probe_rank) {
        throw ProbeSaturatedError("every probe direction carries spectral content; increase probe_rank");
    }

    const ComplexMatrix Uk = svd.matrixU().leftCols(k);
    const ComplexMatrix Wk = svd.matrixV().leftCols(k);
    const RealVector sk = result.singular_values.head(k);
    const ComplexMatrix reduced = Uk.adjoint() * mom.first * Wk * sk.cwiseInverse().asDiagonal();
    Eigen::ComplexEigenSolver<ComplexMatrix> ces(reduced);
    if (ces.info() != Eigen::Success) throw InternalError("reduced eigenproblem did not converge");

    struct Ritz {
        Complex value;
        ComplexVector vector;
    };
    std::vector<Ritz> ritz;
    for (int i = 0; i < k; ++i) {
        const Complex mu = ces.eigenvalues()(i);
        const Real dist = std::abs(mu - contour.center);
        if (dist > contour.radius * (1.0 + opts.boundary_rel_tol)) continue;
        ritz.push_back({mu, Uk * ces.eigenvectors().col(i)});
    }
    std::sort(ritz.begin(), ritz.end(), [](const Ritz& x, const Ritz& y) { return detail::complex_less(x.value, y.value); });

    // Single-linkage clustering of Ritz values.
    std::vector<int> label(ritz.size(), -1);
    int clusters = 0;
    for (std::size_t i = 0; i < ritz.size(); ++i) {
        if (label[i] >= 0) continue;
        label[i] = clusters;
        std::vector<std::size_t> stack{i};
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            for (std::size_t q = 0; q < ritz.size(); ++q) {
                if (label[q] >= 0) continue;
                const Real tol = opts.cluster_rel_tol * std::max(1.0, std::abs(ritz[p].value));
                if (std::abs(ritz[q].value - ritz[p].value) <= tol) {
                    label[q] = clusters;
                    stack.push_back(q);
                }
            }
        }
        ++clusters;
    }

    for (int c = 0; c < clusters; ++c) {
        Eigenpair pair;
        Complex sum{0.0};
        std::vector<ComplexVector> vecs;
        for (std::size_t i = 0; i < ritz.size(); ++i) {
            if (label[i] != c) continue;
            sum += ritz[i].value;
            pair.ritz_values.push_back(ritz[i].value);
            vecs.push_back(ritz[i].vector);
        }
        pair.algebraic_multiplicity = static_cast<int>(vecs.size());
        pair.lambda = sum / static_cast<Real>(vecs.size());
        const Real dist = std::abs(pair.lambda - contour.center);
        if (dist >= contour.radius * (1.0 + opts.boundary_rel_tol)) continue;
        pair.boundary_ambiguous = std::abs(dist - contour.radius) <= opts.boundary_rel_tol * contour.radius;
        ComplexMatrix basis(pencil.dimension(), static_cast<Eigen::Index>(vecs.size()));
        for (std::size_t i = 0; i < vecs.size(); ++i) basis.col(static_cast<Eigen::Index>(i)) = vecs[i];
        detail::extract_vectors(pencil, pair, basis, opts.residual_cap);
        if (pair.residuals.front() > opts.residual_cap) {
            // No eigenvector meets the cap: a quadrature image of an eigenvalue outside.
            result.rejected.push_back(pair.lambda);
            continue;
        }
        result.multiplicity_total += pair.algebraic_multiplicity;
        result.eigenpairs.push_back(std::move(pair));
    }
    std::sort(result.eigenpairs.begin(), result.eigenpairs.end(),
              [](const Eigenpair& x, const Eigenpair& y) { return detail::complex_less(x.lambda, y.lambda); });
    return result;
}

}  // namespace itev
