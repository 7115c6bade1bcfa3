#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "itev/itev.hpp"

using namespace itev;

namespace {

CollocationGrid unit_grid(int n) { return build_grid(Domain1D(0.0, 1.0, 0.2), n); }

Contrast linear_contrast() {
    Polynomial p;
    p.coefficients = {Complex(1.0), Complex(1.0)};
    return Contrast(p);
}

}  // namespace

TEST(Pencil, DimensionsAndZeroRowsOfM) {
    const PencilBlocks p = build_pencil(unit_grid(8), Contrast::constant(1.0));
    EXPECT_EQ(p.A.rows(), 18);
    EXPECT_EQ(p.A.cols(), 18);
    EXPECT_EQ(p.M.rows(), 18);
    int zero_rows = 0;
    for (Eigen::Index r = 0; r < p.M.rows(); ++r) zero_rows += p.M.row(r).cwiseAbs().maxCoeff() == 0.0;
    EXPECT_EQ(zero_rows, 4);
    for (Eigen::Index r : p.bc_rows) EXPECT_EQ(p.M.row(r).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Pencil, WeightingOnTheDiagonal) {
    const PencilBlocks p = build_pencil(unit_grid(8), Contrast::constant(Complex(1.0, 0.5)));
    EXPECT_EQ(p.M(p.u_rows[2], p.u_cols[3]), Complex(2.0, 0.5));
    EXPECT_EQ(p.M(p.v_rows[2], p.v_cols[3]), Complex(1.0));
    const PencilBlocks q = p.with_weighting(Weighting::identity);
    EXPECT_EQ(q.M(q.u_rows[2], q.u_cols[3]), Complex(1.0));
    EXPECT_EQ(q.A, p.A);
}

TEST(Pencil, ZeroContrastDecouplesTheBlocks) {
    const PencilBlocks p = build_pencil(unit_grid(8), Contrast::constant(0.0));
    const Eigen::Index size = p.grid.size();
    EXPECT_EQ(p.A.block(0, size, size + 2, size).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Pencil, ReflectionSymmetryForConstantContrast) {
    const int n = 10;
    const PencilBlocks p = build_pencil(unit_grid(n), Contrast::constant(2.0));
    const Eigen::Index size = p.grid.size();
    const Eigen::Index dim = p.dimension();
    // Column map x -> 1 - x on both unknowns.
    std::vector<Eigen::Index> col(dim);
    for (Eigen::Index j = 0; j < size; ++j) {
        col[j] = n - j;
        col[size + j] = size + n - j;
    }
    // Row map: interior rows reflect, Dirichlet rows swap, Neumann rows swap with a sign.
    std::vector<Eigen::Index> row(dim);
    std::vector<Real> sign(dim, 1.0);
    for (int i = 1; i < n; ++i) {
        row[p.u_rows[i - 1]] = p.u_rows[n - i - 1];
        row[p.v_rows[i - 1]] = p.v_rows[n - i - 1];
    }
    row[p.bc_rows[0]] = p.bc_rows[1];
    row[p.bc_rows[1]] = p.bc_rows[0];
    row[p.bc_rows[2]] = p.bc_rows[3];
    row[p.bc_rows[3]] = p.bc_rows[2];
    sign[p.bc_rows[2]] = sign[p.bc_rows[3]] = -1.0;

    const Real scale = p.A.cwiseAbs().maxCoeff();
    Real worst = 0.0;
    for (Eigen::Index r = 0; r < dim; ++r)
        for (Eigen::Index c = 0; c < dim; ++c)
            worst = std::max(worst, std::abs(p.A(row[r], col[c]) - sign[r] * p.A(r, c)));
    EXPECT_LE(worst, 1e-12 * scale);
}

TEST(Pencil, ApplyPencilSplitsResiduals) {
    const PencilBlocks p = build_pencil(unit_grid(12), Contrast::constant(1.0));
    StatePair s = StatePair::zero(p.grid.size());
    s.u(0) = 1.0;  // violates u(a) = 0 only
    const PencilResidual r = apply_pencil(p, 3.0, s);
    EXPECT_NEAR(std::abs(r.bc_residual[0]), 1.0, 1e-14);
    EXPECT_NEAR(std::abs(r.bc_residual[1]), 0.0, 1e-14);
}

TEST(Resolvent, ManufacturedSolution) {
    const CollocationGrid g = unit_grid(32);
    const Contrast m = linear_contrast();
    const PencilBlocks p = build_pencil(g, m);
    const Real lambda = 10.0;
    ComplexVector u(g.size()), v(g.size()), f(g.size()), gg(g.size());
    for (Eigen::Index j = 0; j < g.size(); ++j) {
        const Real x = g.nodes(j);
        const Real us = x * x * (1 - x) * (1 - x);
        const Real us2 = 2.0 - 12.0 * x + 12.0 * x * x;
        const Real vs = std::cos(pi * x);
        const Complex mj = m(x);
        u(j) = us;
        v(j) = vs;
        f(j) = us2 - lambda * (1.0 + mj) * us + mj * vs;
        gg(j) = -pi * pi * vs - lambda * vs;
    }
    const StatePair s = solve(factorize(p, lambda), f, gg);
    EXPECT_LE((s.u - u).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((s.v - v).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Resolvent, FactorizeAwayFromAndAtAnEigenvalue) {
    const PencilBlocks p = build_pencil(unit_grid(48), Contrast::from_index(3.0));
    EXPECT_NO_THROW(factorize(p, 1e4));
    EXPECT_NO_THROW(factorize(p, Complex(-pi * pi, 3.0)));
    EXPECT_THROW(factorize(p, -pi * pi), NearSingularError);
}

TEST(Resolvent, SolveRoundTrip) {
    const CollocationGrid g = unit_grid(24);
    const PencilBlocks p = build_pencil(g, linear_contrast());
    std::mt19937_64 rng(3);
    const ComplexVector f = random_smooth(g, rng);
    const ComplexVector gg = random_smooth(g, rng);
    const Complex lambda(50.0, 5.0);
    const StatePair s = solve(factorize(p, lambda), f, gg);
    const PencilResidual r = apply_pencil(p, lambda, s);
    const Real scale = std::max(f.cwiseAbs().maxCoeff(), gg.cwiseAbs().maxCoeff());
    for (int i = 1; i < g.n; ++i) {
        EXPECT_NEAR(std::abs(r.residual_f(i) - f(i)), 0.0, 1e-10 * scale);
        EXPECT_NEAR(std::abs(r.residual_g(i) - gg(i)), 0.0, 1e-10 * scale);
    }
    for (const Complex& b : r.bc_residual) EXPECT_LE(std::abs(b), 1e-10 * scale);
}

TEST(Resolvent, BlocksInvertThePencilOnData) {
    const PencilBlocks p = build_pencil(unit_grid(20), linear_contrast());
    const Complex lambda(1e3, 0.0);
    const ResolventBlocks rb = extract_blocks(p, lambda, make_cutoff(p.grid.domain));
    const Eigen::Index size = p.grid.size();
    const Eigen::Index k = p.grid.n - 1;
    ComplexMatrix X(2 * size, 2 * k);
    X << rb.R11, rb.R12, rb.R21, rb.R22;
    const ComplexMatrix E = p.data_embedding();
    const ComplexMatrix defect = (p.A - lambda * p.M) * X - E;
    EXPECT_LE(defect.cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Resolvent, CutoffBlockVanishesAtTheEndpoints) {
    const PencilBlocks p = build_pencil(unit_grid(20), Contrast::constant(1.0), Weighting::identity);
    const ResolventBlocks rb = extract_blocks(p, 1e3, make_cutoff(p.grid.domain));
    EXPECT_EQ(rb.phi_R21.row(0).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(rb.phi_R21.row(20).cwiseAbs().maxCoeff(), 0.0);
}

TEST(FactorizationIdentity, PositiveContrast) {
    const PencilBlocks p = build_pencil(unit_grid(24), Contrast::constant(1.0));
    EXPECT_LE(verify_factorization_identity(p, 1e3, Contrast::constant(1.0)), 1e-9);
}

TEST(FactorizationIdentity, NegativeContrast) {
    const PencilBlocks p = build_pencil(unit_grid(24), Contrast::constant(-0.5));
    EXPECT_LE(verify_factorization_identity(p, 1e4, Contrast::constant(-0.5)), 1e-9);
}

TEST(FactorizationIdentity, ZeroContrastIsSingular) {
    // With m = 0 the v-block has two free boundary values and the u-block two extra rows.
    const PencilBlocks p = build_pencil(unit_grid(24), Contrast::constant(0.0));
    EXPECT_THROW(factorize(p, 1e4), NearSingularError);
    EXPECT_THROW(verify_factorization_identity(p, 1e4, Contrast::constant(0.0)), NearSingularError);
}
