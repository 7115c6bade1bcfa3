#include <gtest/gtest.h>

#include <cmath>

#include "itev/itev.hpp"

using namespace itev;

namespace {

CollocationGrid unit_grid(int n) { return build_grid(Domain1D(0.0, 1.0, 0.2), n); }

const Complex sqrt2_root(-205.54141319, 0.0);

}  // namespace

TEST(TripleNorm, ZeroAndScaling) {
    const CollocationGrid g = unit_grid(16);
    const ComplexMatrix Z = ComplexMatrix::Zero(2 * g.size(), 2 * (g.n - 1));
    EXPECT_EQ(triple_norm(g, Z), 0.0);
    const PencilBlocks p = build_pencil(g, Contrast::constant(1.0), Weighting::identity);
    const ComplexMatrix X = factorize(p, 100.0).lu.solve(p.data_embedding());
    EXPECT_NEAR(triple_norm(g, ComplexMatrix(3.0 * X)), 3.0 * triple_norm(g, X), 1e-10 * triple_norm(g, X));
}

TEST(Gamma, StaysBoundedFarFromTheSpectrum) {
    // The H2 part of the norm keeps Gamma of order one; only the L2 blocks decay.
    const PencilBlocks p = build_pencil(unit_grid(32), Contrast::constant(1.0), Weighting::identity);
    const Real g4 = gamma_on_contour(p, Contour(Complex(1e4, 0.0), 1.0), false).gamma_value;
    const Real g6 = gamma_on_contour(p, Contour(Complex(1e6, 0.0), 1.0), false).gamma_value;
    EXPECT_GT(g4, 0.0);
    EXPECT_LT(g4, 10.0);
    EXPECT_LT(g6, 10.0);

    const CutoffFunction phi = make_cutoff(p.grid.domain);
    const Real r4 = l2_operator_norm(p.grid, extract_blocks(p, 1e4, phi).R11);
    const Real r5 = l2_operator_norm(p.grid, extract_blocks(p, 1e5, phi).R11);
    EXPECT_NEAR(r5 / r4, 0.1, 0.02);
}

TEST(Gamma, GrowsAsTheContourClosesOnAnEigenvalue) {
    const PencilBlocks p = build_pencil(unit_grid(48), Contrast::from_index(3.1));
    Real previous = 0.0;
    for (Real r : {1.0, 0.5, 0.25}) {
        const Real g = gamma_on_contour(p, Contour(Complex(-9.1716, 0.05), r), true).gamma_value;
        EXPECT_GT(g, previous) << "radius " << r;
        previous = g;
    }
}

TEST(Continuity, BoundHoldsAndRankIsKept) {
    const CollocationGrid g = unit_grid(48);
    const PencilBlocks base = build_pencil(g, Contrast::constant(1.0));
    const Contour contour(sqrt2_root, 1.0);
    ContinuityOptions opts;
    opts.weighted = true;
    Real previous = 0.0, previous_eps = 0.0;
    for (Real eps : {1e-4, 1e-3}) {
        const ContinuityReport r =
            projector_continuity(base, build_pencil(g, Contrast::constant(1.0 + eps)), contour, opts);
        EXPECT_TRUE(r.applicable);
        EXPECT_TRUE(r.satisfied);
        EXPECT_LE(r.measured_delta_P, r.bound);
        EXPECT_EQ(r.rank_before, 1);
        EXPECT_EQ(r.rank_after, 1);
        if (previous > 0.0) EXPECT_LE(r.measured_delta_P / previous, 1.05 * eps / previous_eps);
        previous = r.measured_delta_P;
        previous_eps = eps;
    }
}

TEST(Continuity, LargePerturbationIsNotApplicable) {
    const CollocationGrid g = unit_grid(48);
    const PencilBlocks base = build_pencil(g, Contrast::constant(1.0));
    const PencilBlocks far = build_pencil(g, Contrast::constant(1.01));
    ContinuityOptions opts;
    opts.weighted = true;
    EXPECT_THROW(projector_continuity(base, far, Contour(sqrt2_root, 1.0), opts), BoundNotApplicableError);
    opts.allow_inapplicable = true;
    const ContinuityReport r = projector_continuity(base, far, Contour(sqrt2_root, 1.0), opts);
    EXPECT_FALSE(r.applicable);
    EXPECT_FALSE(r.satisfied);
    EXPECT_EQ(r.rank_before, 1);
    EXPECT_EQ(r.rank_after, 0);
}

TEST(Continuity, IdenticalContrastsGiveZero) {
    const CollocationGrid g = unit_grid(24);
    const PencilBlocks p = build_pencil(g, Contrast::from_index(3.0));
    const ContinuityReport r = projector_continuity(p, p, Contour(Complex(-12.678, 18.962), 5.0));
    EXPECT_EQ(r.measured_delta_P, 0.0);
    EXPECT_TRUE(r.satisfied);
}

TEST(Continuity, BoundFormula) {
    EXPECT_DOUBLE_EQ(continuity_bound(2.0, 0.1, 2.0), 2.0 * 0.1 * 4.0 / 0.8);
}

TEST(Tracking, ConstantFamilyDoesNotMove) {
    const Trajectory t = eigenvalue_tracking(index_linear_family(3.1, 0.0), 3, Contour(Complex(-9.1716, 0.0), 1.0),
                                             unit_grid(32));
    ASSERT_EQ(t.steps.size(), 4u);
    for (const auto& s : t.steps) {
        EXPECT_EQ(s.rank, 1);
        EXPECT_FALSE(s.rank_changed);
    }
    EXPECT_LE(t.max_jump(), 1e-10);
}

TEST(Tracking, LinearIndexFollowsTheReferenceRoots) {
    const CollocationGrid g = unit_grid(48);
    const Trajectory t = eigenvalue_tracking(index_linear_family(3.0, 0.1), 10, Contour(Complex(-8.5, 0.0), 2.5), g);
    ASSERT_EQ(t.steps.size(), 11u);
    for (const auto& s : t.steps) {
        ASSERT_FALSE(s.grazed);
        const OracleScan scan = find_real_roots(3.0 + 0.1 * s.t, 1.0, 4.0);
        for (const auto& pt : s.points) {
            if (std::abs(pt.eigenvalue.imag()) > 1e-6 * std::abs(pt.eigenvalue)) continue;
            Real best = std::numeric_limits<Real>::infinity();
            for (const auto& r : scan.roots) best = std::min(best, std::abs(pt.eigenvalue.real() - r.lambda));
            EXPECT_LE(best, 1e-6 * std::abs(pt.eigenvalue)) << "t = " << s.t;
        }
    }
    EXPECT_LT(t.max_jump(), 1.0);
}

TEST(Tracking, EigenvalueLeavingTheContourIsFlagged) {
    const Trajectory t = eigenvalue_tracking(index_linear_family(3.1, 0.2), 10, Contour(Complex(-6.5254, 0.0), 0.5),
                                             unit_grid(48));
    EXPECT_EQ(t.steps[0].rank, 1);
    EXPECT_EQ(t.steps[2].rank, 1);
    EXPECT_EQ(t.steps[3].rank, 0);
    EXPECT_TRUE(t.steps[3].rank_changed);
}
