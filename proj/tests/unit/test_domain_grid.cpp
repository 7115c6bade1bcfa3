#include <gtest/gtest.h>

#include <cmath>

#include "itev/itev.hpp"

using namespace itev;

namespace {

Domain1D unit(Real width = 0.2) { return Domain1D(0.0, 1.0, width); }

}  // namespace

TEST(Cutoff, InteriorPlateau) {
    const CutoffFunction phi(unit());
    EXPECT_DOUBLE_EQ(phi(0.5), 1.0);
}

TEST(Cutoff, VanishesAtEndpoints) {
    const CutoffFunction phi(unit());
    EXPECT_DOUBLE_EQ(phi(0.0), 0.0);
    EXPECT_DOUBLE_EQ(phi(1.0), 0.0);
}

TEST(Cutoff, RangeOnDenseGrid) {
    const CutoffFunction phi(unit());
    Real lo = 1.0, hi = 0.0;
    for (int j = 0; j <= 10000; ++j) {
        const Real v = phi(j / 10000.0);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    EXPECT_GE(lo, 0.0);
    EXPECT_LE(hi, 1.0);
}

TEST(Cutoff, SmoothStepIsMonotoneInsideTheNeighborhood) {
    const CutoffFunction phi(unit());
    Real prev = 0.0;
    for (int j = 0; j <= 200; ++j) {
        const Real v = phi(0.2 * j / 200.0);
        EXPECT_GE(v, prev - 1e-15);
        prev = v;
    }
}

TEST(Domain, RejectsBadWidths) {
    EXPECT_THROW(Domain1D(0.0, 1.0, 0.0), ConfigError);
    EXPECT_THROW(Domain1D(0.0, 1.0, 0.6), ConfigError);
    EXPECT_THROW(Domain1D(1.0, 0.0, 0.1), ConfigError);
}

TEST(Hypotheses, PositiveConstantPasses) {
    const CoercivityReport r = check_hypotheses(Contrast::constant(1.0), unit(), CoercivityParams{});
    EXPECT_TRUE(r.passes_all());
    EXPECT_EQ(r.item1_branch, Item1Branch::complex_rotation);
    ASSERT_TRUE(r.witness_theta.has_value());
    EXPECT_NEAR(*r.witness_theta, 0.0, 1e-12);
    EXPECT_LE(CoercivityParams{}.m_star, 1.0);
    EXPECT_TRUE(r.violating_points.empty());
}

TEST(Hypotheses, NegativeConstantUsesRealBranch) {
    CoercivityParams params;
    params.delta = 0.5;  // Re(1 + m) = 0.5
    const CoercivityReport r = check_hypotheses(Contrast::constant(-0.5), unit(), params);
    EXPECT_TRUE(r.passes_item1);
    EXPECT_EQ(r.item1_branch, Item1Branch::real_negative);
    EXPECT_TRUE(r.passes_item2);
    EXPECT_TRUE(r.passes_item3);
}

TEST(Hypotheses, LinearSignChangeFailsItemOne) {
    Polynomial p;
    p.coefficients = {Complex(-0.5), Complex(1.0)};
    const CoercivityReport r = check_hypotheses(Contrast(p), unit(0.1), CoercivityParams{});
    // m is real with both signs on N, so no rotation and no negative branch can work.
    EXPECT_FALSE(r.passes_item1);
    EXPECT_EQ(r.item1_branch, Item1Branch::none);
    EXPECT_FALSE(r.violating_points.empty());
}

TEST(Hypotheses, DeltaViolationListsEveryPoint) {
    CoercivityParams params;
    params.delta = 0.6;
    const CoercivityReport r = check_hypotheses(Contrast::constant(-0.5), unit(), params);
    EXPECT_TRUE(r.passes_item2);
    EXPECT_FALSE(r.passes_item3);
    EXPECT_EQ(r.violating_points.size(), 513u);
}

TEST(Contrast, PiecewiseEvaluation) {
    PiecewiseConstant pw;
    pw.breakpoints = {0.3};
    pw.values = {Complex(1.0), Complex(2.0, 1.0)};
    const Contrast m(pw);
    EXPECT_EQ(m(0.1), Complex(1.0));
    EXPECT_EQ(m(0.9), Complex(2.0, 1.0));
    EXPECT_FALSE(m.constant_value().has_value());
}

TEST(Contrast, PolynomialAndIndex) {
    Polynomial p;
    p.coefficients = {Complex(1.0), Complex(0.0), Complex(3.0)};
    EXPECT_NEAR(std::abs(Contrast(p)(0.5) - Complex(1.75)), 0.0, 1e-15);
    ASSERT_TRUE(Contrast::from_index(3.0).constant_value().has_value());
    EXPECT_DOUBLE_EQ(Contrast::from_index(3.0).constant_value()->real(), 8.0);
}

TEST(Contrast, SampledInterpolates) {
    Sampled s;
    s.nodes = {0.0, 0.5, 1.0};
    s.values = {Complex(0.0), Complex(1.0), Complex(0.0)};
    const Contrast m(s);
    EXPECT_NEAR(m(0.25).real(), 0.5, 1e-15);
}

TEST(Contrast, BreakpointOutsideDomainIsRejected) {
    PiecewiseConstant pw;
    pw.breakpoints = {1.5};
    pw.values = {Complex(1.0), Complex(2.0)};
    EXPECT_THROW(Contrast(pw).check_evaluable(unit()), InputError);
}

TEST(Grid, SecondDerivativeOfSquareIsTwo) {
    const CollocationGrid g = build_grid(Domain1D(-1.0, 1.0, 0.2), 8);
    const RealVector x2 = g.nodes.cwiseAbs2();
    const RealVector d2 = g.D2 * x2;
    for (Eigen::Index j = 0; j < d2.size(); ++j) EXPECT_NEAR(d2(j), 2.0, 1e-12);
}

TEST(Grid, DerivativeOfConstantIsZero) {
    const CollocationGrid g = build_grid(unit(), 8);
    const RealVector d1 = g.D1 * RealVector::Ones(g.size());
    EXPECT_LE(d1.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Grid, QuadratureOfOne) {
    const CollocationGrid g = build_grid(unit(), 16);
    EXPECT_NEAR(g.quadrature_weights.sum(), 1.0, 1e-12);
}

TEST(Grid, ExactOnPolynomialsOfDegreeN) {
    // d/dx x^5 = 5 x^4 and the integral of x^5 over (0, 1) is 1/6.
    const CollocationGrid g = build_grid(unit(), 12);
    const RealVector x5 = g.nodes.array().pow(5);
    const RealVector exact = 5.0 * g.nodes.array().pow(4);
    EXPECT_LE((g.D1 * x5 - exact).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(integrate(g, x5), 1.0 / 6.0, 1e-14);
}

TEST(Grid, NodesIncludeEndpoints) {
    const CollocationGrid g = build_grid(Domain1D(2.0, 5.0, 0.3), 10);
    EXPECT_DOUBLE_EQ(g.nodes(0), 2.0);
    EXPECT_DOUBLE_EQ(g.nodes(10), 5.0);
}
