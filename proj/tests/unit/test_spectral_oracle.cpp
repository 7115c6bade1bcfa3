#include <gtest/gtest.h>

#include <cmath>

#include "itev/itev.hpp"

using namespace itev;

namespace {

PencilBlocks index_pencil(Real n_index, int n, Weighting w = Weighting::contrast) {
    return build_pencil(build_grid(Domain1D(0.0, 1.0, 0.2), n), Contrast::from_index(n_index), w);
}

// 4x4 determinant by cofactor expansion along the first row.
Complex det3(const Matrix4c& S, int skip_col) {
    int c[3], k = 0;
    for (int j = 0; j < 4; ++j)
        if (j != skip_col) c[k++] = j;
    return S(1, c[0]) * (S(2, c[1]) * S(3, c[2]) - S(2, c[2]) * S(3, c[1])) -
           S(1, c[1]) * (S(2, c[0]) * S(3, c[2]) - S(2, c[2]) * S(3, c[0])) +
           S(1, c[2]) * (S(2, c[0]) * S(3, c[1]) - S(2, c[1]) * S(3, c[0]));
}

Complex cofactor_det(const Matrix4c& S) {
    Complex d{0.0};
    for (int j = 0; j < 4; ++j) d += (j % 2 ? -1.0 : 1.0) * S(0, j) * det3(S, j);
    return d;
}

}  // namespace

TEST(Projector, EmptyContourHasRankZero) {
    const SpectralProjection sp = spectral_projector(index_pencil(2.0, 32, Weighting::identity),
                                                     Contour(Complex(1e4, 0.0), 1.0));
    EXPECT_EQ(sp.rank, 0);
    EXPECT_LE(sp.norm, 1e-8);
}

TEST(Projector, IdempotentAroundAnEigenvalue) {
    const SpectralProjection sp = spectral_projector(index_pencil(3.0, 48), Contour(Complex(-pi * pi, 0.0), 1.0));
    EXPECT_GT(sp.rank, 0);
    EXPECT_LE(sp.idempotency_defect, 1e-6);
}

TEST(Eigs, FindsMinusPiSquaredForIndexThree) {
    const PencilBlocks p = index_pencil(3.0, 48);
    const EigenResult r = eigs_in_contour(p, Contour(Complex(-pi * pi, 0.0), 1.0));
    ASSERT_EQ(r.eigenpairs.size(), 1u);
    EXPECT_LE(std::abs(r.eigenpairs[0].lambda + pi * pi), 1e-6 * pi * pi);
    for (const auto& e : r.eigenpairs) {
        for (const StatePair& s : e.vectors) EXPECT_LE(eigen_residual(p, e.lambda, s.stacked()), 1e-7);
    }
    EXPECT_EQ(r.multiplicity_total, r.subspace_rank);
}

TEST(Eigs, EmptyContour) {
    const EigenResult r = eigs_in_contour(index_pencil(3.0, 32), Contour(Complex(1e4, 0.0), 1.0));
    EXPECT_TRUE(r.eigenpairs.empty());
    EXPECT_EQ(r.multiplicity_total, 0);
}

TEST(Eigs, MultiplicityZeroOneTwo) {
    const PencilBlocks p = index_pencil(3.1, 48);
    EXPECT_EQ(eigs_in_contour(p, Contour(Complex(50.0, 0.0), 1.0)).multiplicity_total, 0);
    const EigenResult one = eigs_in_contour(p, Contour(Complex(-9.1716, 0.0), 1.0));
    EXPECT_EQ(one.multiplicity_total, 1);
    const EigenResult two = eigs_in_contour(p, Contour(Complex(-7.85, 0.0), 2.0));
    EXPECT_EQ(two.multiplicity_total, 2);

    // The single real eigenvalue matches the constant-index reference.
    const OracleScan scan = find_real_roots(3.1, 2.5, 3.5);
    ASSERT_EQ(one.eigenpairs.size(), 1u);
    Real best = std::numeric_limits<Real>::infinity();
    for (const auto& root : scan.roots) best = std::min(best, std::abs(one.eigenpairs[0].lambda - root.lambda));
    EXPECT_LE(best, 1e-6 * 9.1716);
}

TEST(Eigs, GrazingContourRaises) {
    // A quadrature node lands on -pi^2.
    const PencilBlocks p = index_pencil(3.0, 32);
    EXPECT_THROW(eigs_in_contour(p, Contour(Complex(-pi * pi + 1.0, 0.0), 1.0)), ContourGrazeError);
}

TEST(Eigs, ProbeSaturation) {
    EigenOptions opts;
    opts.probe_rank = 1;
    EXPECT_THROW(eigs_in_contour(index_pencil(3.0, 32), Contour(Complex(-pi * pi, 0.0), 1.0), opts),
                 ProbeSaturatedError);
}

TEST(Eigs, DeterministicForAFixedSeed) {
    const PencilBlocks p = index_pencil(3.1, 32);
    EigenOptions opts;
    opts.seed = 11;
    const EigenResult a = eigs_in_contour(p, Contour(Complex(-9.1716, 0.0), 1.0), opts);
    const EigenResult b = eigs_in_contour(p, Contour(Complex(-9.1716, 0.0), 1.0), opts);
    ASSERT_EQ(a.eigenpairs.size(), b.eigenpairs.size());
    for (std::size_t i = 0; i < a.eigenpairs.size(); ++i) EXPECT_EQ(a.eigenpairs[i].lambda, b.eigenpairs[i].lambda);
}

TEST(Eigs, RejectsBadProbeRank) {
    EigenOptions opts;
    opts.probe_rank = 0;
    EXPECT_THROW(eigs_in_contour(index_pencil(3.0, 16), Contour(Complex(0.0, 0.0), 1.0), opts), ConfigError);
}

TEST(Rank, ScaleSetsTheReference) {
    RealVector s(3);
    s << 1e-5, 1e-12, 1e-20;
    EXPECT_EQ(numerical_rank(s), 2);
    // Against a probe of unit size the first value is genuine, the second is noise.
    EXPECT_EQ(numerical_rank(s, RankOptions{}, 1.0), 1);
    EXPECT_EQ(numerical_rank(RealVector::Zero(3)), 0);
}

TEST(Oracle, DeterminantMatchesCofactorExpansion) {
    for (Real n_index : {1.5, 2.0, 3.1}) {
        for (Complex k : {Complex(0.7, 0.0), Complex(2.3, 0.4), Complex(5.0, -1.2)}) {
            const Complex a = matching_determinant(n_index, k);
            const Complex b = cofactor_det(matching_matrix(n_index, k));
            EXPECT_LE(std::abs(a - b), 1e-10 * std::max(1.0, std::abs(b)));
        }
    }
}

TEST(Oracle, RealFactorizationOfTheDeterminant) {
    for (Real k : {0.9, 2.2, 6.7}) {
        const Complex d = matching_determinant(3.1, k);
        EXPECT_LE(std::abs(d.imag()), 1e-10 * std::max(1.0, std::abs(d)));
        EXPECT_NEAR(std::abs(d), std::abs(real_combination(3.1, k)), 1e-9 * std::max(1.0, std::abs(d)));
    }
}

TEST(Oracle, IndexTwoRootsAreMultiplesOfTwoPi) {
    // For n = 2 both factors reduce to multiples of sin(k/2).
    const OracleScan scan = find_real_roots(2.0, 1.0, 15.0);
    ASSERT_EQ(scan.roots.size(), 2u);
    EXPECT_NEAR(scan.roots[0].k, 2.0 * pi, 1e-6);
    EXPECT_NEAR(scan.roots[1].k, 4.0 * pi, 1e-6);
}

TEST(Oracle, RootsLieInsideTheirBrackets) {
    const OracleScan scan = find_real_roots(3.1, 1.0, 15.0);
    ASSERT_FALSE(scan.roots.empty());
    for (const auto& r : scan.roots) {
        EXPECT_LE(r.k_lo, r.k);
        EXPECT_GE(r.k_hi, r.k);
        EXPECT_GT(r.k, 1.0);
        EXPECT_LT(r.k, 15.0);
        EXPECT_DOUBLE_EQ(r.lambda, -r.k * r.k);
    }
}

TEST(Oracle, SqrtTwoHasOneRootInTheWindow) {
    const OracleScan scan = find_real_roots(std::sqrt(2.0), 1.0, 15.0);
    ASSERT_EQ(scan.roots.size(), 1u);
    EXPECT_NEAR(scan.roots[0].k, 14.33671557, 1e-6);
}

TEST(Oracle, IndexOneIsDegenerate) {
    EXPECT_THROW(find_real_roots(1.0, 1.0, 15.0), DegenerateContrastError);
    EXPECT_THROW(matching_determinant(-1.0, 1.0), InputError);
}

TEST(Oracle, PencilCoordinatesAndRescaling) {
    std::vector<OracleRoot> roots{{2.0, -4.0, 1.9, 2.1, 0.0}};
    const auto z = to_pencil_coordinates(roots);
    EXPECT_EQ(z[0], Complex(-4.0, 0.0));
    const auto r = rescale_roots(roots, 2.0);
    EXPECT_DOUBLE_EQ(r[0].k, 1.0);
    EXPECT_DOUBLE_EQ(r[0].lambda, -1.0);
}

TEST(Oracle, SolverAgreesForIndexTwo) {
    const PencilBlocks p = index_pencil(2.0, 48);
    EigenOptions opts;
    opts.probe_rank = 16;
    for (Real k : {2.0 * pi, 4.0 * pi}) {
        const Real lambda = -k * k;
        const EigenResult r = eigs_in_contour(p, Contour(Complex(lambda, 0.0), 2.0), opts);
        Real best = std::numeric_limits<Real>::infinity();
        for (const auto& e : r.eigenpairs) best = std::min(best, std::abs(e.lambda - lambda) / std::abs(lambda));
        EXPECT_LE(best, 1e-6) << "k = " << k;
    }
}
