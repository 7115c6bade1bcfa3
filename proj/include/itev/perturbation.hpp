#pragma once

// Continuity of spectral projections in the contrast: the resolvent bound Gamma
// along a contour, projector differences, and eigenvalue trajectories.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "itev/contrast.hpp"
#include "itev/errors.hpp"
#include "itev/grid.hpp"
#include "itev/pencil.hpp"
#include "itev/resolvent.hpp"
#include "itev/spectral.hpp"
#include "itev/types.hpp"

namespace itev {

/// Matrix of a data-to-state map in the coordinates of L2 (+) L2 -> H2_0 (+) L2:
/// rows are [W^{1/2} u; W^{1/2} D2 u; W^{1/2} v], columns scaled by W_in^{-1/2}.
inline ComplexMatrix triple_norm_coordinates(const CollocationGrid& grid, const ComplexMatrix& X) {
    const Eigen::Index size = grid.size();
    if (X.rows() != 2 * size || X.cols() != 2 * (grid.n - 1)) {
        throw InternalError("map does not send interior data to nodal states");
    }
    const RealVector sw = grid.quadrature_weights.cwiseSqrt();
    RealVector sw_in(2 * (grid.n - 1));
    sw_in << sw.segment(1, grid.n - 1), sw.segment(1, grid.n - 1);
    const ComplexMatrix U = X.topRows(size);
    const ComplexMatrix V = X.bottomRows(size);
    ComplexMatrix out(3 * size, X.cols());
    out.topRows(size) = sw.asDiagonal() * U;
    out.middleRows(size, size) = sw.asDiagonal() * (grid.D2.cast<Complex>() * U);
    out.bottomRows(size) = sw.asDiagonal() * V;
    return out * sw_in.cwiseInverse().asDiagonal();
}

/// |||X|||: operator norm from L2 (+) L2 data into H2_0 (+) L2 states.
inline Real triple_norm(const CollocationGrid& grid, const ComplexMatrix& X) {
    return spectral_norm(triple_norm_coordinates(grid, X));
}

/// Right factor mapping data to the pencil's row space: E for B - zI, E diag(1+m, 1) for the
/// weighted operator, whose resolvent is (B - z I_m)^{-1} I_m.
inline ComplexMatrix data_operator(const PencilBlocks& pencil) {
    return pencil.data_embedding() * pencil.data_weight().asDiagonal();
}

struct GammaEstimate {
    Real gamma_value = 0.0;
    Contour contour;
    bool weighted = false;
    int n_quad = 0;
    Complex argmax{0.0};
    const char* norm_convention = "L2+L2 -> H2_0+L2";
};

struct GammaOptions {
    Real saturation_tol = 1e-4;  // relative change of Gamma under node doubling
    int max_quad = 512;
    Real condition_cap = default_condition_cap;
};

/// sup over the contour nodes of |||(zM - A)^{-1} E D|||, doubling the nodes until the
/// sampled maximum settles.
inline GammaEstimate gamma_on_contour(const PencilBlocks& pencil, const Contour& contour, bool weighted,
                                      const GammaOptions& opts = {}) {
    contour.validate();
    const PencilBlocks p = pencil.with_weighting(weighted ? Weighting::contrast : Weighting::identity);
    const ComplexMatrix B = data_operator(p);
    GammaEstimate est;
    est.contour = contour;
    est.weighted = weighted;

    auto visit = [&](int count, int offset, int stride) {
        for (int j = offset; j < count; j += stride) {
            const Complex z = contour.node(j, count);
            try {
                const LuFactorization<Complex> lu(ComplexMatrix(z * p.M - p.A), opts.condition_cap);
                const Real g = triple_norm(p.grid, lu.solve(B));
                if (g > est.gamma_value) {
                    est.gamma_value = g;
                    est.argmax = z;
                }
            } catch (const NearSingularError&) {
                throw ContourGrazeError("contour grazes the spectrum; adjust the radius", contour.radius * 1.1);
            }
        }
    };
    int count = contour.n_quad;
    visit(count, 0, 1);
    while (2 * count <= opts.max_quad) {
        const Real before = est.gamma_value;
        visit(2 * count, 1, 2);
        count *= 2;
        if (est.gamma_value - before <= opts.saturation_tol * est.gamma_value) break;
    }
    est.n_quad = count;
    return est;
}

/// (1/2 pi i) * contour integral of (zM - A)^{-1} E D dz, the projector acting on data.
inline ComplexMatrix data_projector(const PencilBlocks& pencil, const Contour& contour, int n_quad,
                                    Real condition_cap = default_condition_cap) {
    const ComplexMatrix B = data_operator(pencil);
    ComplexMatrix s0 = ComplexMatrix::Zero(B.rows(), B.cols());
    ComplexMatrix unused;
    detail::accumulate_nodes(pencil, contour, B, n_quad, 0, 1, false, condition_cap, s0, unused);
    return s0 / static_cast<Real>(n_quad);
}

struct ContinuityReport {
    Real perturbation_size = 0.0;   // max over nodes of |p - m|
    Real effective_size = 0.0;      // perturbation_size, divided by delta^2 when weighted
    Real delta = 1.0;
    Real gamma = 0.0;
    Real measured_delta_P = 0.0;
    Real bound = std::numeric_limits<Real>::quiet_NaN();
    bool applicable = true;         // effective_size * gamma < 1
    bool satisfied = false;
    int rank_before = 0;
    int rank_after = 0;
    int n_quad = 0;
    bool weighted = false;
};

struct ContinuityOptions {
    bool weighted = false;
    bool allow_inapplicable = false;  // run the experiment even when the smallness condition fails
    std::optional<Real> delta;        // lower bound of Re(1+m); sampled from both contrasts if unset
    GammaOptions gamma;
    QuadratureOptions quadrature;
    RankOptions rank;
};

/// Bound |gamma| * eps * Gamma^2 / (1 - eps * Gamma).
inline Real continuity_bound(Real contour_length, Real eps, Real gamma) {
    return contour_length * eps * gamma * gamma / (1.0 - eps * gamma);
}

inline ContinuityReport projector_continuity(const PencilBlocks& pencil_m, const PencilBlocks& pencil_p,
                                             const Contour& contour, const ContinuityOptions& opts = {}) {
    const CollocationGrid& grid = pencil_m.grid;
    if (grid.n != pencil_p.grid.n || grid.domain.a != pencil_p.grid.domain.a ||
        grid.domain.b != pencil_p.grid.domain.b) {
        throw PreconditionError("both pencils must live on the same grid");
    }
    const Weighting w = opts.weighted ? Weighting::contrast : Weighting::identity;
    const PencilBlocks pm = pencil_m.with_weighting(w);
    const PencilBlocks pp = pencil_p.with_weighting(w);

    ContinuityReport rep;
    rep.weighted = opts.weighted;
    rep.perturbation_size = (pm.contrast_on_grid - pp.contrast_on_grid).cwiseAbs().maxCoeff();
    if (opts.weighted) {
        Real delta = std::numeric_limits<Real>::infinity();
        for (Eigen::Index j = 0; j < grid.size(); ++j) {
            delta = std::min({delta, 1.0 + pm.contrast_on_grid(j).real(), 1.0 + pp.contrast_on_grid(j).real()});
        }
        rep.delta = opts.delta.value_or(delta);
        if (!(rep.delta > 0.0)) throw PreconditionError("Re(1 + m) must be bounded below by a positive delta");
        rep.effective_size = rep.perturbation_size / (rep.delta * rep.delta);
    } else {
        rep.effective_size = rep.perturbation_size;
    }

    const GammaEstimate gamma = gamma_on_contour(pm, contour, opts.weighted, opts.gamma);
    rep.gamma = gamma.gamma_value;
    rep.applicable = rep.effective_size * rep.gamma < 1.0;
    if (!rep.applicable && !opts.allow_inapplicable) {
        throw BoundNotApplicableError("perturbation too large for the bound: ||p - m|| * Gamma >= 1");
    }
    if (rep.applicable) rep.bound = continuity_bound(contour.length(), rep.effective_size, rep.gamma);

    rep.rank_before = spectral_projector(pm, contour, opts.quadrature, opts.rank).rank;
    rep.rank_after = spectral_projector(pp, contour, opts.quadrature, opts.rank).rank;

    // Same node count for both projectors, taken from the converged base projector.
    const ContourMoments base = contour_moments(pm, contour, data_operator(pm), false, opts.quadrature);
    rep.n_quad = base.n_quad;
    const ComplexMatrix Pp = data_projector(pp, contour, base.n_quad, opts.quadrature.condition_cap);
    rep.measured_delta_P = rep.perturbation_size == 0.0 ? 0.0 : triple_norm(grid, Pp - base.zeroth);
    if (rep.perturbation_size == 0.0) rep.bound = 0.0;
    rep.satisfied = rep.applicable && rep.measured_delta_P <= rep.bound;
    return rep;
}

/// Contrast family t -> m_t on [0, 1].
using ContrastFamily = std::function<Contrast(Real)>;

/// Constant index n(t) = n0 + slope * t.
inline ContrastFamily index_linear_family(Real n0, Real slope) {
    return [=](Real t) { return Contrast::from_index(n0 + slope * t); };
}

/// (1 - t) m0 + t m1; exact for polynomials, otherwise sampled on a fine uniform grid.
inline ContrastFamily blend_family(const Contrast& m0, const Contrast& m1, const Domain1D& domain,
                                   int samples = 4096) {
    return [=](Real t) {
        const auto* p0 = std::get_if<Polynomial>(&m0.data());
        const auto* p1 = std::get_if<Polynomial>(&m1.data());
        if (p0 && p1) {
            std::vector<Complex> c(std::max(p0->coefficients.size(), p1->coefficients.size()), Complex{0.0});
            for (std::size_t j = 0; j < p0->coefficients.size(); ++j) c[j] += (1.0 - t) * p0->coefficients[j];
            for (std::size_t j = 0; j < p1->coefficients.size(); ++j) c[j] += t * p1->coefficients[j];
            return Contrast(Polynomial{c});
        }
        Sampled s;
        for (int j = 0; j <= samples; ++j) {
            const Real x = domain.a + domain.length() * j / samples;
            s.nodes.push_back(x);
            s.values.push_back((1.0 - t) * m0(x) + t * m1(x));
        }
        return Contrast(s);
    };
}

struct TrajectoryPoint {
    int step = 0;
    Real t = 0.0;
    int track = -1;          // continuous branch id, matched by nearest distance
    Complex eigenvalue{0.0};
    Real residual = 0.0;
    int multiplicity = 0;
};

struct TrajectoryStep {
    int step = 0;
    Real t = 0.0;
    int rank = 0;
    bool rank_changed = false;
    bool grazed = false;       // contour hit the spectrum; no eigenvalues recorded
    bool hypotheses_pass = true;
    std::vector<TrajectoryPoint> points;
};

struct Trajectory {
    std::vector<TrajectoryStep> steps;

    /// Largest distance between matched eigenvalues of consecutive recorded steps.
    Real max_jump() const {
        Real worst = 0.0;
        const TrajectoryStep* prev = nullptr;
        for (const auto& s : steps) {
            if (s.grazed) continue;
            if (prev) {
                for (const auto& p : s.points)
                    for (const auto& q : prev->points)
                        if (p.track == q.track) worst = std::max(worst, std::abs(p.eigenvalue - q.eigenvalue));
            }
            prev = &s;
        }
        return worst;
    }
};

struct TrackingOptions {
    EigenOptions eigen;
    CoercivityParams params;
    bool weighted = true;
};

/// Eigenvalues inside the contour at t = s / steps, s = 0..steps.
inline Trajectory eigenvalue_tracking(const ContrastFamily& family, int steps, const Contour& contour,
                                      const CollocationGrid& grid, const TrackingOptions& opts = {}) {
    if (steps < 1) throw ConfigError("tracking needs at least one step");
    Trajectory traj;
    std::vector<TrajectoryPoint> previous;
    std::optional<int> previous_rank;
    int next_track = 0;
    for (int s = 0; s <= steps; ++s) {
        const Real t = static_cast<Real>(s) / steps;
        const Contrast m = family(t);
        TrajectoryStep step;
        step.step = s;
        step.t = t;
        step.hypotheses_pass = check_hypotheses(m, grid.domain, opts.params).passes_all();
        const PencilBlocks pencil =
            build_pencil(grid, m, opts.weighted ? Weighting::contrast : Weighting::identity);
        try {
            const EigenResult res = eigs_in_contour(pencil, contour, opts.eigen);
            step.rank = res.multiplicity_total;
            for (const auto& e : res.eigenpairs) {
                TrajectoryPoint pt;
                pt.step = s;
                pt.t = t;
                pt.eigenvalue = e.lambda;
                pt.multiplicity = e.algebraic_multiplicity;
                pt.residual = e.residuals.empty() ? std::numeric_limits<Real>::infinity()
                                                  : *std::max_element(e.residuals.begin(), e.residuals.end());
                step.points.push_back(pt);
            }
        } catch (const ContourGrazeError&) {
            step.grazed = true;
        }
        if (!step.grazed) {
            // Greedy nearest-distance matching, closest pairs first.
            std::vector<bool> used(previous.size(), false);
            std::vector<std::tuple<Real, std::size_t, std::size_t>> pairs;
            for (std::size_t i = 0; i < step.points.size(); ++i)
                for (std::size_t j = 0; j < previous.size(); ++j)
                    pairs.emplace_back(std::abs(step.points[i].eigenvalue - previous[j].eigenvalue), i, j);
            std::sort(pairs.begin(), pairs.end());
            for (const auto& [dist, i, j] : pairs) {
                if (step.points[i].track >= 0 || used[j]) continue;
                step.points[i].track = previous[j].track;
                used[j] = true;
            }
            for (auto& p : step.points)
                if (p.track < 0) p.track = next_track++;
            step.rank_changed = previous_rank.has_value() && *previous_rank != step.rank;
            previous_rank = step.rank;
            previous = step.points;
        }
        traj.steps.push_back(std::move(step));
    }
    return traj;
}

}  // namespace itev
