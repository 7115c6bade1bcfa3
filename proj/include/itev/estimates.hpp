#pragma once

// A priori inequalities for (D2 - lambda rho) v = g and for the resolvent of
// B - lambda I, evaluated with collocation quadrature.
//
// Every inequality is brought to the form   lhs <= K a + K b / (lambda - K)
// and the smallest admissible K is computed per state. K is fitted once at the
// smallest lambda of a sweep (max over states) and then checked at the others.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "itev/contrast.hpp"
#include "itev/errors.hpp"
#include "itev/grid.hpp"
#include "itev/pencil.hpp"
#include "itev/resolvent.hpp"
#include "itev/types.hpp"

namespace itev {

/// Inequality identifiers used in reports and CSV output.
namespace inequality {
// (D2 - lambda rho) v = g
inline constexpr const char* concentration = "concentration";          // ||phi v||^2 <= K/(l-K) (||(1-phi)v||^2 + ||phi g||^2)
inline constexpr const char* total_mass = "total_mass";                // ||v||^2 <= K (||(1-phi)v||^2 + ||phi g||^2/(l-K))
inline constexpr const char* cutoff_gradient = "cutoff_gradient";      // ||(phi v)'||^2 <= K (||v||^2 + ||phi g||^2)
inline constexpr const char* contrast_mass = "contrast_mass";          // ||v||^2 <= K (|int m|v|^2| + ||phi g||^2/(l-K))
inline constexpr const char* contrast_concentration = "contrast_concentration";
                                                                       // |int m phi^2|v|^2| <= K/(l-K) (|int (1-phi^2) m|v|^2| + ||phi g||^2)
// resolvent of B - lambda I
inline constexpr const char* energy_identity = "energy_identity";      // int m|v|^2 = int f conj(v) - int conj(g) u
inline constexpr const char* u_l2 = "u_l2";                            // ||u||^2 <= K/(l-K) (||f||^2 + ||g||^2/l)
inline constexpr const char* v_l2 = "v_l2";                            // ||v||^2 <= K (||f||^2 + ||g||^2/l)
inline constexpr const char* u_gradient = "u_gradient";                // ||u'||^2 <= K (||f||^2 + ||g||^2/l)
inline constexpr const char* u_laplacian = "u_laplacian";              // ||u''|| <= K (||f|| + ||g||/l)
inline constexpr const char* v_laplacian = "v_laplacian";              // ||v''|| <= K (l ||f|| + ||g||)
inline constexpr const char* cutoff_v_gradient = "cutoff_v_gradient";  // ||(phi v)'||^2 <= K (||f||^2 + ||g||^2)
}  // namespace inequality

struct EstimateReport {
    std::string id;
    std::string state;       // label of the state or trial
    Real lambda = 0.0;
    Real lhs = 0.0;
    Real a = 0.0;            // coefficient of K
    Real b = 0.0;            // coefficient of K / (lambda - K)
    Real required_K = 0.0;   // smallest K making this row hold
    std::optional<Real> fitted_K;
    Real rhs_without_K = 0.0;  // a + b / (lambda - fitted_K); satisfied iff lhs <= fitted_K * rhs_without_K
    bool satisfied = false;
};

struct EstimateConfig {
    Real large_lambda = 100.0;  // smallest lambda treated as "sufficiently large"
    Real fit_slack = 1e-9;      // relative round-off allowance when re-checking the fitted row
};

/// Smallest K in [0, lambda) with lhs <= K a + K b / (lambda - K); +inf if none.
inline Real required_K(Real lhs, Real a, Real b, Real lambda) {
    if (!(lhs > 0.0)) return 0.0;
    if (a <= 0.0 && b <= 0.0) return std::numeric_limits<Real>::infinity();
    if (b <= 0.0) return lhs / a;
    if (a <= 0.0) return lhs * lambda / (b + lhs);
    const Real s = a * lambda + b + lhs;
    const Real disc = std::max(0.0, s * s - 4.0 * a * lhs * lambda);
    return 2.0 * lhs * lambda / (s + std::sqrt(disc));
}

inline EstimateReport make_row(const char* id, const std::string& state, Real lambda, Real lhs, Real a, Real b) {
    EstimateReport r;
    r.id = id;
    r.state = state;
    r.lambda = lambda;
    r.lhs = lhs;
    r.a = a;
    r.b = b;
    r.required_K = required_K(lhs, a, b, lambda);
    return r;
}

/// Evaluates a row at a given K.
inline void apply_K(EstimateReport& r, Real K, Real slack = 0.0) {
    r.fitted_K = K;
    if (!(K < r.lambda) && r.b > 0.0) {
        r.rhs_without_K = std::numeric_limits<Real>::infinity();
        r.satisfied = false;
        return;
    }
    r.rhs_without_K = r.a + (r.b > 0.0 ? r.b / (r.lambda - K) : 0.0);
    r.satisfied = r.lhs <= K * r.rhs_without_K * (1.0 + slack) || r.lhs == 0.0;
}

/// Fits K per inequality id as the max required_K over rows at the smallest lambda, then checks all rows.
inline void fit_and_check(std::vector<EstimateReport>& rows, const EstimateConfig& cfg = {}) {
    std::map<std::string, Real> fit_lambda;
    for (const auto& r : rows) {
        auto it = fit_lambda.find(r.id);
        if (it == fit_lambda.end() || r.lambda < it->second) fit_lambda[r.id] = r.lambda;
    }
    std::map<std::string, Real> K;
    for (const auto& r : rows) {
        if (r.lambda != fit_lambda[r.id]) continue;
        K[r.id] = std::max(K[r.id], r.required_K);
    }
    for (auto& r : rows) apply_K(r, K[r.id], cfg.fit_slack);
}

namespace detail {

inline RealVector cutoff_values(const CutoffFunction& phi, const CollocationGrid& grid) {
    return phi.sample(grid.nodes);
}

inline void check_cutoff_range(const RealVector& phi) {
    for (Eigen::Index j = 0; j < phi.size(); ++j) {
        if (!(phi(j) >= 0.0 && phi(j) <= 1.0)) throw PreconditionError("cutoff values must lie in [0, 1]");
    }
}

inline void check_lambda(Real lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw PreconditionError("lambda must be real and positive");
}

}  // namespace detail

/// Concentration inequalities for v with g = (D2 - lambda rho) v; phi given at the nodes.
inline std::vector<EstimateReport> verify_concentration(const ComplexVector& v, const ComplexVector& rho,
                                                        const RealVector& phi, Real lambda,
                                                        const CollocationGrid& grid,
                                                        const std::string& state = "") {
    detail::check_lambda(lambda);
    if (v.size() != grid.size() || rho.size() != grid.size() || phi.size() != grid.size()) {
        throw InputError("state, rho and cutoff need one value per node");
    }
    for (Eigen::Index j = 0; j < rho.size(); ++j) {
        if (!(rho(j).real() > 0.0)) throw PreconditionError("Re(rho) must be positive");
    }
    detail::check_cutoff_range(phi);

    const ComplexVector g = grid.D2.cast<Complex>() * v - lambda * rho.cwiseProduct(v);
    const ComplexVector phi_c = phi.cast<Complex>();
    const ComplexVector phi_v = phi_c.cwiseProduct(v);
    const ComplexVector rest_v = v - phi_v;
    const ComplexVector phi_g = phi_c.cwiseProduct(g);
    const Real n_phi_v = l2_norm_squared(grid, phi_v);
    const Real n_rest_v = l2_norm_squared(grid, rest_v);
    const Real n_phi_g = l2_norm_squared(grid, phi_g);
    const Real n_v = l2_norm_squared(grid, v);
    const Real n_grad = l2_norm_squared(grid, grid.D1.cast<Complex>() * phi_v);

    return {
        make_row(inequality::concentration, state, lambda, n_phi_v, 0.0, n_rest_v + n_phi_g),
        make_row(inequality::total_mass, state, lambda, n_v, n_rest_v, n_phi_g),
        make_row(inequality::cutoff_gradient, state, lambda, n_grad, n_v + n_phi_g, 0.0),
    };
}

inline std::vector<EstimateReport> verify_concentration(const ComplexVector& v, const ComplexVector& rho,
                                                        const CutoffFunction& phi, Real lambda,
                                                        const CollocationGrid& grid,
                                                        const std::string& state = "") {
    return verify_concentration(v, rho, detail::cutoff_values(phi, grid), lambda, grid, state);
}

/// Contrast-weighted inequalities for v with g = (D2 - lambda) v. Requires the
/// boundary coercivity item to hold on the grid nodes inside N.
inline std::vector<EstimateReport> verify_corollary(const ComplexVector& v, const ComplexVector& m_on_grid,
                                                    const CutoffFunction& phi, Real lambda,
                                                    const CoercivityParams& params, const CollocationGrid& grid,
                                                    const std::string& state = "") {
    detail::check_lambda(lambda);
    params.validate();
    if (v.size() != grid.size() || m_on_grid.size() != grid.size()) {
        throw InputError("state and contrast need one value per node");
    }
    std::vector<Complex> near, all;
    for (Eigen::Index j = 0; j < grid.size(); ++j) {
        all.push_back(m_on_grid(j));
        if (grid.domain.in_neighborhood(grid.nodes(j))) near.push_back(m_on_grid(j));
    }
    if (near.empty()) throw ConfigError("no collocation node lies inside the boundary neighborhood");
    if (detail::check_item1(near, all, params.m_star).branch == Item1Branch::none) {
        throw PreconditionError("contrast fails the boundary coercivity hypothesis");
    }

    const RealVector phi_n = detail::cutoff_values(phi, grid);
    const ComplexVector g = grid.D2.cast<Complex>() * v - lambda * v;
    const ComplexVector phi_g = phi_n.cast<Complex>().cwiseProduct(g);
    const RealVector v2 = v.cwiseAbs2();
    const RealVector phi2 = phi_n.cwiseAbs2();
    const ComplexVector m_v2 = m_on_grid.cwiseProduct(v2.cast<Complex>());
    const Real n_v = l2_norm_squared(grid, v);
    const Real n_phi_g = l2_norm_squared(grid, phi_g);
    const Real m_mass = std::abs(integrate(grid, m_v2));
    const Real m_inner = std::abs(integrate(grid, ComplexVector(phi2.cast<Complex>().cwiseProduct(m_v2))));
    const Real m_outer = std::abs(integrate(
        grid, ComplexVector((RealVector::Ones(grid.size()) - phi2).cast<Complex>().cwiseProduct(m_v2))));

    return {
        make_row(inequality::contrast_mass, state, lambda, n_v, m_mass, n_phi_g),
        make_row(inequality::contrast_concentration, state, lambda, m_inner, 0.0, m_outer + n_phi_g),
    };
}

/// |int m|v|^2 - int f conj(v) + int conj(g) u| for the solution of (B - lambda I)(u, v) = (f, g).
inline Real verify_energy_identity(const PencilBlocks& pencil, Real lambda, const ComplexVector& f,
                               const ComplexVector& g) {
    const PencilBlocks p = pencil.with_weighting(Weighting::identity);
    const CollocationGrid& grid = p.grid;
    const StatePair s = solve(factorize(p, lambda), f, g);
    const Complex mass = integrate(grid, ComplexVector(p.contrast_on_grid.cwiseProduct(s.v.cwiseAbs2().cast<Complex>())));
    const Complex fv = integrate(grid, ComplexVector(f.cwiseProduct(s.v.conjugate())));
    const Complex gu = integrate(grid, ComplexVector(g.conjugate().cwiseProduct(s.u)));
    return std::abs(mass - fv + gu);
}

/// Smooth random data sum_{k<6} c_k cos(k pi (x - a)/L) / (1 + k) with complex Gaussian c_k.
inline ComplexVector random_smooth(const CollocationGrid& grid, std::mt19937_64& rng) {
    std::normal_distribution<Real> normal(0.0, 1.0);
    ComplexVector out = ComplexVector::Zero(grid.size());
    for (int k = 0; k < 6; ++k) {
        const Real re = normal(rng);
        const Real im = normal(rng);
        const Complex c(re, im);
        for (Eigen::Index j = 0; j < grid.size(); ++j) {
            const Real s = (grid.nodes(j) - grid.domain.a) / grid.domain.length();
            out(j) += c * std::cos(k * pi * s) / (1.0 + k);
        }
    }
    return out;
}

enum class DataMode { both, f_only, g_only };

inline const char* to_string(DataMode mode) {
    switch (mode) {
        case DataMode::both: return "both";
        case DataMode::f_only: return "g=0";
        case DataMode::g_only: return "f=0";
    }
    return "unknown";
}

/// Resolvent inequality rows for one solved state.
inline std::vector<EstimateReport> resolvent_rows(const CollocationGrid& grid, const RealVector& phi, Real lambda,
                                                  const ComplexVector& f, const ComplexVector& g,
                                                  const StatePair& s, const std::string& state) {
    const ComplexMatrix D1 = grid.D1.cast<Complex>();
    const ComplexMatrix D2 = grid.D2.cast<Complex>();
    const Real nf2 = l2_norm_squared(grid, f), ng2 = l2_norm_squared(grid, g);
    const Real nf = std::sqrt(nf2), ng = std::sqrt(ng2);
    const Real data = nf2 + ng2 / lambda;
    const ComplexVector phi_v = phi.cast<Complex>().cwiseProduct(s.v);
    return {
        make_row(inequality::u_l2, state, lambda, l2_norm_squared(grid, s.u), 0.0, data),
        make_row(inequality::v_l2, state, lambda, l2_norm_squared(grid, s.v), data, 0.0),
        make_row(inequality::u_gradient, state, lambda, l2_norm_squared(grid, D1 * s.u), data, 0.0),
        make_row(inequality::u_laplacian, state, lambda, l2_norm(grid, D2 * s.u), nf + ng / lambda, 0.0),
        make_row(inequality::v_laplacian, state, lambda, l2_norm(grid, D2 * s.v), lambda * nf + ng, 0.0),
        make_row(inequality::cutoff_v_gradient, state, lambda, l2_norm_squared(grid, D1 * phi_v), nf2 + ng2, 0.0),
    };
}

struct SlopeReport {
    std::string id;
    DataMode mode = DataMode::both;
    Real slope = 0.0;  // least-squares slope of log(max_trials lhs / data) against log(lambda)
};

struct ResolventEstimateResult {
    std::vector<EstimateReport> rows;
    std::vector<SlopeReport> slopes;
    std::vector<std::string> warnings;
};

/// Least-squares slope of log y against log x.
inline Real loglog_slope(const std::vector<Real>& x, const std::vector<Real>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw InputError("slope needs at least two matching samples");
    Real mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    Real sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    return sxy / sxx;
}

/// Seeded random trials through the unweighted resolvent; K fitted per (id, mode) at the
/// smallest lambda of the sweep. Sweep values below the large-lambda gate are skipped.
inline ResolventEstimateResult verify_resolvent_estimates(const PencilBlocks& pencil,
                                                          const std::vector<Real>& lambda_sweep, int trials,
                                                          std::uint64_t seed = 0,
                                                          const std::vector<DataMode>& modes = {DataMode::both,
                                                                                                DataMode::f_only,
                                                                                                DataMode::g_only},
                                                          const EstimateConfig& cfg = {}) {
    if (trials < 1) throw ConfigError("trials must be positive");
    ResolventEstimateResult out;
    std::vector<Real> sweep;
    for (Real l : lambda_sweep) {
        if (l < cfg.large_lambda) {
            out.warnings.push_back("lambda = " + std::to_string(l) + " is below the large-lambda gate; skipped");
        } else {
            sweep.push_back(l);
        }
    }
    std::sort(sweep.begin(), sweep.end());
    if (sweep.empty()) return out;

    const PencilBlocks p = pencil.with_weighting(Weighting::identity);
    const CollocationGrid& grid = p.grid;
    const RealVector phi = make_cutoff(grid.domain).sample(grid.nodes);

    std::mt19937_64 rng(seed);
    struct Trial {
        ComplexVector f, g;
    };
    std::vector<Trial> data;
    for (int t = 0; t < trials; ++t) {
        ComplexVector f = random_smooth(grid, rng);
        ComplexVector g = random_smooth(grid, rng);
        data.push_back({f, g});
    }

    for (DataMode mode : modes) {
        std::vector<EstimateReport> rows;
        for (Real lambda : sweep) {
            const PencilFactorization fac = factorize(p, lambda);
            for (int t = 0; t < trials; ++t) {
                ComplexVector f = data[t].f, g = data[t].g;
                if (mode == DataMode::f_only) g.setZero();
                if (mode == DataMode::g_only) f.setZero();
                const StatePair s = solve(fac, f, g);
                auto r = resolvent_rows(grid, phi, lambda, f, g, s,
                                        std::string(to_string(mode)) + "#" + std::to_string(t));
                rows.insert(rows.end(), r.begin(), r.end());
            }
        }
        fit_and_check(rows, cfg);

        std::map<std::string, std::map<Real, Real>> worst;  // id -> lambda -> max lhs / data
        for (const auto& r : rows) {
            const Real scale = r.a + r.b;
            if (scale > 0.0) worst[r.id][r.lambda] = std::max(worst[r.id][r.lambda], r.lhs / scale);
        }
        for (const auto& [id, by_lambda] : worst) {
            std::vector<Real> xs, ys;
            for (const auto& [l, y] : by_lambda) {
                if (y > 0.0) {
                    xs.push_back(l);
                    ys.push_back(y);
                }
            }
            if (xs.size() >= 2) out.slopes.push_back({id, mode, loglog_slope(xs, ys)});
        }
        out.rows.insert(out.rows.end(), rows.begin(), rows.end());
    }
    return out;
}

/// Real symmetric forms v^T X v for lhs, a and b of one inequality, in nodal coordinates.
struct QuadraticForms {
    RealMatrix lhs;
    RealMatrix a;
    RealMatrix b;
};

namespace detail {

/// Largest eigenvalue of the pencil (L, C) on the numerically definite part of C.
inline Real top_ratio(const RealMatrix& L, const RealMatrix& C, RealVector* state) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> ec(C);
    const RealVector& ev = ec.eigenvalues();
    const Real cut = 1e-13 * ev.cwiseAbs().maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev(i) > cut) keep.push_back(i);
    RealMatrix S(C.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
        S.col(static_cast<Eigen::Index>(j)) = ec.eigenvectors().col(keep[j]) / std::sqrt(ev(keep[j]));
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> et(RealMatrix(S.transpose() * L * S));
    const Eigen::Index top = et.eigenvalues().size() - 1;
    if (state) *state = S * et.eigenvectors().col(top);
    return et.eigenvalues()(top);
}

}  // namespace detail

/// Smallest K with lhs <= K a + K b / (lambda - K) for every v, and the state attaining it.
inline Real worst_case_K(const QuadraticForms& forms, Real lambda, RealVector* state = nullptr) {
    const bool has_a = forms.a.cwiseAbs().maxCoeff() > 0.0;
    const bool has_b = forms.b.cwiseAbs().maxCoeff() > 0.0;
    if (!has_b) return detail::top_ratio(forms.lhs, forms.a, state);
    if (!has_a) {
        const Real q = detail::top_ratio(forms.lhs, forms.b, state);
        return lambda * q / (1.0 + q);
    }
    auto excess = [&](Real K, RealVector* s) {
        return detail::top_ratio(forms.lhs, K * forms.a + (K / (lambda - K)) * forms.b, s);
    };
    Real lo = 0.0, hi = lambda;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
        const Real mid = 0.5 * (lo + hi);
        if (excess(mid, nullptr) > 1.0) lo = mid; else hi = mid;
    }
    if (state) excess(lo, state);
    return hi;
}

/// Forms of the concentration, total-mass and cutoff-gradient inequalities (real rho).
inline std::map<std::string, QuadraticForms> concentration_forms(const RealVector& rho, const RealVector& phi,
                                                                 Real lambda, const CollocationGrid& grid) {
    const Eigen::Index n1 = grid.size();
    const RealMatrix W = grid.quadrature_weights.asDiagonal();
    const RealMatrix P = phi.asDiagonal();
    const RealMatrix Q = (RealVector::Ones(n1) - phi).asDiagonal();
    const RealMatrix L = grid.D2 - lambda * RealMatrix(rho.asDiagonal());
    const RealMatrix G = L.transpose() * P * W * P * L;
    const RealMatrix DP = grid.D1 * P;
    const RealMatrix Z = RealMatrix::Zero(n1, n1);
    return {
        {inequality::concentration, {P * W * P, Z, Q * W * Q + G}},
        {inequality::total_mass, {W, Q * W * Q, G}},
        {inequality::cutoff_gradient, {DP.transpose() * W * DP, W + G, Z}},
    };
}

/// Forms of the contrast-weighted inequalities; m must be real and of one sign on the grid.
inline std::map<std::string, QuadraticForms> corollary_forms(const ComplexVector& m_on_grid, const RealVector& phi,
                                                             Real lambda, const CollocationGrid& grid) {
    const Eigen::Index n1 = grid.size();
    const Real sign = m_on_grid(0).real() >= 0.0 ? 1.0 : -1.0;
    for (Eigen::Index j = 0; j < n1; ++j) {
        if (m_on_grid(j).imag() != 0.0 || sign * m_on_grid(j).real() < 0.0) {
            throw PreconditionError("worst-case states need a real contrast of one sign");
        }
    }
    const RealVector am = m_on_grid.real().cwiseAbs();
    const RealMatrix W = grid.quadrature_weights.asDiagonal();
    const RealMatrix WM = (grid.quadrature_weights.cwiseProduct(am)).asDiagonal();
    const RealVector phi2 = phi.cwiseAbs2();
    const RealMatrix P = phi.asDiagonal();
    const RealMatrix L = grid.D2 - lambda * RealMatrix::Identity(n1, n1);
    const RealMatrix G = L.transpose() * P * W * P * L;
    const RealMatrix Z = RealMatrix::Zero(n1, n1);
    return {
        {inequality::contrast_mass, {W, WM, G}},
        {inequality::contrast_concentration,
         {RealMatrix(phi2.asDiagonal()) * WM, Z, RealMatrix((RealVector::Ones(n1) - phi2).asDiagonal()) * WM + G}},
    };
}

struct SuiteState {
    std::string name;
    ComplexVector v;
};

struct ConcentrationSuiteResult {
    std::vector<EstimateReport> rows;
    std::vector<std::string> warnings;
};

/// Concentration (rho = 1) and contrast-weighted rows for every state and lambda, with K fitted at
/// the smallest lambda. With worst_case set, the discrete extremal state of each inequality at
/// each lambda joins the suite, so the fitted K is the worst case over all grid functions.
inline ConcentrationSuiteResult concentration_suite(const CollocationGrid& grid, const CutoffFunction& phi,
                                                    const ComplexVector& m_on_grid, const CoercivityParams& params,
                                                    std::vector<SuiteState> states, std::vector<Real> sweep,
                                                    bool worst_case = true, const EstimateConfig& cfg = {}) {
    ConcentrationSuiteResult out;
    std::vector<Real> kept;
    for (Real l : sweep) {
        if (l < cfg.large_lambda) {
            out.warnings.push_back("lambda = " + std::to_string(l) + " is below the large-lambda gate; skipped");
        } else {
            kept.push_back(l);
        }
    }
    std::sort(kept.begin(), kept.end());
    const RealVector phi_n = phi.sample(grid.nodes);
    const RealVector ones = RealVector::Ones(grid.size());
    if (worst_case) {
        bool corollary_ok = true;
        for (Real lambda : kept) {
            auto forms = concentration_forms(ones, phi_n, lambda, grid);
            try {
                auto cf = corollary_forms(m_on_grid, phi_n, lambda, grid);
                forms.insert(cf.begin(), cf.end());
            } catch (const PreconditionError&) {
                corollary_ok = false;
            }
            for (const auto& [id, f] : forms) {
                RealVector s;
                worst_case_K(f, lambda, &s);
                states.push_back({"worst:" + id + "@" + std::to_string(static_cast<long long>(lambda)),
                                  s.cast<Complex>() / std::sqrt(l2_norm_squared(grid, s.cast<Complex>()))});
            }
        }
        if (!corollary_ok) out.warnings.push_back("complex or sign-changing contrast: no worst-case corollary states");
    }
    const ComplexVector rho = ComplexVector::Ones(grid.size());
    for (const auto& st : states) {
        for (Real lambda : kept) {
            auto r = verify_concentration(st.v, rho, phi_n, lambda, grid, st.name);
            out.rows.insert(out.rows.end(), r.begin(), r.end());
            auto c = verify_corollary(st.v, m_on_grid, phi, lambda, params, grid, st.name);
            out.rows.insert(out.rows.end(), c.begin(), c.end());
        }
    }
    fit_and_check(out.rows, cfg);
    return out;
}

struct BoundaryRatio {
    Complex z{0.0};
    Complex numerator{0.0};    // int phi^2 m |v|^2
    Complex denominator{0.0};  // int (1 - phi^2) m |v|^2
};

inline BoundaryRatio compute_boundary_ratio(const ComplexVector& v, const ComplexVector& m_on_grid,
                                            const CutoffFunction& phi, const CollocationGrid& grid) {
    if (v.size() != grid.size() || m_on_grid.size() != grid.size()) {
        throw InputError("state and contrast need one value per node");
    }
    const RealVector phi2 = phi.sample(grid.nodes).cwiseAbs2();
    const ComplexVector m_v2 = m_on_grid.cwiseProduct(v.cwiseAbs2().cast<Complex>());
    BoundaryRatio br;
    br.numerator = integrate(grid, ComplexVector(phi2.cast<Complex>().cwiseProduct(m_v2)));
    br.denominator =
        integrate(grid, ComplexVector((RealVector::Ones(grid.size()) - phi2).cast<Complex>().cwiseProduct(m_v2)));
    const Real scale = integrate(grid, RealVector(m_on_grid.cwiseAbs().cwiseProduct(v.cwiseAbs2())));
    if (!(std::abs(br.denominator) > 1e-14 * std::max(scale, 1e-300))) {
        throw DegenerateStateError("v carries no mass where the cutoff is below one");
    }
    br.z = br.numerator / br.denominator;
    return br;
}

}  // namespace itev
