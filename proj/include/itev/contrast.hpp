#pragma once

// Domain, contrast m(x), cutoff phi(x) and the coercivity hypotheses on m.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "itev/errors.hpp"
#include "itev/types.hpp"

namespace itev {

/// Interval D = (a, b) together with the width of the boundary neighborhood N.
struct Domain1D {
    Real a = 0.0;
    Real b = 1.0;
    Real neighborhood_width = 0.1;

    Domain1D() = default;
    Domain1D(Real left, Real right, Real width) : a(left), b(right), neighborhood_width(width) {
        validate();
    }

    Real length() const noexcept { return b - a; }

    /// Distance from x to the nearer endpoint.
    Real boundary_distance(Real x) const noexcept { return std::min(x - a, b - x); }

    bool in_neighborhood(Real x) const noexcept {
        return boundary_distance(x) <= neighborhood_width;
    }

    void validate() const {
        if (!(std::isfinite(a) && std::isfinite(b)) || !(a < b)) {
            throw ConfigError("domain requires finite endpoints with a < b");
        }
        if (!(neighborhood_width > 0.0) || !(neighborhood_width < 0.5 * (b - a))) {
            throw ConfigError("neighborhood_width must lie in (0, (b-a)/2)");
        }
    }
};

/// Constant pieces; piece j covers (breakpoints[j-1], breakpoints[j]].
struct PiecewiseConstant {
    std::vector<Real> breakpoints;  // strictly increasing, interior to the domain
    std::vector<Complex> values;    // breakpoints.size() + 1 entries
};

/// m(x) = sum_j coefficients[j] * x^j.
struct Polynomial {
    std::vector<Complex> coefficients;
};

/// Linear interpolation between (node, value) samples; nodes strictly increasing.
struct Sampled {
    std::vector<Real> nodes;
    std::vector<Complex> values;
};

enum class ContrastKind { piecewise_constant, polynomial, sampled };

inline const char* to_string(ContrastKind kind) {
    switch (kind) {
        case ContrastKind::piecewise_constant: return "piecewise";
        case ContrastKind::polynomial: return "polynomial";
        case ContrastKind::sampled: return "sampled";
    }
    return "unknown";
}

/// Complex contrast m(x) = n(x)^2 - 1.
class Contrast {
public:
    using Data = std::variant<PiecewiseConstant, Polynomial, Sampled>;

    Contrast() : data_(Polynomial{{Complex{0.0}}}) {}
    explicit Contrast(Data data) : data_(std::move(data)) { validate_shape(); }

    static Contrast constant(Complex value) { return Contrast(Polynomial{{value}}); }

    /// Contrast of a constant refractive index n: m = n^2 - 1.
    static Contrast from_index(Real index) { return constant(Complex{index * index - 1.0, 0.0}); }

    ContrastKind kind() const noexcept {
        return static_cast<ContrastKind>(data_.index());
    }
    const Data& data() const noexcept { return data_; }

    Complex operator()(Real x) const {
        return std::visit([x](const auto& d) { return evaluate(d, x); }, data_);
    }

    /// Throws InputError unless m is defined and finite on [a, b].
    void check_evaluable(const Domain1D& domain) const {
        if (const auto* pw = std::get_if<PiecewiseConstant>(&data_)) {
            for (Real t : pw->breakpoints) {
                if (!(t > domain.a && t < domain.b)) {
                    throw InputError("piecewise breakpoints must lie strictly inside (a, b)");
                }
            }
        }
        if (const auto* s = std::get_if<Sampled>(&data_)) {
            if (s->nodes.front() > domain.a || s->nodes.back() < domain.b) {
                throw InputError("sampled contrast does not cover the domain");
            }
        }
        for (Real x : {domain.a, 0.5 * (domain.a + domain.b), domain.b}) {
            const Complex value = (*this)(x);
            if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
                throw InputError("contrast is not finite on the domain");
            }
        }
    }

    /// Constant value if m does not depend on x.
    std::optional<Complex> constant_value() const {
        if (const auto* p = std::get_if<Polynomial>(&data_)) {
            for (std::size_t j = 1; j < p->coefficients.size(); ++j) {
                if (p->coefficients[j] != Complex{0.0}) return std::nullopt;
            }
            return p->coefficients.empty() ? Complex{0.0} : p->coefficients.front();
        }
        const std::vector<Complex>& values = std::holds_alternative<PiecewiseConstant>(data_)
                                                 ? std::get<PiecewiseConstant>(data_).values
                                                 : std::get<Sampled>(data_).values;
        for (const Complex& v : values) {
            if (v != values.front()) return std::nullopt;
        }
        return values.front();
    }

private:
    static Complex evaluate(const PiecewiseConstant& d, Real x) {
        // Left-continuous: a point on a breakpoint belongs to the piece on its left.
        const auto it = std::lower_bound(d.breakpoints.begin(), d.breakpoints.end(), x);
        return d.values[static_cast<std::size_t>(it - d.breakpoints.begin())];
    }

    static Complex evaluate(const Polynomial& d, Real x) {
        Complex acc{0.0};
        for (auto it = d.coefficients.rbegin(); it != d.coefficients.rend(); ++it) acc = acc * x + *it;
        return acc;
    }

    static Complex evaluate(const Sampled& d, Real x) {
        if (x < d.nodes.front() || x > d.nodes.back()) {
            return Complex{std::numeric_limits<Real>::quiet_NaN(), 0.0};
        }
        auto it = std::upper_bound(d.nodes.begin(), d.nodes.end(), x);
        if (it == d.nodes.end()) return d.values.back();
        const auto hi = static_cast<std::size_t>(it - d.nodes.begin());
        const std::size_t lo = hi - 1;
        const Real s = (x - d.nodes[lo]) / (d.nodes[hi] - d.nodes[lo]);
        return (1.0 - s) * d.values[lo] + s * d.values[hi];
    }

    void validate_shape() const {
        if (const auto* pw = std::get_if<PiecewiseConstant>(&data_)) {
            if (pw->values.size() != pw->breakpoints.size() + 1) {
                throw InputError("piecewise contrast needs one more value than breakpoints");
            }
            if (!std::is_sorted(pw->breakpoints.begin(), pw->breakpoints.end()) ||
                std::adjacent_find(pw->breakpoints.begin(), pw->breakpoints.end()) != pw->breakpoints.end()) {
                throw InputError("piecewise breakpoints must be strictly increasing");
            }
        } else if (const auto* p = std::get_if<Polynomial>(&data_)) {
            if (p->coefficients.empty()) throw InputError("polynomial contrast needs coefficients");
        } else {
            const auto& s = std::get<Sampled>(data_);
            if (s.nodes.size() < 2 || s.nodes.size() != s.values.size()) {
                throw InputError("sampled contrast needs at least two (node, value) pairs");
            }
            for (std::size_t j = 1; j < s.nodes.size(); ++j) {
                if (!(s.nodes[j] > s.nodes[j - 1])) throw InputError("sample nodes must be strictly increasing");
            }
        }
    }

    Data data_;
};

/// Constants of the coercivity hypotheses: Re(e^{i theta} m) > m_star near the boundary,
/// |m| < m_sup everywhere, Re(1 + m) >= delta everywhere.
struct CoercivityParams {
    Real theta = 0.0;
    Real m_star = 0.5;
    Real m_sup = 10.0;
    Real delta = 0.1;

    void validate() const {
        if (!(std::abs(theta) < 0.5 * pi)) throw ConfigError("theta must lie in (-pi/2, pi/2)");
        if (!(m_star > 0.0)) throw ConfigError("m_star must be positive");
        if (!(m_sup >= m_star)) throw ConfigError("m_sup must be at least m_star");
        if (!(delta > 0.0)) throw ConfigError("delta must be positive");
    }
};

/// Smooth cutoff: 0 within width/2 of either endpoint, 1 at distance >= width.
class CutoffFunction {
public:
    explicit CutoffFunction(const Domain1D& domain) : domain_(domain) { domain_.validate(); }

    const Domain1D& domain() const noexcept { return domain_; }

    Real operator()(Real x) const {
        const Real h = 0.5 * domain_.neighborhood_width;
        return smooth_step((domain_.boundary_distance(x) - h) / h);
    }

    RealVector sample(const RealVector& xs) const {
        return xs.unaryExpr([this](Real x) { return (*this)(x); });
    }

private:
    // C-infinity transition from 0 (y <= 0) to 1 (y >= 1).
    static Real smooth_step(Real y) {
        if (y <= 0.0) return 0.0;
        if (y >= 1.0) return 1.0;
        const Real left = std::exp(-1.0 / y);
        const Real right = std::exp(-1.0 / (1.0 - y));
        return left / (left + right);
    }

    Domain1D domain_;
};

inline CutoffFunction make_cutoff(const Domain1D& domain) { return CutoffFunction(domain); }

enum class Item1Branch { none, complex_rotation, real_negative };

inline const char* to_string(Item1Branch branch) {
    switch (branch) {
        case Item1Branch::none: return "none";
        case Item1Branch::complex_rotation: return "complex-rotation";
        case Item1Branch::real_negative: return "real-negative";
    }
    return "unknown";
}

struct CoercivityReport {
    bool passes_item1 = false;
    Item1Branch item1_branch = Item1Branch::none;
    std::optional<Real> witness_theta;
    Real item1_margin = 0.0;  // min over N of Re(e^{i theta} m) at the witness, or of -m
    bool passes_item2 = false;
    bool passes_item3 = false;
    std::vector<Real> violating_points;

    bool passes_all() const noexcept { return passes_item1 && passes_item2 && passes_item3; }
};

namespace detail {

inline constexpr int theta_samples = 181;
inline constexpr Real theta_shrink = 1e-3;

inline Real theta_sample(int j) {
    const Real half = 0.5 * pi - theta_shrink;
    return -half + 2.0 * half * static_cast<Real>(j) / static_cast<Real>(theta_samples - 1);
}

struct Item1Result {
    Item1Branch branch = Item1Branch::none;
    std::optional<Real> theta;
    Real margin = -std::numeric_limits<Real>::infinity();
    std::optional<Real> best_theta;  // best rotation even when it fails
};

/// Item 1 evaluated on samples: `near` are the contrast values inside N,
/// `all` every sample of D (the real-negative branch needs m real throughout).
inline Item1Result check_item1(const std::vector<Complex>& near, const std::vector<Complex>& all, Real m_star) {
    Item1Result result;
    Real best = -std::numeric_limits<Real>::infinity();
    for (int j = 0; j < theta_samples; ++j) {
        const Real theta = theta_sample(j);
        const Complex rot = std::polar(1.0, theta);
        Real worst = std::numeric_limits<Real>::infinity();
        for (const Complex& m : near) worst = std::min(worst, (rot * m).real());
        // Ties keep the sample closest to theta = 0.
        if (worst > best || (worst == best && result.best_theta && std::abs(theta) < std::abs(*result.best_theta))) {
            best = worst;
            result.best_theta = theta;
        }
    }
    if (best > m_star) {
        result.branch = Item1Branch::complex_rotation;
        result.theta = result.best_theta;
        result.margin = best;
        return result;
    }
    const bool real_everywhere =
        std::all_of(all.begin(), all.end(), [](const Complex& m) { return m.imag() == 0.0; });
    if (real_everywhere) {
        Real worst = std::numeric_limits<Real>::infinity();
        for (const Complex& m : near) worst = std::min(worst, -m.real());
        if (worst >= m_star) {
            result.branch = Item1Branch::real_negative;
            result.margin = worst;
            return result;
        }
    }
    result.margin = best;
    return result;
}

}  // namespace detail

/// Grid-sampled check of the three coercivity items on grid_density + 1 uniform points.
inline CoercivityReport check_hypotheses(const Contrast& contrast, const Domain1D& domain,
                                         const CoercivityParams& params, int grid_density = 512) {
    domain.validate();
    params.validate();
    if (grid_density < 64) throw ConfigError("grid_density must be at least 64");
    contrast.check_evaluable(domain);

    std::vector<Real> xs(static_cast<std::size_t>(grid_density) + 1);
    std::vector<Complex> ms(xs.size());
    std::vector<Complex> near;
    std::vector<Real> near_x;
    for (std::size_t j = 0; j < xs.size(); ++j) {
        xs[j] = domain.a + domain.length() * static_cast<Real>(j) / grid_density;
        ms[j] = contrast(xs[j]);
        if (!std::isfinite(ms[j].real()) || !std::isfinite(ms[j].imag())) {
            throw InputError("contrast is not evaluable at x = " + std::to_string(xs[j]));
        }
        if (domain.in_neighborhood(xs[j])) {
            near.push_back(ms[j]);
            near_x.push_back(xs[j]);
        }
    }
    if (near.empty()) throw ConfigError("no sample points fall inside the boundary neighborhood");

    CoercivityReport report;
    const detail::Item1Result item1 = detail::check_item1(near, ms, params.m_star);
    report.item1_branch = item1.branch;
    report.passes_item1 = item1.branch != Item1Branch::none;
    report.witness_theta = item1.theta;
    report.item1_margin = item1.margin;

    report.passes_item2 = true;
    report.passes_item3 = true;
    std::vector<Real> bad;
    if (!report.passes_item1) {
        const Complex rot = std::polar(1.0, item1.best_theta.value_or(0.0));
        for (std::size_t j = 0; j < near.size(); ++j) {
            if (!((rot * near[j]).real() > params.m_star)) bad.push_back(near_x[j]);
        }
    }
    for (std::size_t j = 0; j < xs.size(); ++j) {
        if (!(std::abs(ms[j]) < params.m_sup)) {
            report.passes_item2 = false;
            bad.push_back(xs[j]);
        }
        if (!((1.0 + ms[j]).real() >= params.delta)) {
            report.passes_item3 = false;
            bad.push_back(xs[j]);
        }
    }
    std::sort(bad.begin(), bad.end());
    bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
    report.violating_points = std::move(bad);
    return report;
}

}  // namespace itev
