#pragma once

// Constant-index reference eigenvalues on (0, 1) from the 4x4 matching system
//   W = A cos(nkx) + B sin(nkx),  V = C cos(kx) + D sin(kx),
//   W = V and W' = V' at x = 0 and x = 1.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "itev/errors.hpp"
#include "itev/types.hpp"

namespace itev {

using Matrix4c = Eigen::Matrix<Complex, 4, 4>;

inline void check_index(Real n_index) {
    if (!(n_index > 0.0) || !std::isfinite(n_index)) throw InputError("index must be positive and finite");
    if (n_index == 1.0) {
        throw DegenerateContrastError("index 1 gives identical equations for W and V; every k is a root");
    }
}

/// Rows: W(0)=V(0), W'(0)=V'(0), W(1)=V(1), W'(1)=V'(1); columns A, B, C, D.
inline Matrix4c matching_matrix(Real n_index, Complex k) {
    check_index(n_index);
    if (k == Complex{0.0}) throw InputError("matching system needs k != 0");
    const Complex nk = n_index * k;
    Matrix4c S;
    S << 1.0, 0.0, -1.0, 0.0,
         0.0, nk, 0.0, -k,
         std::cos(nk), std::sin(nk), -std::cos(k), -std::sin(k),
         -nk * std::sin(nk), nk * std::cos(nk), k * std::sin(k), -k * std::cos(k);
    return S;
}

inline Complex matching_determinant(Real n_index, Complex k) {
    return matching_matrix(n_index, k).partialPivLu().determinant();
}

/// Real factors of the determinant for real k:
///   det = k^2 g_-(k) g_+(k),  g_s(k) = (n+1) sin((n-1)k/2) + s (n-1) sin((n+1)k/2).
inline Real matching_factor(Real n_index, Real k, int sign) {
    return (n_index + 1.0) * std::sin(0.5 * (n_index - 1.0) * k) +
           static_cast<Real>(sign) * (n_index - 1.0) * std::sin(0.5 * (n_index + 1.0) * k);
}

inline Real real_combination(Real n_index, Real k) {
    check_index(n_index);
    return k * k * matching_factor(n_index, k, -1) * matching_factor(n_index, k, +1);
}

struct OracleRoot {
    Real k = 0.0;
    Real lambda = 0.0;  // -k^2
    Real k_lo = 0.0;
    Real k_hi = 0.0;
    Real det_residual = 0.0;
};

struct OracleScan {
    std::vector<OracleRoot> roots;
    std::vector<std::string> warnings;
};

namespace detail {

inline Real bisect(const std::function<Real(Real)>& f, Real lo, Real hi) {
    Real flo = f(lo);
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const Real mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const Real fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

inline Real golden_minimum(const std::function<Real(Real)>& f, Real lo, Real hi) {
    const Real r = 0.5 * (std::sqrt(5.0) - 1.0);
    Real x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
    Real f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    return 0.5 * (lo + hi);
}

struct Candidate {
    Real k;
    Real lo;
    Real hi;
    Real slope;  // |g'| at the root, larger means better located
};

inline Real slope_at(const std::function<Real(Real)>& g, Real k) {
    const Real h = 1e-6 * std::max(1.0, std::abs(k));
    return std::abs(g(k + h) - g(k - h)) / (2.0 * h);
}

}  // namespace detail

/// Sign-change scan of both real factors with bisection refinement. Local minima of
/// |g| without a sign change trigger a refined rescan, then a minimum search for
/// touching roots; both cases are reported as warnings.
inline OracleScan find_real_roots(Real n_index, Real k_min, Real k_max, int scan_points = 2048) {
    check_index(n_index);
    if (!(k_min > 0.0) || !(k_max > k_min)) throw ConfigError("root window needs 0 < k_min < k_max");
    if (scan_points < 256) throw ConfigError("scan_points must be at least 256");

    OracleScan scan;
    std::vector<detail::Candidate> found;
    const Real h = (k_max - k_min) / scan_points;
    auto grid_k = [&](int i) { return i == scan_points ? k_max : k_min + h * i; };

    for (int sign : {-1, +1}) {
        const std::function<Real(Real)> g = [=](Real k) { return matching_factor(n_index, k, sign); };
        std::vector<Real> ks(scan_points + 1), gs(scan_points + 1);
        Real scale = 0.0;
        for (int i = 0; i <= scan_points; ++i) {
            ks[i] = grid_k(i);
            gs[i] = g(ks[i]);
            scale = std::max(scale, std::abs(gs[i]));
        }
        auto add_bracket = [&](Real lo, Real hi) {
            const Real root = detail::bisect(g, lo, hi);
            found.push_back({root, lo, hi, detail::slope_at(g, root)});
        };
        for (int i = 0; i <= scan_points; ++i) {
            if (gs[i] == 0.0) found.push_back({ks[i], ks[i], ks[i], detail::slope_at(g, ks[i])});
            if (i < scan_points && gs[i] != 0.0 && gs[i + 1] != 0.0 && (gs[i] < 0.0) != (gs[i + 1] < 0.0)) {
                add_bracket(ks[i], ks[i + 1]);
            }
        }
        for (int i = 1; i < scan_points; ++i) {
            const Real a = std::abs(gs[i - 1]), b = std::abs(gs[i]), c = std::abs(gs[i + 1]);
            if (!(b < a && b < c) || gs[i] == 0.0) continue;
            if ((gs[i - 1] < 0.0) != (gs[i] < 0.0) || (gs[i] < 0.0) != (gs[i + 1] < 0.0)) continue;
            // Dip without a sign change: either two close roots or a touching root.
            constexpr int sub = 64;
            const Real lo = ks[i - 1], hi = ks[i + 1];
            Real prev_k = lo, prev_g = gs[i - 1];
            bool split = false;
            for (int j = 1; j <= sub; ++j) {
                const Real kj = lo + (hi - lo) * j / sub;
                const Real gj = g(kj);
                if (gj != 0.0 && prev_g != 0.0 && (gj < 0.0) != (prev_g < 0.0)) {
                    add_bracket(prev_k, kj);
                    split = true;
                }
                prev_k = kj;
                prev_g = gj;
            }
            if (split) {
                scan.warnings.push_back("close roots near k = " + std::to_string(ks[i]) + " resolved by refined rescan");
                continue;
            }
            const std::function<Real(Real)> absg = [&](Real k) { return std::abs(g(k)); };
            const Real kmin = detail::golden_minimum(absg, lo, hi);
            if (std::abs(g(kmin)) <= 1e-8 * scale) {
                found.push_back({kmin, lo, hi, 0.0});
                scan.warnings.push_back("touching root near k = " + std::to_string(kmin) + " located by minimum search");
            }
        }
    }

    std::sort(found.begin(), found.end(), [](const auto& x, const auto& y) { return x.k < y.k; });
    std::vector<detail::Candidate> merged;
    for (const auto& c : found) {
        if (c.k <= k_min || c.k >= k_max) continue;
        if (!merged.empty() && std::abs(c.k - merged.back().k) <= 1e-4 * std::max(1.0, c.k)) {
            // Same root seen by both factors: keep the better-conditioned estimate.
            if (c.slope > merged.back().slope) {
                const Real lo = std::min(c.lo, merged.back().lo), hi = std::max(c.hi, merged.back().hi);
                merged.back() = c;
                merged.back().lo = lo;
                merged.back().hi = hi;
            }
            continue;
        }
        merged.push_back(c);
    }
    for (const auto& c : merged) {
        scan.roots.push_back({c.k, -c.k * c.k, c.lo, c.hi, std::abs(matching_determinant(n_index, c.k))});
    }
    return scan;
}

/// lambda_j = -k_j^2.
inline std::vector<Complex> to_pencil_coordinates(const std::vector<OracleRoot>& roots) {
    std::vector<Complex> out;
    out.reserve(roots.size());
    for (const auto& r : roots) out.emplace_back(-r.k * r.k, 0.0);
    return out;
}

/// Roots for the interval (a, b): k scales by 1 / (b - a).
inline std::vector<OracleRoot> rescale_roots(std::vector<OracleRoot> roots, Real length) {
    for (auto& r : roots) {
        r.k /= length;
        r.k_lo /= length;
        r.k_hi /= length;
        r.lambda = -r.k * r.k;
    }
    return roots;
}

}  // namespace itev
