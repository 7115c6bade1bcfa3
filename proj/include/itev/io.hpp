#pragma once

// JSON and CSV serialization. JSON keys keep insertion order; numbers use
// shortest round-trip formatting so identical runs give identical bytes.

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "itev/contrast.hpp"
#include "itev/errors.hpp"
#include "itev/estimates.hpp"
#include "itev/oracle.hpp"
#include "itev/perturbation.hpp"
#include "itev/spectral.hpp"
#include "itev/types.hpp"

namespace itev::io {

using json = nlohmann::ordered_json;

/// Shortest decimal string that reads back to the same double.
inline std::string format_real(Real x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

/// A number, or [re, im].
inline Complex parse_complex(const json& j) {
    if (j.is_number()) return {j.get<Real>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<Real>(), j[1].get<Real>()};
    }
    throw ConfigError("expected a number or a [re, im] pair, got " + j.dump());
}

inline json complex_json(Complex z) {
    auto num = [](Real x) -> json {
        if (std::isfinite(x)) return x;
        return format_real(x);
    };
    return json::array({num(z.real()), num(z.imag())});
}

inline json real_json(Real x) {
    if (std::isfinite(x)) return x;
    return format_real(x);
}

struct ContrastSpec {
    Contrast contrast;
    Real a = 0.0;
    Real b = 1.0;
};

/// {"kind": "piecewise" | "polynomial" | "sampled", "data": [...], "domain": [a, b]}
///   piecewise:  data = [[right_end, value], ...], the last right_end equal to b
///   polynomial: data = [c0, c1, ...] (monomial coefficients in x)
///   sampled:    data = [[x, value], ...]
/// Values are numbers or [re, im] pairs.
inline ContrastSpec parse_contrast(const json& j) {
    if (!j.is_object()) throw ConfigError("contrast must be a JSON object");
    if (!j.contains("kind") || !j.contains("data")) throw ConfigError("contrast needs \"kind\" and \"data\"");
    ContrastSpec spec;
    if (j.contains("domain")) {
        const json& d = j.at("domain");
        if (!d.is_array() || d.size() != 2) throw ConfigError("contrast domain must be [a, b]");
        spec.a = d[0].get<Real>();
        spec.b = d[1].get<Real>();
    }
    const std::string kind = j.at("kind").get<std::string>();
    const json& data = j.at("data");
    if (!data.is_array() || data.empty()) throw ConfigError("contrast data must be a non-empty array");
    try {
        if (kind == "polynomial") {
            Polynomial p;
            for (const auto& c : data) p.coefficients.push_back(parse_complex(c));
            spec.contrast = Contrast(p);
        } else if (kind == "piecewise") {
            PiecewiseConstant pw;
            for (std::size_t i = 0; i < data.size(); ++i) {
                const json& piece = data[i];
                if (!piece.is_array() || piece.size() != 2) throw ConfigError("piecewise data entries are [right_end, value]");
                if (i + 1 < data.size()) pw.breakpoints.push_back(piece[0].get<Real>());
                pw.values.push_back(parse_complex(piece[1]));
            }
            spec.contrast = Contrast(pw);
        } else if (kind == "sampled") {
            Sampled s;
            for (const auto& pt : data) {
                if (!pt.is_array() || pt.size() != 2) throw ConfigError("sampled data entries are [x, value]");
                s.nodes.push_back(pt[0].get<Real>());
                s.values.push_back(parse_complex(pt[1]));
            }
            spec.contrast = Contrast(s);
        } else {
            throw ConfigError("unknown contrast kind \"" + kind + "\"");
        }
    } catch (const InputError& e) {
        throw ConfigError(std::string("invalid contrast: ") + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid contrast: ") + e.what());
    }
    return spec;
}

inline json read_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open " + path);
    try {
        return json::parse(is);
    } catch (const json::exception& e) {
        throw ConfigError("malformed JSON in " + path + ": " + e.what());
    }
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path);
    os << text;
}

// RFC 4180: CRLF record separators, fields quoted when they contain a comma, quote or line break.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) { row(header); }

    void row(const std::vector<std::string>& fields) {
        if (fields.size() != columns_) throw InternalError("CSV row has the wrong number of fields");
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << escape(fields[i]);
        }
        out_ << "\r\n";
    }

    std::string str() const { return out_.str(); }

    static std::string escape(const std::string& field) {
        if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
        std::string q = "\"";
        for (char c : field) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + '"';
    }

private:
    std::size_t columns_;
    std::ostringstream out_;
};

inline json contour_json(const Contour& c) {
    json j;
    j["center"] = complex_json(c.center);
    j["radius"] = c.radius;
    j["n_quad"] = c.n_quad;
    return j;
}

inline Contour parse_contour(const json& j) {
    try {
        Contour c;
        c.center = parse_complex(j.at("center"));
        c.radius = j.at("radius").get<Real>();
        c.n_quad = j.value("n_quad", 64);
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid contour: ") + e.what());
    }
}

inline json coercivity_json(const CoercivityReport& r) {
    json j;
    j["passes_all"] = r.passes_all();
    j["passes_item1"] = r.passes_item1;
    j["item1_branch"] = to_string(r.item1_branch);
    j["witness_theta"] = r.witness_theta ? json(*r.witness_theta) : json(nullptr);
    j["item1_margin"] = real_json(r.item1_margin);
    j["passes_item2"] = r.passes_item2;
    j["passes_item3"] = r.passes_item3;
    j["violating_points"] = r.violating_points;
    return j;
}

inline json eigen_result_json(const EigenResult& r) {
    json j;
    j["contour"] = contour_json(r.contour);
    j["discretization_n"] = r.discretization_n;
    j["multiplicity_total"] = r.multiplicity_total;
    j["subspace_rank"] = r.subspace_rank;
    j["n_quad"] = r.n_quad;
    j["quadrature_converged"] = r.quadrature_converged;
    json eigs = json::array();
    for (const auto& e : r.eigenpairs) {
        json x;
        x["lambda"] = complex_json(e.lambda);
        x["algebraic_multiplicity"] = e.algebraic_multiplicity;
        x["geometric_multiplicity"] = e.vectors.size();
        x["boundary_ambiguous"] = e.boundary_ambiguous;
        json res = json::array();
        for (Real v : e.residuals) res.push_back(real_json(v));
        x["residuals"] = res;
        eigs.push_back(x);
    }
    j["eigenvalues"] = eigs;
    json rej = json::array();
    for (const Complex& z : r.rejected) rej.push_back(complex_json(z));
    j["rejected_ritz_values"] = rej;
    return j;
}

inline void eigen_rows(CsvWriter& csv, std::size_t contour_index, const EigenResult& r) {
    for (const auto& e : r.eigenpairs) {
        Real worst = 0.0;
        for (Real v : e.residuals) worst = std::max(worst, v);
        csv.row({std::to_string(contour_index), std::to_string(r.discretization_n), format_real(e.lambda.real()),
                 format_real(e.lambda.imag()), std::to_string(e.algebraic_multiplicity),
                 std::to_string(e.vectors.size()), format_real(worst), e.boundary_ambiguous ? "true" : "false"});
    }
}

inline CsvWriter eigen_csv() {
    return CsvWriter({"contour", "n", "lambda_re", "lambda_im", "algebraic_multiplicity", "geometric_multiplicity",
                      "residual", "boundary_ambiguous"});
}

inline std::string estimates_csv(const std::vector<EstimateReport>& rows) {
    CsvWriter csv({"inequality", "state", "lambda", "lhs", "rhs", "fitted_K", "satisfied"});
    for (const auto& r : rows) {
        const Real K = r.fitted_K.value_or(std::numeric_limits<Real>::quiet_NaN());
        csv.row({r.id, r.state, format_real(r.lambda), format_real(r.lhs), format_real(K * r.rhs_without_K),
                 format_real(K), r.satisfied ? "true" : "false"});
    }
    return csv.str();
}

inline std::string oracle_csv(Real n_index, const std::vector<OracleRoot>& roots) {
    CsvWriter csv({"n_index", "k", "lambda", "det_residual"});
    for (const auto& r : roots) {
        csv.row({format_real(n_index), format_real(r.k), format_real(r.lambda), format_real(r.det_residual)});
    }
    return csv.str();
}

inline std::string trajectory_csv(const Trajectory& traj) {
    CsvWriter csv({"step", "t", "track", "lambda_re", "lambda_im", "residual", "multiplicity", "rank", "rank_changed",
                   "grazed"});
    for (const auto& s : traj.steps) {
        auto base = [&](const std::string& track, const std::string& re, const std::string& im, const std::string& res,
                        const std::string& mult) {
            csv.row({std::to_string(s.step), format_real(s.t), track, re, im, res, mult, std::to_string(s.rank),
                     s.rank_changed ? "true" : "false", s.grazed ? "true" : "false"});
        };
        if (s.points.empty()) base("", "", "", "", "");
        for (const auto& p : s.points) {
            base(std::to_string(p.track), format_real(p.eigenvalue.real()), format_real(p.eigenvalue.imag()),
                 format_real(p.residual), std::to_string(p.multiplicity));
        }
    }
    return csv.str();
}

inline json continuity_json(const ContinuityReport& r) {
    json j;
    j["perturbation_size"] = r.perturbation_size;
    j["effective_size"] = r.effective_size;
    j["weighted"] = r.weighted;
    j["delta"] = r.delta;
    j["gamma"] = r.gamma;
    j["measured_delta_P"] = r.measured_delta_P;
    j["bound"] = real_json(r.bound);
    j["applicable"] = r.applicable;
    j["status"] = !r.applicable ? "not-applicable" : (r.satisfied ? "satisfied" : "violated");
    j["rank_before"] = r.rank_before;
    j["rank_after"] = r.rank_after;
    j["n_quad"] = r.n_quad;
    return j;
}

}  // namespace itev::io
