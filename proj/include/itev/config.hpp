#pragma once

// Run configuration for the command-line front end.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "itev/contrast.hpp"
#include "itev/errors.hpp"
#include "itev/io.hpp"
#include "itev/pencil.hpp"
#include "itev/spectral.hpp"
#include "itev/types.hpp"

namespace itev {

using io::ContrastSpec;

struct Tolerances {
    Real rank_rel_tol = 1e-8;
    Real rank_abs_floor = 1e-10;
    Real residual_cap = 1e-7;
    Real condition_cap = default_condition_cap;
    Real cluster_rel_tol = 1e-3;
    Real identity_tol = 1e-8;   // energy and factorization identity residuals

    void validate() const {
        for (Real t : {rank_rel_tol, rank_abs_floor, residual_cap, condition_cap, cluster_rel_tol, identity_tol}) {
            if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("tolerances must be positive and finite");
        }
    }
};

struct OracleSettings {
    std::optional<Real> n_index;
    Real k_min = 1.0;
    Real k_max = 15.0;
    int scan_points = 2048;
};

struct VerifySettings {
    std::vector<std::string> suites{"concentration", "resolvent", "energy_identity", "factorization"};
    std::vector<Real> lambda_sweep{1e2, 1e3, 1e4, 1e5};
    int trials = 5;
    Real large_lambda = 100.0;
    Real identity_lambda = 1e4;
    int identity_trials = 20;
    Real factorization_lambda = 1e4;
};

struct FamilySettings {
    std::string kind;          // "index_linear" or "blend"
    Real n0 = 3.0;
    Real slope = 0.1;
    std::optional<ContrastSpec> target;  // blend end point
    int steps = 10;
    bool weighted = true;  // track eigenvalues of the contrast-weighted pencil
};

struct PerturbSettings {
    std::optional<ContrastSpec> perturbed;
    bool weighted = false;
    std::size_t contour = 0;
    std::optional<FamilySettings> family;
};

struct RunConfig {
    ContrastSpec contrast;
    Domain1D domain;
    int n = 64;
    std::uint64_t seed = 0;
    CoercivityParams params;
    int grid_density = 512;
    Tolerances tolerances;
    int probe_rank = 8;
    Weighting weighting = Weighting::contrast;
    std::vector<Contour> contours;
    OracleSettings oracle;
    VerifySettings verify;
    PerturbSettings perturb;

    EigenOptions eigen_options() const {
        EigenOptions o;
        o.probe_rank = probe_rank;
        o.seed = seed;
        o.cluster_rel_tol = tolerances.cluster_rel_tol;
        o.residual_cap = tolerances.residual_cap;
        o.quadrature.condition_cap = tolerances.condition_cap;
        o.rank.rel_tol = tolerances.rank_rel_tol;
        o.rank.abs_floor = tolerances.rank_abs_floor;
        return o;
    }
};

namespace detail {

inline ContrastSpec contrast_from(const io::json& j, const std::filesystem::path& base, const char* key,
                                  const char* file_key) {
    if (j.contains(key)) return io::parse_contrast(j.at(key));
    if (j.contains(file_key)) {
        std::filesystem::path p = j.at(file_key).get<std::string>();
        if (p.is_relative()) p = base / p;
        if (!std::filesystem::exists(p)) throw ConfigError("contrast file not found: " + p.string());
        return io::parse_contrast(io::read_json_file(p.string()));
    }
    throw ConfigError(std::string("config needs \"") + key + "\" or \"" + file_key + "\"");
}

}  // namespace detail

/// Parses a config document; relative file references resolve against base_dir.
inline RunConfig parse_config(const io::json& j, const std::filesystem::path& base_dir = ".") {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig cfg;
    try {
        cfg.contrast = detail::contrast_from(j, base_dir, "contrast", "contrast_file");
        cfg.domain = Domain1D(cfg.contrast.a, cfg.contrast.b, j.value("neighborhood_width", 0.2));
        cfg.contrast.contrast.check_evaluable(cfg.domain);
        cfg.n = j.value("n", cfg.n);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.probe_rank = j.value("probe_rank", cfg.probe_rank);
        const std::string w = j.value("weighting", std::string("contrast"));
        if (w != "contrast" && w != "identity") throw ConfigError("weighting must be \"contrast\" or \"identity\"");
        cfg.weighting = w == "contrast" ? Weighting::contrast : Weighting::identity;

        if (j.contains("coercivity")) {
            const auto& c = j.at("coercivity");
            cfg.params.theta = c.value("theta", cfg.params.theta);
            cfg.params.m_star = c.value("m_star", cfg.params.m_star);
            cfg.params.m_sup = c.value("m_sup", cfg.params.m_sup);
            cfg.params.delta = c.value("delta", cfg.params.delta);
            cfg.grid_density = c.value("grid_density", cfg.grid_density);
        }
        cfg.params.validate();
        if (cfg.grid_density < 64) throw ConfigError("grid_density must be at least 64");

        if (j.contains("tolerances")) {
            const auto& t = j.at("tolerances");
            auto& tol = cfg.tolerances;
            tol.rank_rel_tol = t.value("rank_rel_tol", tol.rank_rel_tol);
            tol.rank_abs_floor = t.value("rank_abs_floor", tol.rank_abs_floor);
            tol.residual_cap = t.value("residual_cap", tol.residual_cap);
            tol.condition_cap = t.value("condition_cap", tol.condition_cap);
            tol.cluster_rel_tol = t.value("cluster_rel_tol", tol.cluster_rel_tol);
            tol.identity_tol = t.value("identity_tol", tol.identity_tol);
        }
        cfg.tolerances.validate();

        if (j.contains("contours")) {
            for (const auto& c : j.at("contours")) cfg.contours.push_back(io::parse_contour(c));
        }

        if (j.contains("oracle")) {
            const auto& o = j.at("oracle");
            if (o.contains("n_index")) cfg.oracle.n_index = o.at("n_index").get<Real>();
            cfg.oracle.k_min = o.value("k_min", cfg.oracle.k_min);
            cfg.oracle.k_max = o.value("k_max", cfg.oracle.k_max);
            cfg.oracle.scan_points = o.value("scan_points", cfg.oracle.scan_points);
        }

        if (j.contains("verify")) {
            const auto& v = j.at("verify");
            auto& vs = cfg.verify;
            if (v.contains("suites")) vs.suites = v.at("suites").get<std::vector<std::string>>();
            if (v.contains("lambda_sweep")) vs.lambda_sweep = v.at("lambda_sweep").get<std::vector<Real>>();
            vs.trials = v.value("trials", vs.trials);
            vs.large_lambda = v.value("large_lambda", vs.large_lambda);
            vs.identity_lambda = v.value("identity_lambda", vs.identity_lambda);
            vs.identity_trials = v.value("identity_trials", vs.identity_trials);
            vs.factorization_lambda = v.value("factorization_lambda", vs.factorization_lambda);
            for (const auto& s : vs.suites) {
                if (s != "concentration" && s != "resolvent" && s != "energy_identity" && s != "factorization") {
                    throw ConfigError("unknown verify suite \"" + s + "\"");
                }
            }
            if (vs.trials < 1 || vs.identity_trials < 1) throw ConfigError("trial counts must be positive");
            if (!(vs.large_lambda > 0.0)) throw ConfigError("large_lambda must be positive");
        }

        if (j.contains("perturb")) {
            const auto& p = j.at("perturb");
            auto& ps = cfg.perturb;
            if (p.contains("perturbed") || p.contains("perturbed_file")) {
                ps.perturbed = detail::contrast_from(p, base_dir, "perturbed", "perturbed_file");
            }
            ps.weighted = p.value("weighted", false);
            ps.contour = p.value("contour", std::size_t{0});
            if (p.contains("family")) {
                const auto& f = p.at("family");
                FamilySettings fs;
                fs.kind = f.at("kind").get<std::string>();
                fs.n0 = f.value("n0", fs.n0);
                fs.slope = f.value("slope", fs.slope);
                fs.steps = f.value("steps", fs.steps);
                fs.weighted = f.value("weighted", fs.weighted);
                if (fs.kind == "blend") {
                    fs.target = detail::contrast_from(f, base_dir, "to", "to_file");
                } else if (fs.kind != "index_linear") {
                    throw ConfigError("family kind must be \"index_linear\" or \"blend\"");
                }
                if (fs.steps < 1) throw ConfigError("family steps must be positive");
                ps.family = fs;
            }
        }
    } catch (const io::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    } catch (const InputError& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    if (cfg.n < 8 || cfg.n > 512) throw ConfigError("n must lie in [8, 512]");
    if (cfg.probe_rank < 1 || cfg.probe_rank > 32) throw ConfigError("probe_rank must lie in [1, 32]");
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    const std::filesystem::path p(path);
    if (!std::filesystem::exists(p)) throw ConfigError("config file not found: " + path);
    return parse_config(io::read_json_file(path), p.parent_path());
}

}  // namespace itev
