// itev: command-line front end.
//
// Exit codes: 0 success, 1 config error, 2 hypothesis failure, 3 numerical or contour failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "itev/itev.hpp"

namespace {

using namespace itev;
namespace fs = std::filesystem;

constexpr int exit_ok = 0;
constexpr int exit_config = 1;
constexpr int exit_hypothesis = 2;
constexpr int exit_numerical = 3;

struct Overrides {
    std::string config;
    std::optional<int> n;
    std::optional<std::uint64_t> seed;
    bool force = false;
    bool oracle_compare = false;
    std::string out = ".";
};

RunConfig load(const Overrides& o) {
    RunConfig cfg = load_config(o.config);
    if (o.n) {
        if (*o.n < 8 || *o.n > 512) throw ConfigError("--n must lie in [8, 512]");
        cfg.n = *o.n;
    }
    if (o.seed) cfg.seed = *o.seed;
    return cfg;
}

std::string out_path(const Overrides& o, const std::string& name) {
    fs::create_directories(o.out);
    return (fs::path(o.out) / name).string();
}

std::string fmt_complex(Complex z) {
    return io::format_real(z.real()) + (z.imag() < 0 ? " - " : " + ") + io::format_real(std::abs(z.imag())) + "i";
}

CoercivityReport report_hypotheses(const RunConfig& cfg) {
    return check_hypotheses(cfg.contrast.contrast, cfg.domain, cfg.params, cfg.grid_density);
}

int cmd_check(const Overrides& o) {
    const RunConfig cfg = load(o);
    const CoercivityReport r = report_hypotheses(cfg);
    std::cout << "item 1 (coercivity near the boundary): " << (r.passes_item1 ? "pass" : "FAIL") << " ["
              << to_string(r.item1_branch) << ", margin " << io::format_real(r.item1_margin) << "]\n";
    std::cout << "item 2 (Re(1+m) >= delta): " << (r.passes_item2 ? "pass" : "FAIL") << "\n";
    std::cout << "item 3 (|m| <= m_sup): " << (r.passes_item3 ? "pass" : "FAIL") << "\n";
    if (!r.violating_points.empty()) {
        std::cout << "violating points:";
        for (Real x : r.violating_points) std::cout << ' ' << io::format_real(x);
        std::cout << "\n";
    }
    io::write_text(out_path(o, "coercivity.json"), io::coercivity_json(r).dump(2) + "\n");
    return r.passes_all() ? exit_ok : exit_hypothesis;
}

// Constant real index sqrt(1 + m), if the contrast admits one.
std::optional<Real> constant_index(const RunConfig& cfg) {
    if (cfg.oracle.n_index) return cfg.oracle.n_index;
    const auto c = cfg.contrast.contrast.constant_value();
    if (!c || c->imag() != 0.0 || !(1.0 + c->real() > 0.0)) return std::nullopt;
    return std::sqrt(1.0 + c->real());
}

int cmd_solve(const Overrides& o) {
    const RunConfig cfg = load(o);
    if (cfg.contours.empty()) throw ConfigError("solve needs at least one contour");
    const CoercivityReport hyp = report_hypotheses(cfg);
    if (!hyp.passes_all()) {
        if (!o.force) {
            std::cerr << "hypotheses fail; rerun with --force to solve anyway\n";
            return exit_hypothesis;
        }
        std::cerr << "warning: hypotheses fail, continuing because of --force\n";
    }
    std::optional<Real> n_index;
    if (o.oracle_compare) {
        n_index = constant_index(cfg);
        if (!n_index) throw ConfigError("--oracle-compare needs a constant real contrast with 1 + m > 0");
        check_index(*n_index);
    }

    const CollocationGrid grid = build_grid(cfg.domain, cfg.n);
    const PencilBlocks pencil = build_pencil(grid, cfg.contrast.contrast, cfg.weighting);
    const EigenOptions opts = cfg.eigen_options();

    io::json all = io::json::array();
    io::CsvWriter csv = io::eigen_csv();
    io::CsvWriter cmp({"contour", "oracle_lambda", "solver_lambda_re", "solver_lambda_im", "abs_diff", "rel_diff"});
    Real max_mismatch = 0.0;
    for (std::size_t i = 0; i < cfg.contours.size(); ++i) {
        const Contour& c = cfg.contours[i];
        EigenResult res;
        try {
            res = eigs_in_contour(pencil, c, opts);
        } catch (const ContourGrazeError& e) {
            std::cerr << "contour " << i << " touches the spectrum: " << e.what() << "\n"
                      << "suggested radius: " << io::format_real(e.suggested_radius()) << "\n";
            return exit_numerical;
        }
        std::cout << "contour " << i << " (center " << fmt_complex(c.center) << ", radius "
                  << io::format_real(c.radius) << "): " << res.eigenpairs.size() << " eigenvalue(s), total multiplicity "
                  << res.multiplicity_total << "\n";
        if (res.subspace_rank != res.multiplicity_total) {
            std::cout << "  note: subspace rank " << res.subspace_rank
                      << " includes eigenvalues just outside the contour\n";
        }
        if (!res.quadrature_converged) std::cout << "  note: quadrature did not saturate\n";
        for (const Complex& z : res.rejected) {
            std::cout << "  note: rejected Ritz value " << fmt_complex(z) << " (residual above cap)\n";
        }
        for (const auto& e : res.eigenpairs) {
            std::cout << "  " << fmt_complex(e.lambda) << "  am " << e.algebraic_multiplicity << "  gm "
                      << e.vectors.size() << (e.boundary_ambiguous ? "  (near contour)" : "") << "\n";
        }
        all.push_back(io::eigen_result_json(res));
        io::eigen_rows(csv, i, res);

        if (n_index) {
            // Real negative eigenvalues in the disk correspond to k in [k_lo, k_hi].
            const Real lam_hi = std::min(c.center.real() + c.radius, 0.0);
            const Real lam_lo = c.center.real() - c.radius;
            if (lam_lo >= 0.0) continue;
            const Real L = cfg.domain.length();
            const Real k_lo = std::max(std::sqrt(-lam_hi) * L, 1e-6);
            const Real k_hi = std::sqrt(-lam_lo) * L;
            OracleScan scan = find_real_roots(*n_index, k_lo, k_hi, cfg.oracle.scan_points);
            const auto roots = rescale_roots(scan.roots, L);
            std::cout << "  oracle vs solver:\n";
            for (const auto& r : roots) {
                if (!c.strictly_inside(Complex(r.lambda, 0.0), 0.0)) continue;
                const Eigenpair* best = nullptr;
                for (const auto& e : res.eigenpairs) {
                    if (!best || std::abs(e.lambda - r.lambda) < std::abs(best->lambda - r.lambda)) best = &e;
                }
                if (!best) {
                    std::cout << "    " << io::format_real(r.lambda) << "  (no solver eigenvalue)\n";
                    cmp.row({std::to_string(i), io::format_real(r.lambda), std::string(), std::string(), std::string(), std::string()});
                    max_mismatch = std::numeric_limits<Real>::infinity();
                    continue;
                }
                const Real diff = std::abs(best->lambda - r.lambda);
                const Real rel = diff / std::max(1.0, std::abs(r.lambda));
                max_mismatch = std::max(max_mismatch, rel);
                std::cout << "    " << io::format_real(r.lambda) << "  " << fmt_complex(best->lambda) << "  rel "
                          << io::format_real(rel) << "\n";
                cmp.row({std::to_string(i), io::format_real(r.lambda), io::format_real(best->lambda.real()),
                         io::format_real(best->lambda.imag()), io::format_real(diff), io::format_real(rel)});
            }
        }
    }
    io::write_text(out_path(o, "eigenvalues.json"), all.dump(2) + "\n");
    io::write_text(out_path(o, "eigenvalues.csv"), csv.str());
    if (n_index) {
        io::write_text(out_path(o, "oracle_compare.csv"), cmp.str());
        std::cout << "max relative mismatch vs oracle: " << io::format_real(max_mismatch) << "\n";
    }
    return exit_ok;
}

std::vector<SuiteState> default_states(const CollocationGrid& grid) {
    auto make = [&](const std::string& name, auto fn) {
        ComplexVector v(grid.size());
        for (Eigen::Index j = 0; j < grid.size(); ++j) {
            const Real s = (grid.nodes(j) - grid.domain.a) / grid.domain.length();
            v(j) = fn(s);
        }
        return SuiteState{name, v / l2_norm(grid, v)};
    };
    return {
        make("sin1", [](Real s) { return Complex(std::sin(pi * s)); }),
        make("sin2", [](Real s) { return Complex(std::sin(2 * pi * s)); }),
        make("cos3", [](Real s) { return Complex(std::cos(3 * pi * s)); }),
        make("edge", [](Real s) { return Complex(std::exp(-30 * s) + std::exp(-30 * (1 - s))); }),
        make("bump", [](Real s) { return Complex(std::exp(-50 * (s - 0.5) * (s - 0.5))); }),
        make("oscillating", [](Real s) { return std::exp(Complex(0.0, 7 * pi * s)) * (1 + s); }),
    };
}

int cmd_verify(const Overrides& o) {
    const RunConfig cfg = load(o);
    const VerifySettings& vs = cfg.verify;
    const CollocationGrid grid = build_grid(cfg.domain, cfg.n);
    const PencilBlocks pencil = build_pencil(grid, cfg.contrast.contrast, cfg.weighting);
    EstimateConfig ecfg;
    ecfg.large_lambda = vs.large_lambda;

    std::vector<EstimateReport> rows;
    bool all_ok = true;
    auto count_failures = [](const std::vector<EstimateReport>& r) {
        return std::count_if(r.begin(), r.end(), [](const EstimateReport& x) { return !x.satisfied; });
    };
    auto warn = [](const std::string& suite, const std::vector<std::string>& ws) {
        for (const auto& w : ws) std::cout << "  [" << suite << "] warning: " << w << "\n";
    };

    for (const auto& suite : vs.suites) {
        try {
            if (suite == "concentration") {
                const ComplexVector m = sample(grid, cfg.contrast.contrast);
                auto res = concentration_suite(grid, make_cutoff(cfg.domain), m, cfg.params, default_states(grid),
                                               vs.lambda_sweep, true, ecfg);
                warn(suite, res.warnings);
                if (res.rows.empty()) {
                    std::cout << "concentration: skipped (no lambda at or above " << io::format_real(vs.large_lambda)
                              << ")\n";
                    continue;
                }
                const auto bad = count_failures(res.rows);
                std::cout << "concentration: " << res.rows.size() << " rows, " << bad << " violated\n";
                all_ok = all_ok && bad == 0;
                rows.insert(rows.end(), res.rows.begin(), res.rows.end());
            } else if (suite == "resolvent") {
                auto res = verify_resolvent_estimates(pencil, vs.lambda_sweep, vs.trials, cfg.seed,
                                                      {DataMode::both, DataMode::f_only, DataMode::g_only}, ecfg);
                warn(suite, res.warnings);
                if (res.rows.empty()) {
                    std::cout << "resolvent: skipped (no lambda at or above " << io::format_real(vs.large_lambda)
                              << ")\n";
                    continue;
                }
                const auto bad = count_failures(res.rows);
                std::cout << "resolvent: " << res.rows.size() << " rows, " << bad << " violated\n";
                for (const auto& s : res.slopes) {
                    std::cout << "  slope " << s.id << " (" << to_string(s.mode) << "): " << io::format_real(s.slope)
                              << "\n";
                }
                all_ok = all_ok && bad == 0;
                rows.insert(rows.end(), res.rows.begin(), res.rows.end());
            } else if (suite == "energy_identity") {
                std::mt19937_64 rng(cfg.seed);
                Real worst = 0.0;
                for (int t = 0; t < vs.identity_trials; ++t) {
                    const ComplexVector f = random_smooth(grid, rng);
                    const ComplexVector g = random_smooth(grid, rng);
                    worst = std::max(worst, verify_energy_identity(pencil, vs.identity_lambda, f, g));
                }
                EstimateReport row;
                row.id = inequality::energy_identity;
                row.state = "random";
                row.lambda = vs.identity_lambda;
                row.lhs = worst;
                row.rhs_without_K = cfg.tolerances.identity_tol;
                row.fitted_K = 1.0;
                row.satisfied = worst <= cfg.tolerances.identity_tol;
                std::cout << "energy identity residual: " << io::format_real(worst) << " (tolerance "
                          << io::format_real(cfg.tolerances.identity_tol) << ")\n";
                all_ok = all_ok && row.satisfied;
                rows.push_back(row);
            } else if (suite == "factorization") {
                const Real r = verify_factorization_identity(pencil, vs.factorization_lambda, cfg.contrast.contrast);
                EstimateReport row;
                row.id = "factorization_identity";
                row.state = "operator";
                row.lambda = vs.factorization_lambda;
                row.lhs = r;
                row.rhs_without_K = cfg.tolerances.identity_tol;
                row.fitted_K = 1.0;
                row.satisfied = r <= cfg.tolerances.identity_tol;
                std::cout << "factorization identity residual: " << io::format_real(r) << " (tolerance "
                          << io::format_real(cfg.tolerances.identity_tol) << ")\n";
                all_ok = all_ok && row.satisfied;
                rows.push_back(row);
            }
        } catch (const PreconditionError& e) {
            std::cout << suite << ": precondition violated: " << e.what() << "\n";
            all_ok = false;
        } catch (const NearSingularError& e) {
            std::cout << suite << ": singular system: " << e.what() << "\n";
            all_ok = false;
        }
    }
    io::write_text(out_path(o, "estimates.csv"), io::estimates_csv(rows));
    return all_ok ? exit_ok : exit_hypothesis;
}

ContrastFamily family_from(const RunConfig& cfg, const FamilySettings& fs) {
    if (fs.kind == "index_linear") return index_linear_family(fs.n0, fs.slope);
    return blend_family(cfg.contrast.contrast, fs.target->contrast, cfg.domain);
}

int cmd_perturb(const Overrides& o) {
    const RunConfig cfg = load(o);
    const PerturbSettings& ps = cfg.perturb;
    if (!ps.perturbed && !ps.family) throw ConfigError("perturb needs a perturbed contrast or a family");
    if (ps.contour >= cfg.contours.size()) throw ConfigError("perturb.contour does not index a configured contour");
    const Contour& contour = cfg.contours[ps.contour];
    const CollocationGrid grid = build_grid(cfg.domain, cfg.n);
    const PencilBlocks base = build_pencil(grid, cfg.contrast.contrast, cfg.weighting);
    const EigenOptions eo = cfg.eigen_options();

    if (ps.perturbed) {
        const PencilBlocks pert = build_pencil(grid, ps.perturbed->contrast, cfg.weighting);
        ContinuityOptions co;
        co.weighted = ps.weighted;
        co.allow_inapplicable = true;
        co.quadrature = eo.quadrature;
        co.rank = eo.rank;
        const ContinuityReport r = projector_continuity(base, pert, contour, co);
        const char* status = !r.applicable ? "not-applicable" : (r.satisfied ? "satisfied" : "violated");
        std::cout << "perturbation  gamma  measured  bound  rank_before  rank_after  status\n"
                  << io::format_real(r.effective_size) << "  " << io::format_real(r.gamma) << "  "
                  << io::format_real(r.measured_delta_P) << "  " << io::format_real(r.bound) << "  " << r.rank_before
                  << "  " << r.rank_after << "  " << status << "\n";
        io::write_text(out_path(o, "continuity.json"), io::continuity_json(r).dump(2) + "\n");
    }
    if (ps.family) {
        TrackingOptions to;
        to.eigen = eo;
        to.params = cfg.params;
        to.weighted = ps.family->weighted;
        const Trajectory traj = eigenvalue_tracking(family_from(cfg, *ps.family), ps.family->steps, contour, grid, to);
        for (const auto& s : traj.steps) {
            std::cout << "t = " << io::format_real(s.t) << ": rank " << s.rank << (s.grazed ? " (grazed)" : "")
                      << (s.rank_changed ? " (rank changed)" : "") << "\n";
        }
        std::cout << "max step-to-step jump: " << io::format_real(traj.max_jump()) << "\n";
        io::write_text(out_path(o, "trajectory.csv"), io::trajectory_csv(traj));
    }
    return exit_ok;
}

int cmd_oracle(const Overrides& o) {
    const RunConfig cfg = load(o);
    const std::optional<Real> n_index = constant_index(cfg);
    if (!n_index) throw ConfigError("oracle needs oracle.n_index or a constant real contrast with 1 + m > 0");
    const OracleScan scan = find_real_roots(*n_index, cfg.oracle.k_min, cfg.oracle.k_max, cfg.oracle.scan_points);
    for (const auto& w : scan.warnings) std::cout << "warning: " << w << "\n";
    const auto roots = rescale_roots(scan.roots, cfg.domain.length());
    std::cout << "n = " << io::format_real(*n_index) << ": " << roots.size() << " real root(s)\n";
    for (const auto& r : roots) {
        std::cout << "  k " << io::format_real(r.k) << "  lambda " << io::format_real(r.lambda) << "\n";
    }
    io::write_text(out_path(o, "oracle_roots.csv"), io::oracle_csv(*n_index, roots));
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interior transmission eigenvalues via contour-integral projections"};
    app.require_subcommand(1);
    Overrides ov;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", ov.config, "JSON run configuration")->required();
        sub->add_option("--n", ov.n, "Collocation degree (overrides config)");
        sub->add_option("--seed", ov.seed, "Random seed (overrides config)");
        sub->add_option("--out", ov.out, "Output directory");
    };
    CLI::App* check = app.add_subcommand("check", "Check the coercivity hypotheses on the contrast");
    CLI::App* solve = app.add_subcommand("solve", "Eigenvalues inside each configured contour");
    CLI::App* verify = app.add_subcommand("verify", "Run the a priori estimate suites");
    CLI::App* perturb = app.add_subcommand("perturb", "Projector continuity and eigenvalue tracking");
    CLI::App* oracle = app.add_subcommand("oracle", "Real roots of the constant-index determinant");
    for (CLI::App* s : {check, solve, verify, perturb, oracle}) add_common(s);
    solve->add_flag("--force", ov.force, "Solve even if the hypotheses fail");
    solve->add_flag("--oracle-compare", ov.oracle_compare, "Compare against the constant-index oracle");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        if (*check) return cmd_check(ov);
        if (*solve) return cmd_solve(ov);
        if (*verify) return cmd_verify(ov);
        if (*perturb) return cmd_perturb(ov);
        if (*oracle) return cmd_oracle(ov);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const InputError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const io::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const PreconditionError& e) {
        std::cerr << "hypothesis failure: " << e.what() << "\n";
        return exit_hypothesis;
    } catch (const DegenerateContrastError& e) {
        std::cerr << "hypothesis failure: " << e.what() << "\n";
        return exit_hypothesis;
    } catch (const ContourGrazeError& e) {
        std::cerr << "contour failure: " << e.what() << "; suggested radius "
                  << io::format_real(e.suggested_radius()) << "\n";
        return exit_numerical;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    }
    return exit_config;
}
