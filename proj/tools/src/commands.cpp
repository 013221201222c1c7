#include "pdmforge/cli/commands.hpp"

#include "pdmforge/cli/emit.hpp"
#include "pdmforge/errors.hpp"
#include "pdmforge/pct.hpp"
#include "pdmforge/vonroos.hpp"

#include <json.hpp>

#include <cmath>
#include <ostream>

namespace pdm::cli {

namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

Grid1D system_grid(const RunConfig& cfg) {
    if (cfg.grid) return Grid1D(cfg.grid->x_lo, cfg.grid->x_hi, cfg.grid->n_points);
    return cfg.system.kind == "harmonic_limit" ? default_harmonic_grid() : default_exponential_grid(cfg.system.beta);
}

ConstructedSystem build_system(const RunConfig& cfg) {
    const Grid1D grid = system_grid(cfg);
    if (cfg.system.kind == "harmonic_limit") return construct_harmonic_limit(cfg.system.n_max, grid, cfg.system.split_tol);
    return construct_laguerre_exponential(cfg.system.beta, cfg.system.nu, cfg.system.n_max, grid,
                                          cfg.system.split_tol);
}

fs::path prepare(const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) throw IoError("cannot create output directory " + out_dir.string());
    return out_dir;
}

ojson grid_json(const Grid1D& g) {
    ojson j;
    j["x_lo"] = g.x_lo();
    j["x_hi"] = g.x_hi();
    j["n_points"] = g.size();
    return j;
}

ojson system_json(const ConstructedSystem& sys) {
    ojson j;
    j["kind"] = sys.provenance.kind;
    if (sys.provenance.kind == "laguerre_exponential") {
        j["beta"] = sys.provenance.beta;
        j["nu"] = sys.provenance.nu;
    }
    j["n_max"] = sys.n_max();
    return j;
}

std::string dump(const ojson& j) { return j.dump(2); }

ojson finite_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

DeltaQ registry_generator(const PerturbationBlock& p) {
    if (p.generator == "constant") return delta_q_constant(p.value);
    if (p.generator == "two_over_g") return delta_q_two_over_g();
    if (p.generator == "linear") return delta_q_linear(p.value);
    return delta_q_zero();
}

MassProfile registry_mass(const RegistryEntry& e, const Interval& dom) {
    if (e.kind == "exponential") return MassProfile(make_exp_map(e.param("rate"), std::log(e.param("scale")), dom));
    if (e.kind == "rational") {
        const double w = e.param("width");
        return MassProfile(e.param("value") * reciprocal(polynomial_map({1.0, 0.0, 1.0 / (w * w)}, dom)));
    }
    return MassProfile(constant_map(e.param("value"), dom));
}

SmoothMap1D registry_potential(const RegistryEntry& e, const Interval& dom) {
    if (e.kind == "harmonic") return polynomial_map({0.0, 0.0, e.param("k")}, dom);
    if (e.kind == "polynomial") return polynomial_map(e.coefficients, dom);
    if (e.kind == "exponential") return e.param("amplitude") * make_exp_map(e.param("rate"), 0.0, dom);
    if (e.kind == "laguerre_exponential") {
        const double beta = e.param("beta");
        const double nu = e.param("nu");
        const double s = 0.25 * beta * beta;
        return s * (nu * nu - 1.0) * make_exp_map(beta, 0.0, dom) + s * make_exp_map(-beta, 0.0, dom);
    }
    return constant_map(0.0, dom);
}

ojson registry_json(const RegistryEntry& e) {
    ojson j;
    j["kind"] = e.kind;
    for (const auto& [k, v] : e.params) j[k] = v;
    if (!e.coefficients.empty()) j["coefficients"] = e.coefficients;
    return j;
}

} // namespace

void cmd_construct(const RunConfig& cfg, const fs::path& out_dir) {
    const ConstructedSystem sys = build_system(cfg);
    const fs::path dir = prepare(out_dir);

    std::vector<double> xs = sys.grid().points();
    std::vector<CsvColumn> cols{{"x", xs}, {"V", sys.V}};
    for (std::size_t n = 0; n < sys.psi.size(); ++n) cols.push_back({"psi_" + std::to_string(n), sys.psi[n]});
    write_csv(dir / "system.csv", cols);

    ojson j;
    j["command"] = "construct";
    j["system"] = system_json(sys);
    j["grid"] = grid_json(sys.grid());
    j["E"] = sys.E;
    j["gauge_note"] = sys.gauge_note;
    j["split_deviation"] = sys.split_deviation;
    write_text(dir / "levels.json", dump(j));
}

void cmd_perturb(const RunConfig& cfg, const fs::path& out_dir, const CommandOptions& opts) {
    const ConstructedSystem sys = build_system(cfg);
    PerturbOptions po;
    po.override_node_guard = opts.override_node_guard;
    po.check_tol = cfg.perturbation.check_tol;
    const int n = cfg.perturbation.level;
    const PerturbationResult r = cfg.perturbation.kind == "two_over_g"
                                     ? deltaQ_2_over_g(sys, n, po)
                                     : apply_deltaQ(sys, n, registry_generator(cfg.perturbation), po);
    const fs::path dir = prepare(out_dir);

    std::vector<double> xs = sys.grid().points();
    write_csv(dir / "perturbation.csv", {{"x", xs}, {"h", r.h}, {"deltaV", r.deltaV}, {"psi_ext", r.psi_ext}});

    ojson j;
    j["command"] = "perturb";
    j["system"] = system_json(sys);
    j["grid"] = grid_json(sys.grid());
    j["generator"] = r.label;
    j["level"] = r.level;
    j["deltaE"] = r.deltaE;
    j["energy_gauge"] = r.energy_gauge;
    j["gauge_note"] = r.energy_gauge ? "deltaE = 0 by gauge choice; deltaV = -D carries the full shift"
                                     : "deltaE from the closed form of the generator";
    j["E"] = sys.E[static_cast<std::size_t>(n)];
    j["E_extended"] = sys.E[static_cast<std::size_t>(n)] + r.deltaE;
    j["override_node_guard"] = opts.override_node_guard;
    j["masked_points"] = r.masked_points;
    write_text(dir / "delta.json", dump(j));
}

bool cmd_verify(const RunConfig& cfg, const fs::path& out_dir) {
    const ConstructedSystem sys = build_system(cfg);
    VerifyOptions vo;
    vo.solver.solver_tol = cfg.solver.solver_tol;
    vo.solver.max_sweeps = cfg.solver.max_sweeps;
    vo.boundary_tol = cfg.solver.boundary_tol;
    vo.energy_tol = cfg.solver.energy_tol;
    vo.overlap_tol = cfg.solver.overlap_tol;
    const VerificationReport rep = verify_system(sys, cfg.solver.k, vo);
    const fs::path dir = prepare(out_dir);

    ojson j;
    j["command"] = "verify";
    j["system"] = system_json(sys);
    j["grid"] = grid_json(sys.grid());
    ojson tol;
    tol["energy_tol"] = vo.energy_tol;
    tol["overlap_tol"] = vo.overlap_tol;
    tol["boundary_tol"] = vo.boundary_tol;
    tol["solver_tol"] = vo.solver.solver_tol;
    j["tolerances"] = tol;
    ojson levels = ojson::array();
    double max_gap = 0.0;
    for (const LevelReport& lv : rep.levels) {
        ojson l;
        l["n"] = lv.n;
        l["analytic"] = lv.analytic;
        l["numeric"] = lv.numeric;
        l["relative_gap"] = lv.relative_gap;
        l["overlap"] = lv.overlap;
        l["residual"] = finite_or_null(lv.residual);
        l["solver_residual"] = lv.solver_residual;
        l["pass"] = lv.pass;
        levels.push_back(l);
        max_gap = std::max(max_gap, lv.relative_gap);
    }
    j["levels"] = levels;
    j["max_relative_gap"] = max_gap;
    j["all_pass"] = rep.all_pass;
    write_text(dir / "verify.json", dump(j));
    return rep.all_pass;
}

void cmd_solve(const RunConfig& cfg, const fs::path& out_dir) {
    const Grid1D grid = cfg.grid ? Grid1D(cfg.grid->x_lo, cfg.grid->x_hi, cfg.grid->n_points) : default_harmonic_grid();
    const SolveBlock& s = cfg.solve;
    const VonRoosParams params(s.a, s.b, s.c);
    const MassProfile mass = registry_mass(s.mass, grid.interval());
    const SmoothMap1D V = registry_potential(s.potential, grid.interval());

    std::vector<double> xs = grid.points();
    std::vector<double> v(grid.size());
    std::vector<double> veff(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        v[i] = V(xs[i]);
        veff[i] = veff_from_vonroos(V, mass, params, xs[i]);
    }
    if (cfg.solver.k > grid.size() - 2) throw DomainError("solve: k exceeds the number of interior grid points");
    const TridiagonalOperator T = discretize(mass, veff, grid);
    EigenOptions eo;
    eo.solver_tol = cfg.solver.solver_tol;
    eo.max_sweeps = cfg.solver.max_sweeps;
    const EigenSolution sol = eigs_lowest(T, cfg.solver.k, eo);
    const fs::path dir = prepare(out_dir);

    ojson j;
    j["command"] = "solve";
    j["mass"] = registry_json(s.mass);
    j["potential"] = registry_json(s.potential);
    ojson ord;
    ord["a"] = s.a;
    ord["b"] = s.b;
    ord["c"] = s.c;
    j["ordering"] = ord;
    j["grid"] = grid_json(grid);
    j["k"] = cfg.solver.k;
    j["values"] = sol.values;
    j["residuals"] = sol.residuals;
    write_text(dir / "spectrum.json", dump(j));

    std::vector<std::vector<double>> phi;
    if (cfg.output.eigenvectors) {
        for (const auto& vec : sol.vectors) phi.push_back(to_grid_function(grid, vec));
    }
    std::vector<CsvColumn> cols{{"x", xs}, {"V", v}, {"V_eff", veff}};
    for (std::size_t k = 0; k < phi.size(); ++k) cols.push_back({"phi_" + std::to_string(k), phi[k]});
    write_csv(dir / "spectrum.csv", cols);
}

int run_command(const std::string& command, const std::string& config_path, const std::string& out_dir,
                const CommandOptions& opts, std::ostream& err) {
    const auto report = [&](int code, const std::string& msg) {
        err << "pdmforge " << command << ": " << msg << '\n';
        return code;
    };
    try {
        const RunConfig cfg = load_config(config_path);
        if (command == "construct") {
            cmd_construct(cfg, out_dir);
        } else if (command == "perturb") {
            cmd_perturb(cfg, out_dir, opts);
        } else if (command == "verify") {
            if (!cmd_verify(cfg, out_dir)) return report(kExitVerifyFailed, "verification failed; see verify.json");
        } else if (command == "solve") {
            cmd_solve(cfg, out_dir);
        } else {
            return report(kExitConfig, "unknown command");
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        return report(kExitConfig, e.what());
    } catch (const UsageError& e) {
        return report(kExitConfig, e.what());
    } catch (const DomainError& e) {
        return report(kExitConfig, e.what());
    } catch (const ConstructionError& e) {
        return report(kExitConfig, e.what());
    } catch (const InconsistencyError& e) {
        return report(kExitInconsistency, std::string(e.what()) + " (level " + std::to_string(e.level()) + ")");
    } catch (const NodeProximityError& e) {
        return report(kExitNode, std::string(e.what()) + " (level " + std::to_string(e.level()) +
                                     "; pass --override-node-guard to mask node points)");
    } catch (const BoundaryLeakError& e) {
        return report(kExitBoundary, e.what());
    } catch (const DegenerateSupportError& e) {
        return report(kExitBoundary, e.what());
    } catch (const SolverError& e) {
        return report(kExitSolver, e.what());
    } catch (const QuadratureError& e) {
        return report(kExitSolver, e.what());
    } catch (const IoError& e) {
        return report(kExitIo, e.what());
    } catch (const fs::filesystem_error& e) {
        return report(kExitIo, e.what());
    } catch (const std::exception& e) {
        return report(kExitVerifyFailed, std::string("internal error: ") + e.what());
    }
}

} // namespace pdm::cli
