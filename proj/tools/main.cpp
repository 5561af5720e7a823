// rubbernet: command-line front end.
//
//   rubbernet <mesh|minimize|homogenize|counterexample|lattice-check>
//             [--config FILE] [--out DIR] [--jobs N] [--seed S]
//
// Exit codes: 0 success (including honest non-convergence), 2 config error,
// 3 infeasible lattice spec, 4 solver or sweep failure.

#include "rubbernet/config.hpp"
#include "rubbernet/delaunay.hpp"
#include "rubbernet/homogenize.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rubbernet;

namespace {

enum Exit { ok = 0, config_error = 2, infeasible = 3, failure = 4 };

class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

json matrix_json(const Mat& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(row);
    }
    return rows;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    out << j.dump(2) << '\n';
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
}

json admissibility_json(const AdmissibilityReport& r, double r_claim, double R_claim) {
    return {{"r_claim", r_claim},
            {"R_claim", R_claim},
            {"measured_r", r.measured_r},
            {"measured_R", r.measured_R},
            {"separation_ok", r.separation_ok},
            {"covering_ok", r.covering_ok},
            {"delaunay_quality", r.delaunay_quality},
            {"delaunay_regular", r.delaunay_regular},
            {"delaunay_assessed", r.delaunay_assessed}};
}

int cmd_mesh(const RunConfig& cfg, const fs::path& out) {
    const Mesh mesh = build_config_mesh(cfg);
    write_mesh_file((out / "mesh.txt").string(), mesh);
    std::cout.precision(17);
    std::cout << "h " << mesh.h() << "\nelements " << mesh.element_count() << '\n';
    if (cfg.mesh.kind == MeshKind::stochastic) {
        StochasticLatticeSpec spec = cfg.mesh.lattice;
        spec.seed = cfg.seed;
        const Box box = Box::cube(cfg.mesh.dim, 1.0 / cfg.mesh.h);
        const std::vector<double> raw = stochastic_lattice(spec, box);
        AdmissibilityReport report = check_admissibility(raw, spec.dim, box, spec.r_min, spec.covering_radius());
        assess_delaunay_quality(mesh, Box::unit(cfg.mesh.dim), cfg.lattice_check.max_radius_edge, report);
        write_json(out / "admissibility.json", admissibility_json(report, spec.r_min, spec.covering_radius()));
    }
    return ok;
}

int cmd_minimize(const RunConfig& cfg, const fs::path& out) {
    const Mesh mesh = build_config_mesh(cfg);
    BoundaryCondition bc = cfg.bc;
    bc.depth = config_layer_depth(cfg, mesh);
    FixedDofs fixed;
    try {
        fixed = apply_bc(mesh, bc);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    MinimizeResult result;
    try {
        result = minimize(mesh, cfg.model, fixed, affine_init(mesh, cfg.bc.xi), cfg.solver);
    } catch (const std::exception& e) {
        throw SolverFailure(e.what());
    }
    const json j = {{"energy", result.energy},
                    {"grad_norm", result.grad_norm},
                    {"grad_tol", result.grad_tol},
                    {"iterations", result.iterations},
                    {"converged", result.converged},
                    {"elements", mesh.element_count()},
                    {"free_dofs", fixed.free_count()}};
    write_json(out / "result.json", j);
    std::cout << j.dump(2) << '\n';
    if (cfg.write_deformed) {
        std::ofstream f(out / "deformed.txt");
        f.precision(17);
        const auto d = static_cast<std::size_t>(mesh.dim());
        f << mesh.dim() << ' ' << mesh.vertex_count() << ' ' << mesh.element_count() << '\n';
        for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
            for (std::size_t c = 0; c < d; ++c) {
                f << (c ? " " : "") << result.state.positions[i * d + c];
            }
            f << '\n';
        }
        for (std::size_t e = 0; e < mesh.element_count(); ++e) {
            const auto el = mesh.element(e);
            for (std::size_t k = 0; k < el.size(); ++k) {
                f << (k ? " " : "") << el[k];
            }
            f << '\n';
        }
    }
    return ok;
}

EstimateRequest make_request(const RunConfig& cfg, const Mat& xi) {
    const HomogenizeSpec& h = cfg.homogenize;
    EstimateRequest req;
    req.xi = xi;
    req.model = cfg.model;
    req.kind = cfg.mesh.kind;
    req.diagonal = cfg.mesh.diagonal;
    req.m_list = h.m_list;
    req.h_list = h.h_list;
    req.lattice = cfg.mesh.lattice;
    req.n_realizations = cfg.mesh.kind == MeshKind::periodic ? 1 : h.n_realizations;
    req.seed = cfg.seed;
    req.restarts = h.restarts;
    req.settings = cfg.solver;
    if (!cfg.rel_grad_tol_set) {
        req.settings.rel_grad_tol = cell_settings().rel_grad_tol;
    }
    req.jobs = cfg.jobs;
    return req;
}

int cmd_homogenize(const RunConfig& cfg, const fs::path& out) {
    const HomogenizeSpec& h = cfg.homogenize;
    if (h.xi_list.empty()) {
        throw ConfigError("config.homogenize.xi_list: at least one macro gradient is required");
    }
    std::vector<EstimateRequest> requests;
    std::vector<CellProblem> problems;
    for (const Mat& xi : h.xi_list) {
        EstimateRequest req = make_request(cfg, xi);
        try {
            req.validate();
        } catch (const InfeasibleLatticeError&) {
            throw;
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        for (CellProblem& p : req.cell_problems()) {
            problems.push_back(std::move(p));
        }
        requests.push_back(std::move(req));
    }

    const std::vector<CellOutcome> all = run_cells(problems, cfg.jobs);
    std::vector<std::vector<CellOutcome>> outcomes;
    std::size_t next = 0;
    std::size_t succeeded = 0;
    for (const EstimateRequest& req : requests) {
        const std::size_t n = req.cell_problems().size();
        outcomes.emplace_back(all.begin() + static_cast<std::ptrdiff_t>(next),
                              all.begin() + static_cast<std::ptrdiff_t>(next + n));
        next += n;
        for (const CellOutcome& o : outcomes.back()) {
            succeeded += o.ok ? 1 : 0;
        }
    }
    {
        std::ofstream csv(out / "cells.csv");
        write_cells_csv(csv, requests, outcomes);
    }

    json summary = json::array();
    for (std::size_t id = 0; id < requests.size(); ++id) {
        const EstimateRequest& req = requests[id];
        json entry = {{"xi_id", id}, {"xi", matrix_json(req.xi)}};
        try {
            const HomogEstimate est = aggregate_estimate(req, outcomes[id]);
            json per_h = json::array();
            for (const ScaleEstimate& s : est.per_h) {
                json row = {{"h", s.h},
                            {"value", s.value},
                            {"mean", s.stats.mean},
                            {"stderr", s.stats.stderr_},
                            {"n", s.stats.n},
                            {"grad_norm", s.grad_norm}};
                if (req.kind == MeshKind::periodic) {
                    row["m"] = s.m;
                }
                per_h.push_back(row);
            }
            entry["status"] = "ok";
            entry["per_h"] = per_h;
            entry["cauchy_gaps"] = est.cauchy_gaps;
            if (!est.minimizer_l2_gaps.empty()) {
                entry["minimizer_l2_gaps"] = est.minimizer_l2_gaps;
            }
            entry["extrapolated"] = est.extrapolated;
            entry["richardson"] = est.richardson;
            if (h.probe_rotations > 0) {
                const std::vector<CellProblem> cells = req.cell_problems();
                CellProblem finest = cells.back();
                const int n = req.kind == MeshKind::periodic ? 1 : req.n_realizations;
                const Estimator est_fn = cell_estimator(finest, n, req.seed, cfg.jobs);
                entry["frame_invariance_deviation"] =
                    frame_invariance_probe(est_fn, req.xi, h.probe_rotations, req.seed);
                entry["isotropy_deviation"] = isotropy_probe(est_fn, req.xi, h.probe_rotations, req.seed);
            }
        } catch (const std::exception& e) {
            entry["status"] = "failed";
            entry["error"] = e.what();
        }
        summary.push_back(entry);
    }
    write_json(out / "summary.json", json{{"estimates", summary}});
    std::cout << "cells " << all.size() << ", succeeded " << succeeded << '\n';
    if (succeeded == 0) {
        throw SolverFailure("every cell problem failed");
    }
    return ok;
}

int cmd_counterexample(const RunConfig& cfg, const fs::path& out) {
    const CounterexampleSpec& c = cfg.counterexample;
    Anisotropy a;
    try {
        a = anisotropy_counterexample(c.stiffness, c.f, c.m, c.diagonal);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const json j = {{"stiffness_diag", a.stiffness_diag},
                    {"stiffness_antidiag", a.stiffness_antidiag},
                    {"ratio", a.ratio},
                    {"diagonal", c.diagonal == Diagonal::nw ? "nw" : "ne"}};
    write_json(out / "counterexample.json", j);
    std::cout << j.dump(2) << '\n';
    return ok;
}

int cmd_lattice_check(const RunConfig& cfg, const fs::path& out) {
    StochasticLatticeSpec spec = cfg.mesh.lattice;
    spec.seed = cfg.seed;
    const Box box = Box::cube(spec.dim, cfg.lattice_check.box_side);
    const std::vector<double> points = stochastic_lattice(spec, box);
    AdmissibilityReport report = check_admissibility(points, spec.dim, box, spec.r_min, spec.covering_radius());
    // quality of the triangulation of the points rescaled into the unit cube
    const double scale = 1.0 / cfg.lattice_check.box_side;
    const std::vector<double> unit = rescale_and_clip(points, spec.dim, scale, Box::unit(spec.dim));
    assess_delaunay_quality(delaunay_triangulate(unit, spec.dim), Box::unit(spec.dim), cfg.lattice_check.max_radius_edge,
                            report);
    json j = admissibility_json(report, spec.r_min, spec.covering_radius());
    j["points"] = points.size() / static_cast<std::size_t>(spec.dim);
    write_json(out / "lattice_check.json", j);
    std::cout << j.dump(2) << '\n';
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete polymer-network elasticity and homogenization"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir;
    std::optional<unsigned> jobs;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (overrides the config)");
    app.add_option("--jobs", jobs, "worker threads for sweeps (0 = all cores)");
    app.add_option("--seed", seed, "random seed (overrides the config)");
    app.fallthrough();

    using Command = int (*)(const RunConfig&, const fs::path&);
    const std::vector<std::tuple<std::string, std::string, Command>> table = {
        {"mesh", "write a mesh and, for stochastic meshes, its admissibility report", cmd_mesh},
        {"minimize", "minimize the energy under the configured boundary condition", cmd_minimize},
        {"homogenize", "cell-problem sweep over macro gradients and scales", cmd_homogenize},
        {"counterexample", "directional stiffnesses of the periodic 2D lattice", cmd_counterexample},
        {"lattice-check", "admissibility of a stochastic lattice", cmd_lattice_check},
    };
    std::vector<CLI::App*> subs;
    for (const auto& [name, help, fn] : table) {
        subs.push_back(app.add_subcommand(name, help));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        RunConfig cfg = config_path.empty() ? parse_config("{}") : load_config(config_path);
        if (seed) {
            cfg.seed = *seed;
            cfg.mesh.lattice.seed = *seed;
        }
        if (jobs) {
            cfg.jobs = *jobs;
        }
        if (!out_dir.empty()) {
            cfg.output = out_dir;
        }
        const fs::path out(cfg.output);
        fs::create_directories(out);
        for (std::size_t i = 0; i < subs.size(); ++i) {
            if (subs[i]->parsed()) {
                return std::get<2>(table[i])(cfg, out);
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const InfeasibleLatticeError& e) {
        std::cerr << "infeasible lattice: " << e.what() << '\n';
        return infeasible;
    } catch (const SolverFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return failure;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return failure;
    }
    return failure;
}
