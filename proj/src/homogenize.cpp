#include "rubbernet/homogenize.hpp"

#include "rubbernet/delaunay.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace rubbernet {

namespace {

double uniform_pm1(std::mt19937_64& rng) { return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0; }

void check_xi(const Mat& xi) {
    if (xi.rows() != xi.cols() || (xi.rows() != 2 && xi.rows() != 3) || !xi.allFinite()) {
        throw std::invalid_argument("macro gradient must be a finite 2x2 or 3x3 matrix");
    }
}

}  // namespace

void CellProblem::validate() const {
    check_xi(xi);
    model.validate();
    if (model.vol && !(det(xi) > model.vol->eta)) {
        throw std::invalid_argument("cell problem: det(xi) must exceed eta when the volumetric term is active");
    }
    if (const auto* p = std::get_if<PeriodicSource>(&source)) {
        if (p->m < 1) {
            throw std::invalid_argument("cell problem: periodic m must be >= 1");
        }
    } else {
        const auto& s = std::get<StochasticSource>(source);
        if (s.lattice.dim != dim()) {
            throw std::invalid_argument("cell problem: lattice dimension differs from xi");
        }
        if (!(s.h > 0.0) || !(s.h <= 1.0)) {
            throw std::invalid_argument("cell problem: stochastic h must lie in (0, 1]");
        }
        s.lattice.validate();
    }
    if (layer_depth && !(*layer_depth >= 0.0)) {
        throw std::invalid_argument("cell problem: layer depth must be >= 0");
    }
    if (restarts < 1 || !(restart_noise >= 0.0)) {
        throw std::invalid_argument("cell problem: need restarts >= 1 and restart_noise >= 0");
    }
    settings.validate();
}

Mesh build_cell_mesh(const CellProblem& problem) {
    if (const auto* p = std::get_if<PeriodicSource>(&problem.source)) {
        return problem.dim() == 2 ? periodic_mesh_2d(p->m, p->diagonal) : periodic_mesh_3d(p->m);
    }
    const auto& s = std::get<StochasticSource>(problem.source);
    const int dim = problem.dim();
    const std::vector<double> raw = stochastic_lattice(s.lattice, Box::cube(dim, 1.0 / s.h));
    const std::vector<double> points = rescale_and_clip(raw, dim, s.h, Box::unit(dim));
    return delaunay_triangulate(points, dim);
}

double cell_layer_depth(const CellProblem& problem) {
    if (problem.layer_depth) {
        return *problem.layer_depth;
    }
    if (const auto* p = std::get_if<PeriodicSource>(&problem.source)) {
        const double n_el = problem.dim() == 2 ? 2.0 * p->m * p->m : 6.0 * p->m * p->m * p->m;
        return 2.0 * std::pow(1.0 / n_el, 1.0 / problem.dim());
    }
    const auto& s = std::get<StochasticSource>(problem.source);
    return 2.0 * s.h * s.lattice.covering_radius();
}

CellResult solve_cell(const CellProblem& problem) {
    problem.validate();
    const Mesh mesh = build_cell_mesh(problem);
    const int dim = mesh.dim();
    const auto d = static_cast<std::size_t>(dim);

    const DeformationState affine = affine_init(mesh, problem.xi);
    FixedDofs bc;
    bc.fixed.assign(affine.positions.size(), 0);
    bc.values = affine.positions;
    for (int i : boundary_layer(mesh, cell_layer_depth(problem))) {
        for (std::size_t c = 0; c < d; ++c) {
            bc.fixed[static_cast<std::size_t>(i) * d + c] = 1;
        }
    }

    CellResult out;
    out.h = std::holds_alternative<PeriodicSource>(problem.source) ? mesh.h()
                                                                   : std::get<StochasticSource>(problem.source).h;
    out.elements = mesh.element_count();
    out.free_vertices = bc.free_count() / d;

    if (out.free_vertices == 0) {
        if (problem.require_interior) {
            throw std::invalid_argument("cell problem: the boundary layer covers every vertex (h too large)");
        }
        out.value = Assembler(mesh, problem.model).energy(affine.positions);
        out.converged = true;
        out.positions = affine.positions;
        return out;
    }

    std::optional<MinimizeResult> best;
    std::exception_ptr first_error;
    for (int run = 0; run < problem.restarts; ++run) {
        DeformationState init = affine;
        if (run > 0) {
            std::mt19937_64 rng(mix_seed(problem.seed, static_cast<std::uint64_t>(run)));
            const double amplitude = problem.restart_noise * mesh.h();
            for (std::size_t k = 0; k < init.positions.size(); ++k) {
                const double u = uniform_pm1(rng);
                if (bc.fixed[k] == 0) {
                    init.positions[k] += amplitude * u;
                }
            }
        }
        try {
            MinimizeResult r = minimize(mesh, problem.model, bc, init, problem.settings);
            if (!best || r.energy < best->energy) {
                best = std::move(r);
            }
        } catch (const std::exception&) {
            if (run == 0) {
                first_error = std::current_exception();
            }
        }
    }
    if (!best) {
        std::rethrow_exception(first_error);
    }
    out.value = best->energy;
    out.grad_norm = best->grad_norm;
    out.iterations = best->iterations;
    out.converged = best->converged;
    out.positions = std::move(best->state.positions);
    return out;
}

double cell_energy_density(const CellProblem& problem) { return solve_cell(problem).value; }

double interpolated_l2_distance(const Mesh& coarse, std::span<const double> coarse_positions, const Mesh& fine,
                                std::span<const double> fine_positions) {
    const int dim = fine.dim();
    const auto d = static_cast<std::size_t>(dim);
    if (coarse.dim() != dim || coarse_positions.size() != coarse.coords().size() ||
        fine_positions.size() != fine.coords().size()) {
        throw std::invalid_argument("interpolated_l2_distance: mesh and position sizes do not match");
    }
    // bucket the coarse elements by bounding box over the unit cube
    const std::size_t res = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(1.0 / coarse.h())));
    const auto cell_of = [&](double x) {
        return std::min(res - 1, static_cast<std::size_t>(std::max(0.0, x) * static_cast<double>(res)));
    };
    std::size_t cells = 1;
    for (int c = 0; c < dim; ++c) {
        cells *= res;
    }
    std::vector<std::vector<std::size_t>> buckets(cells);
    std::vector<Mat> inv(coarse.element_count());
    for (std::size_t e = 0; e < coarse.element_count(); ++e) {
        const auto el = coarse.element(e);
        inv[e] = inverse(edge_matrix(dim, el, coarse.coords()));
        std::size_t lo[3] = {res, res, res};
        std::size_t hi[3] = {0, 0, 0};
        for (int v : el) {
            for (std::size_t c = 0; c < d; ++c) {
                const std::size_t k = cell_of(coarse.coords()[static_cast<std::size_t>(v) * d + c]);
                lo[c] = std::min(lo[c], k);
                hi[c] = std::max(hi[c], k);
            }
        }
        for (std::size_t i = lo[0]; i <= hi[0]; ++i) {
            for (std::size_t j = lo[1]; j <= hi[1]; ++j) {
                for (std::size_t k = (d == 3 ? lo[2] : 0); k <= (d == 3 ? hi[2] : 0); ++k) {
                    buckets[(i * res + j) * (d == 3 ? res : 1) + k].push_back(e);
                }
            }
        }
    }

    // nodal difference on the fine mesh
    std::vector<double> diff(fine_positions.size());
    for (std::size_t v = 0; v < fine.vertex_count(); ++v) {
        const Vec x = fine.vertex(v);
        std::size_t b = 0;
        for (std::size_t c = 0; c < d; ++c) {
            b = b * res + cell_of(x(static_cast<int>(c)));
        }
        bool found = false;
        for (std::size_t e : buckets[b]) {
            const auto el = coarse.element(e);
            const Vec lambda = inv[e] * (x - coarse.vertex(static_cast<std::size_t>(el[0])));
            const double l0 = 1.0 - lambda.sum();
            if (lambda.minCoeff() < -1e-10 || l0 < -1e-10) {
                continue;
            }
            for (std::size_t c = 0; c < d; ++c) {
                double u = l0 * coarse_positions[static_cast<std::size_t>(el[0]) * d + c];
                for (std::size_t k = 0; k < d; ++k) {
                    u += lambda(static_cast<int>(k)) * coarse_positions[static_cast<std::size_t>(el[k + 1]) * d + c];
                }
                diff[v * d + c] = fine_positions[v * d + c] - u;
            }
            found = true;
            break;
        }
        if (!found) {
            throw std::invalid_argument("interpolated_l2_distance: fine vertex outside the coarse mesh");
        }
    }

    // exact P1 mass: int u^2 = vol / ((d+1)(d+2)) (sum u_i^2 + (sum u_i)^2)
    double total = 0.0;
    for (std::size_t e = 0; e < fine.element_count(); ++e) {
        const auto el = fine.element(e);
        const double vol = std::abs(fine.element_volume(e));
        double acc = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            double sq = 0.0;
            double sum = 0.0;
            for (int v : el) {
                const double u = diff[static_cast<std::size_t>(v) * d + c];
                sq += u * u;
                sum += u;
            }
            acc += sq + sum * sum;
        }
        total += vol * acc / static_cast<double>((d + 1) * (d + 2));
    }
    return std::sqrt(total);
}

double single_cell_oracle_2d(const Mat& xi, double stiffness, double f, int cell_m, Diagonal diagonal) {
    if (xi.rows() != 2 || xi.cols() != 2 || !xi.allFinite()) {
        throw std::invalid_argument("single_cell_oracle_2d: xi must be a finite 2x2 matrix");
    }
    if (!(stiffness > 0.0) || !(f > 0.0) || cell_m < 1) {
        throw std::invalid_argument("single_cell_oracle_2d: need stiffness > 0, f > 0, cell_m >= 1");
    }
    struct Edge {
        int p, q;
        double dx, dy;
    };
    const int n = cell_m * cell_m;
    auto node = [cell_m](int i, int j) { return (i % cell_m) + cell_m * (j % cell_m); };
    std::vector<Edge> edges;
    for (int j = 0; j < cell_m; ++j) {
        for (int i = 0; i < cell_m; ++i) {
            const int a = node(i, j);
            const int b = node(i + 1, j);
            const int c = node(i + 1, j + 1);
            const int dd = node(i, j + 1);
            if (diagonal == Diagonal::nw) {
                edges.insert(edges.end(), {{a, b, 1, 0}, {a, dd, 0, 1}, {b, dd, -1, 1},
                                           {b, c, 0, 1}, {dd, c, 1, 0}, {b, dd, -1, 1}});
            } else {
                edges.insert(edges.end(), {{a, b, 1, 0}, {b, c, 0, 1}, {a, c, 1, 1},
                                           {a, c, 1, 1}, {dd, c, 1, 0}, {a, dd, 0, 1}});
            }
        }
    }
    // E(u) = w sum_e |xi d_e + u_q - u_p|^2 / |d_e|^2 with w = f K / N_el;
    // the two components decouple into graph-Laplacian systems.
    const double w = f * stiffness / (2.0 * n);
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, 2);
    for (const Edge& e : edges) {
        const double c = 1.0 / (e.dx * e.dx + e.dy * e.dy);
        const Eigen::Vector2d jump = xi * Eigen::Vector2d(e.dx, e.dy);
        if (e.p == e.q) {
            continue;
        }
        lap(e.p, e.p) += c;
        lap(e.q, e.q) += c;
        lap(e.p, e.q) -= c;
        lap(e.q, e.p) -= c;
        rhs.row(e.p) += c * jump.transpose();
        rhs.row(e.q) -= c * jump.transpose();
    }
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, 2);
    if (n > 1) {
        const Eigen::MatrixXd reduced = lap.bottomRightCorner(n - 1, n - 1);
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(reduced);
        const double scale = reduced.diagonal().maxCoeff();
        if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 1e-12 * scale)) {
            throw std::runtime_error("single_cell_oracle_2d: singular cell system");
        }
        u.bottomRows(n - 1) = ldlt.solve(rhs.bottomRows(n - 1));
    }
    double energy = 0.0;
    for (const Edge& e : edges) {
        const double c = 1.0 / (e.dx * e.dx + e.dy * e.dy);
        const Eigen::Vector2d v = xi * Eigen::Vector2d(e.dx, e.dy) + (u.row(e.q) - u.row(e.p)).transpose();
        energy += c * v.squaredNorm();
    }
    return w * energy;
}

void EstimateRequest::validate() const {
    check_xi(xi);
    model.validate();
    if (kind == MeshKind::periodic) {
        if (m_list.size() < 2) {
            throw std::invalid_argument("estimate: need at least two periodic scales");
        }
        for (int m : m_list) {
            if (m < 1) {
                throw std::invalid_argument("estimate: periodic m must be >= 1");
            }
        }
    } else {
        if (h_list.size() < 2) {
            throw std::invalid_argument("estimate: need at least two stochastic scales");
        }
        if (lattice.dim != xi.rows()) {
            throw std::invalid_argument("estimate: lattice dimension differs from xi");
        }
        lattice.validate();
    }
    if (n_realizations < 1 || restarts < 1) {
        throw std::invalid_argument("estimate: need n_realizations >= 1 and restarts >= 1");
    }
    settings.validate();
}

std::uint64_t realization_seed(std::uint64_t seed, int k) { return mix_seed(seed, static_cast<std::uint64_t>(k)); }

std::vector<CellProblem> EstimateRequest::cell_problems() const {
    std::vector<CellProblem> out;
    auto base = [this] {
        CellProblem p;
        p.xi = xi;
        p.model = model;
        p.restarts = restarts;
        p.settings = settings;
        return p;
    };
    if (kind == MeshKind::periodic) {
        for (int m : m_list) {
            CellProblem p = base();
            p.source = PeriodicSource{m, diagonal};
            p.seed = seed;
            out.push_back(std::move(p));
        }
        return out;
    }
    for (double h : h_list) {
        for (int k = 0; k < n_realizations; ++k) {
            CellProblem p = base();
            StochasticSource s{lattice, h};
            s.lattice.seed = realization_seed(seed, k);
            p.seed = s.lattice.seed;
            p.source = s;
            out.push_back(std::move(p));
        }
    }
    return out;
}

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs == 0) {
        jobs = std::max(1u, std::thread::hardware_concurrency());
    }
    const auto workers = static_cast<unsigned>(std::min<std::size_t>(jobs, count));
    std::vector<std::exception_ptr> errors(count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

std::vector<CellOutcome> run_cells(std::span<const CellProblem> problems, unsigned jobs) {
    std::vector<CellOutcome> out(problems.size());
    parallel_for(problems.size(), jobs, [&](std::size_t i) {
        try {
            out[i].result = solve_cell(problems[i]);
            out[i].ok = true;
        } catch (const std::exception& e) {
            out[i].error = e.what();
        }
    });
    return out;
}

HomogEstimate aggregate_estimate(const EstimateRequest& request, std::span<const CellOutcome> outcomes) {
    const bool periodic = request.kind == MeshKind::periodic;
    const std::size_t scales = periodic ? request.m_list.size() : request.h_list.size();
    const std::size_t n = periodic ? 1 : static_cast<std::size_t>(request.n_realizations);
    if (outcomes.size() != scales * n) {
        throw std::invalid_argument("aggregate_estimate: outcome count does not match the request");
    }
    HomogEstimate est;
    est.xi = request.xi;
    for (std::size_t s = 0; s < scales; ++s) {
        ScaleEstimate se;
        se.m = periodic ? request.m_list[s] : 0;
        double sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const CellOutcome& o = outcomes[s * n + k];
            if (!o.ok) {
                std::ostringstream msg;
                msg << "cell problem failed at scale " << s << ", realization " << k << ": " << o.error;
                throw std::runtime_error(msg.str());
            }
            se.runs.push_back(o.result);
            se.seeds.push_back(periodic ? request.seed : realization_seed(request.seed, static_cast<int>(k)));
            se.grad_norm = std::max(se.grad_norm, o.result.grad_norm);
            sum += o.result.value;
        }
        se.h = periodic ? se.runs.front().h : request.h_list[s];
        se.stats.n = static_cast<int>(n);
        se.stats.mean = sum / static_cast<double>(n);
        if (n > 1) {
            double ss = 0.0;
            for (const CellResult& r : se.runs) {
                ss += (r.value - se.stats.mean) * (r.value - se.stats.mean);
            }
            se.stats.stderr_ = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
        }
        se.value = se.stats.mean;
        est.per_h.push_back(std::move(se));
    }
    for (std::size_t s = 1; s < scales; ++s) {
        est.cauchy_gaps.push_back(std::abs(est.per_h[s].value - est.per_h[s - 1].value));
    }
    if (periodic && scales > 1) {
        const std::vector<CellProblem> problems = request.cell_problems();
        for (std::size_t s = 1; s < scales; ++s) {
            const Mesh coarse = build_cell_mesh(problems[s - 1]);
            const Mesh fine = build_cell_mesh(problems[s]);
            est.minimizer_l2_gaps.push_back(interpolated_l2_distance(coarse, est.per_h[s - 1].runs.front().positions,
                                                                     fine, est.per_h[s].runs.front().positions));
        }
    }
    const ScaleEstimate& a = est.per_h[scales - 2];
    const ScaleEstimate& b = est.per_h[scales - 1];
    est.extrapolated = b.value;
    est.richardson = a.h != b.h ? b.value + (b.value - a.value) * b.h / (a.h - b.h) : b.value;
    return est;
}

HomogEstimate estimate_whom(const EstimateRequest& request) {
    request.validate();
    const std::vector<CellProblem> problems = request.cell_problems();
    return aggregate_estimate(request, run_cells(problems, request.jobs));
}

Estimator cell_estimator(CellProblem base, int realizations, std::uint64_t seed, unsigned jobs) {
    if (realizations < 1) {
        throw std::invalid_argument("cell_estimator: realizations must be >= 1");
    }
    if (std::holds_alternative<PeriodicSource>(base.source)) {
        realizations = 1;
    }
    return [base = std::move(base), realizations, seed, jobs](const Mat& xi) {
        std::vector<CellProblem> problems(static_cast<std::size_t>(realizations), base);
        for (int k = 0; k < realizations; ++k) {
            CellProblem& p = problems[static_cast<std::size_t>(k)];
            p.xi = xi;
            if (auto* s = std::get_if<StochasticSource>(&p.source)) {
                s->lattice.seed = realization_seed(seed, k);
                p.seed = s->lattice.seed;
            }
        }
        double sum = 0.0;
        for (const CellOutcome& o : run_cells(problems, jobs)) {
            if (!o.ok) {
                throw std::runtime_error("cell estimator: " + o.error);
            }
            sum += o.result.value;
        }
        return sum / static_cast<double>(realizations);
    };
}

double rotation_deviation(const Estimator& estimator, const Mat& xi, std::span<const Mat> rotations, bool left) {
    check_xi(xi);
    if (rotations.empty()) {
        return 0.0;
    }
    const double w0 = estimator(xi);
    const double scale = w0 != 0.0 ? std::abs(w0) : 1.0;
    double worst = 0.0;
    for (const Mat& r : rotations) {
        const double w = estimator(left ? Mat(r * xi) : Mat(xi * r));
        worst = std::max(worst, std::abs(w - w0) / scale);
    }
    return worst;
}

namespace {

std::vector<Mat> sample_rotations(int dim, int count, std::uint64_t seed) {
    RotationSampler sampler(dim, seed);
    std::vector<Mat> out;
    for (int i = 0; i < count; ++i) {
        out.push_back(sampler.next());
    }
    return out;
}

}  // namespace

double frame_invariance_probe(const Estimator& estimator, const Mat& xi, int rotation_count, std::uint64_t seed) {
    return rotation_deviation(estimator, xi, sample_rotations(static_cast<int>(xi.rows()), rotation_count, seed), true);
}

double isotropy_probe(const Estimator& estimator, const Mat& xi, int rotation_count, std::uint64_t seed) {
    return rotation_deviation(estimator, xi, sample_rotations(static_cast<int>(xi.rows()), rotation_count, seed), false);
}

Anisotropy anisotropy_counterexample(double stiffness, double f, int cell_m, Diagonal diagonal, double step) {
    if (!(step > 0.0)) {
        throw std::invalid_argument("anisotropy_counterexample: step must be > 0");
    }
    const double s = 1.0 / std::sqrt(2.0);
    auto directional = [&](const Eigen::Vector2d& d) {
        auto w = [&](double t) {
            const Mat xi = identity(2) + t * Mat(d * d.transpose());
            return single_cell_oracle_2d(xi, stiffness, f, cell_m, diagonal);
        };
        return (w(step) - 2.0 * w(0.0) + w(-step)) / (step * step);
    };
    Anisotropy out;
    out.stiffness_diag = directional(Eigen::Vector2d(-s, s));
    out.stiffness_antidiag = directional(Eigen::Vector2d(s, s));
    out.ratio = out.stiffness_diag / out.stiffness_antidiag;
    return out;
}

ConvexityReport rank_one_convexity_sample(const Estimator& estimator, const Mat& xi, const Vec& a, const Vec& b,
                                          std::vector<double> t_grid, double noise) {
    check_xi(xi);
    if (a.size() != xi.rows() || b.size() != xi.rows()) {
        throw std::invalid_argument("rank_one_convexity_sample: a and b must match xi");
    }
    if (a.norm() == 0.0 || b.norm() == 0.0) {
        throw std::invalid_argument("rank_one_convexity_sample: a and b must be nonzero");
    }
    std::sort(t_grid.begin(), t_grid.end());
    t_grid.erase(std::unique(t_grid.begin(), t_grid.end()), t_grid.end());
    ConvexityReport report;
    report.noise = noise;
    if (t_grid.size() < 3) {
        return report;
    }
    const Mat ab = a * b.transpose();
    std::vector<double> w;
    for (double t : t_grid) {
        w.push_back(estimator(xi + t * ab));
    }
    report.worst_violation = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < t_grid.size(); ++i) {
        const double lambda = (t_grid[i + 1] - t_grid[i]) / (t_grid[i + 1] - t_grid[i - 1]);
        const double v = w[i] - (lambda * w[i - 1] + (1.0 - lambda) * w[i + 1]);
        if (v > report.worst_violation) {
            report.worst_violation = v;
            report.worst_t = t_grid[i];
        }
        ++report.triples;
    }
    report.convex = report.worst_violation <= noise;
    return report;
}

void write_cells_csv(std::ostream& out, std::span<const EstimateRequest> requests,
                     std::span<const std::vector<CellOutcome>> outcomes) {
    if (requests.size() != outcomes.size()) {
        throw std::invalid_argument("write_cells_csv: one outcome list per request");
    }
    const int dim = requests.empty() ? 2 : static_cast<int>(requests.front().xi.rows());
    out << "xi_id";
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) {
            out << ",xi_" << r + 1 << c + 1;
        }
    }
    out << ",h,realization,value,grad_norm,iterations,converged,seed,status\n";
    const auto old_precision = out.precision(17);
    for (std::size_t id = 0; id < requests.size(); ++id) {
        const EstimateRequest& req = requests[id];
        if (req.xi.rows() != dim) {
            throw std::invalid_argument("write_cells_csv: all macro gradients must share one dimension");
        }
        const std::vector<CellProblem> problems = req.cell_problems();
        if (problems.size() != outcomes[id].size()) {
            throw std::invalid_argument("write_cells_csv: outcome count does not match the request");
        }
        const std::size_t n = req.kind == MeshKind::periodic ? 1 : static_cast<std::size_t>(req.n_realizations);
        for (std::size_t j = 0; j < problems.size(); ++j) {
            const CellOutcome& o = outcomes[id][j];
            out << id;
            for (int r = 0; r < dim; ++r) {
                for (int c = 0; c < dim; ++c) {
                    out << ',' << req.xi(r, c);
                }
            }
            const double h = req.kind == MeshKind::periodic ? (o.ok ? o.result.h : 0.0) : req.h_list[j / n];
            out << ',' << h << ',' << j % n << ',';
            if (o.ok) {
                out << o.result.value << ',' << o.result.grad_norm << ',' << o.result.iterations << ','
                    << (o.result.converged ? 1 : 0);
            } else {
                out << ",,,";
            }
            out << ',' << problems[j].seed << ',' << (o.ok ? "ok" : "failed") << '\n';
        }
    }
    out.precision(old_precision);
}

}  // namespace rubbernet
