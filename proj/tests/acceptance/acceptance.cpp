// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "rubbernet/assembly.hpp"
#include "rubbernet/chain_models.hpp"
#include "rubbernet/delaunay.hpp"
#include "rubbernet/homogenize.hpp"
#include "rubbernet/lattice.hpp"
#include "rubbernet/mesh.hpp"
#include "rubbernet/predicates.hpp"
#include "rubbernet/volumetric.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace rubbernet;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

Mat mat2(double a, double b, double c, double d) {
    Mat m(2, 2);
    m << a, b, c, d;
    return m;
}

// Frozen oracle values.
constexpr double kSeriesAtOne = 8.256;
constexpr double kGrowthLo = 1.0;
constexpr double kGrowthHi = 2.0;
constexpr double kCEta = 1.0;
constexpr double kAnisotropyRatio = 2.0;

Outcome series_fidelity() {
    using boost::multiprecision::cpp_rational;
    const cpp_rational exact = cpp_rational(3) + cpp_rational(9, 5) + cpp_rational(297, 175) + cpp_rational(1539, 875);
    const bool rational_ok = exact == cpp_rational(7224, 875);
    const double err = std::abs(inv_langevin_series(1.0) - kSeriesAtOne);
    return {rational_ok && err <= 1e-12, fmt("rational %.0f, |double - 8.256| = %.3g", rational_ok ? 1 : 0, err)};
}

Outcome chain_calculus() {
    double worst = 0.0;
    for (double n : {1.0, 8.0, 25.0}) {
        ChainParams p;
        p.n = n;
        for (int i = 1; i <= 50; ++i) {
            const double r = 0.1 * i;
            const double e = 1e-5 * r;
            const double fd = (chain_energy(r + e, p) - chain_energy(r - e, p)) / (2 * e);
            worst = std::max(worst, std::abs(chain_energy_derivative(r, p) - fd) / std::abs(fd));
        }
    }
    double origin = 0.0;
    for (double n : {1.0, 8.0, 25.0}) {
        ChainParams p;
        p.n = n;
        p.k = 1.7;
        p.beta = 0.6;
        const double rho = 1e-3;
        const double r = rho * std::sqrt(n);
        const double expect = p.k / p.beta * std::sqrt(n) * inv_langevin_series(rho);
        origin = std::max(origin, std::abs(chain_energy_derivative(r, p) - expect));
    }
    return {worst <= 1e-6 && origin <= 1e-8, fmt("max FD rel err %.3g, near-origin err %.3g", worst, origin)};
}

Outcome growth() {
    ChainParams p;
    p.n = 1.0;
    const GrowthReport chain =
        check_growth_condition(PairPotential::langevin(p), {8.0, kGrowthLo, kGrowthHi}, 10.0, 4000);
    const VolumetricParams vp{1.0, 0.1};
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<Mat> samples{Mat::Zero(3, 3), identity(3), 0.1 * identity(3)};
    for (int k = 0; k < 20000; ++k) {
        Mat f(3, 3);
        const double s = std::exp(1.5 * g(rng));
        for (int i = 0; i < 9; ++i) {
            f(i / 3, i % 3) = s * g(rng);
        }
        samples.push_back(f);
    }
    const double c = w_vol_upper_growth_constant(samples, vp, 8.0);
    return {chain.holds && c <= kCEta,
            fmt("chain margin %.3g (c=%.0f, C=%.0f), volumetric sup ratio %.4g <= C_eta", chain.worst_margin,
                kGrowthLo, kGrowthHi, c)};
}

std::vector<double> jiggle(const Mesh& mesh, const Mat& f, double amp, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-amp, amp);
    const int d = mesh.dim();
    std::vector<double> pos(mesh.coords().size());
    for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
        Vec x(d);
        for (int c = 0; c < d; ++c) {
            x(c) = mesh.coords()[i * d + c];
        }
        const Vec y = f * x;
        for (int c = 0; c < d; ++c) {
            pos[i * d + c] = y(c) + u(rng) * mesh.h();
        }
    }
    return pos;
}

Mesh random_mesh(int dim, std::mt19937_64& rng, int k) {
    if (k % 2 == 0) {
        const int m = 1 + static_cast<int>(rng() % 3);
        return dim == 2 ? periodic_mesh_2d(m, k % 4 == 0 ? Diagonal::nw : Diagonal::ne) : periodic_mesh_3d(m);
    }
    StochasticLatticeSpec spec;
    spec.dim = dim;
    spec.r_min = 0.5;
    spec.seed = rng();
    const double h = dim == 2 ? 0.2 : 0.34;
    return delaunay_triangulate(rescale_and_clip(stochastic_lattice(spec, Box::cube(dim, 1.0 / h)), dim, h, Box::unit(dim)),
                                dim);
}

Outcome frame_invariance() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    int cases = 0;
    for (int dim : {2, 3}) {
        for (int k = 0; k < 20; ++k) {
            const Mesh mesh = random_mesh(dim, rng, k);
            EnergyModel model;
            if (k % 3 == 0) {
                model.pair = PairPotential::quadratic(1.0 + u(rng));
            }
            if (k % 2 == 1) {
                model.vol = VolumetricParams{1.0 + u(rng), k % 4 == 1 ? 0.1 : 0.0};
            }
            model.weight_mode = k % 5 == 0 ? WeightMode::element_volume : WeightMode::uniform;
            Mat f = identity(dim);
            for (int i = 0; i < dim * dim; ++i) {
                f(i / dim, i % dim) += 0.15 * (u(rng) - 0.5);
            }
            // Delaunay slivers flip under small noise; shrink it until every element is positive
            std::vector<double> pos;
            for (double amp = 0.05;; amp /= 2) {
                pos = jiggle(mesh, f, amp, rng);
                try {
                    total_energy(mesh, {pos}, model);
                    break;
                } catch (const InvertedElementError&) {
                }
            }
            const Mat r = rotation_from_uniform(dim, u(rng), u(rng), u(rng));
            Vec t(dim);
            for (int c = 0; c < dim; ++c) {
                t(c) = 10.0 * (u(rng) - 0.5);
            }
            std::vector<double> moved(pos.size());
            for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
                Vec x(dim);
                for (int c = 0; c < dim; ++c) {
                    x(c) = pos[i * dim + c];
                }
                const Vec y = r * x + t;
                for (int c = 0; c < dim; ++c) {
                    moved[i * dim + c] = y(c);
                }
            }
            const double e0 = total_energy(mesh, {pos}, model);
            const double e1 = total_energy(mesh, {moved}, model);
            worst = std::max(worst, std::abs(e1 - e0) / std::abs(e0));
            ++cases;
        }
    }
    return {worst <= 1e-10, fmt("%.0f cases, max rel deviation %.3g", cases, worst)};
}

Outcome assembly_gradient() {
    const Mesh mesh = periodic_mesh_3d(2);
    std::mt19937_64 rng(5);
    double worst = 0.0;
    for (int combo = 0; combo < 4; ++combo) {
        EnergyModel model;
        if (combo & 1) {
            model.pair = PairPotential::quadratic(1.3);
        }
        if (combo & 2) {
            model.vol = VolumetricParams{1.5, 0.0};
        }
        Mat f = identity(3);
        f(0, 1) = 0.1;
        f(2, 2) = 1.05;
        const std::vector<double> pos = jiggle(mesh, f, 0.05, rng);
        const Assembler a(mesh, model);
        std::vector<double> g(pos.size());
        a.energy_and_gradient(pos, g);
        double num = 0.0;
        double den = 0.0;
        for (std::size_t k = 0; k < pos.size(); ++k) {
            std::vector<double> p = pos;
            const double e = 1e-6;
            p[k] = pos[k] + e;
            const double fp = a.energy(p);
            p[k] = pos[k] - e;
            const double fm = a.energy(p);
            const double fd = (fp - fm) / (2 * e);
            num = std::max(num, std::abs(fd - g[k]));
            den = std::max(den, std::abs(g[k]));
        }
        worst = std::max(worst, num / den);
    }
    return {worst <= 1e-5, fmt("max FD rel err over 4 combos %.3g", worst)};
}

Outcome single_cell() {
    const std::vector<Mat> xis{mat2(1.1, 0.0, 0.0, 1.0), mat2(1.0, 0.2, 0.0, 1.0), mat2(1.05, 0.1, -0.05, 0.95)};
    EnergyModel springs;
    springs.pair = PairPotential::quadratic(1.0);
    double worst = 0.0;
    bool decreasing = true;
    std::string gaps;
    for (const Mat& xi : xis) {
        EstimateRequest req;
        req.xi = xi;
        req.model = springs;
        req.m_list = {2, 4, 8, 16};
        const HomogEstimate est = estimate_whom(req);
        const double oracle = single_cell_oracle_2d(xi, 1.0, 1.0);
        worst = std::max(worst, std::abs(est.per_h.back().value - oracle) / oracle);
        for (std::size_t i = 1; i < est.cauchy_gaps.size(); ++i) {
            decreasing = decreasing && est.cauchy_gaps[i] < est.cauchy_gaps[i - 1];
        }
        gaps += " [";
        for (std::size_t i = 0; i < est.cauchy_gaps.size(); ++i) {
            gaps += fmt(i ? " %.2g" : "%.2g", est.cauchy_gaps[i]);
        }
        gaps += "]";
    }
    return {worst <= 0.01 && decreasing,
            fmt("max rel err vs oracle at m=16 %.3g, gaps strictly decreasing %.0f;", worst, decreasing ? 1 : 0) +
                gaps};
}

Outcome anisotropy() {
    const Anisotropy a = anisotropy_counterexample(1.0, 1.0);
    const bool margin = a.stiffness_diag > a.stiffness_antidiag * (1.0 + 1e-4);
    const bool frozen = std::abs(a.ratio - kAnisotropyRatio) <= 1e-6;
    return {margin && frozen, fmt("diag %.10g, antidiag %.10g, ratio %.12g (frozen 2)", a.stiffness_diag,
                                  a.stiffness_antidiag, a.ratio)};
}

Outcome admissibility() {
    int passed = 0;
    int total = 0;
    for (int dim : {2, 3}) {
        StochasticLatticeSpec spec;
        spec.dim = dim;
        spec.intensity = 1.0;
        spec.r_min = 0.5;
        const Box box = Box::cube(dim, dim == 2 ? 10.0 : 5.0);
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            spec.seed = seed;
            const AdmissibilityReport r =
                check_admissibility(stochastic_lattice(spec, box), dim, box, spec.r_min, spec.covering_radius());
            passed += r.separation_ok && r.covering_ok;
            ++total;
        }
    }
    int empty = 0;
    int clouds = 0;
    for (int dim : {2, 3}) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            std::mt19937_64 rng(seed + 1000 * static_cast<std::uint64_t>(dim));
            std::uniform_real_distribution<double> u(0.0, 1.0);
            std::vector<double> pts(50 * static_cast<std::size_t>(dim));
            for (double& x : pts) {
                x = u(rng);
            }
            const Triangulation t = delaunay(dim, pts);
            bool ok = t.size() > 0;
            for (std::size_t s = 0; ok && s < t.size(); ++s) {
                std::vector<const double*> simplex;
                for (int k = 0; k <= dim; ++k) {
                    simplex.push_back(pts.data() + t.simplices[s * (dim + 1) + k] * dim);
                }
                ok = predicates::orient(dim, simplex) > 0;
                for (std::size_t q = 0; ok && q < 50; ++q) {
                    ok = predicates::insphere(dim, simplex, pts.data() + q * dim) <= 0;
                }
            }
            empty += ok;
            ++clouds;
        }
    }
    return {passed == total && empty == clouds,
            fmt("lattices admissible %.0f/%.0f, empty-circumsphere clouds %.0f/%.0f", passed, total, empty, clouds)};
}

EstimateRequest stats_request(int n, std::uint64_t seed) {
    EstimateRequest req;
    req.xi = mat2(1.1, 0.05, 0.0, 0.95);
    req.model.pair = PairPotential::quadratic(1.0);
    req.kind = MeshKind::stochastic;
    req.h_list = {1.0 / 4.0, 1.0 / 8.0};
    req.lattice.intensity = 1.0;
    req.lattice.r_min = 0.5;
    req.n_realizations = n;
    req.seed = seed;
    req.jobs = 0;
    return req;
}

Outcome statistics() {
    constexpr int batches = 20;
    const std::vector<int> ns{2, 4, 8};
    // pooled within-batch variance over every batch of every n
    std::vector<std::vector<double>> s2(ns.size());
    std::vector<std::vector<double>> se(ns.size());
    double pooled_num = 0.0;
    double pooled_den = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        for (int b = 0; b < batches; ++b) {
            const HomogEstimate est = estimate_whom(stats_request(ns[i], 1000 * ns[i] + b));
            const RealizationStats& st = est.per_h.back().stats;
            const double var = st.stderr_ * st.stderr_ * ns[i];
            s2[i].push_back(var);
            se[i].push_back(st.stderr_);
            pooled_num += var * (ns[i] - 1);
            pooled_den += ns[i] - 1;
        }
    }
    const double sigma2 = pooled_num / pooled_den;
    bool consistent = true;
    bool shrinking = true;
    std::string detail = fmt("pooled sd %.3g;", std::sqrt(sigma2));
    double prev_se = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ns.size(); ++i) {
        double mean_s2 = 0.0;
        double mean_se = 0.0;
        for (int b = 0; b < batches; ++b) {
            mean_s2 += s2[i][b] / batches;
            mean_se += se[i][b] / batches;
        }
        // sampling sd of the batch-averaged variance estimate (normal data)
        const double tol = 3.0 * sigma2 * std::sqrt(2.0 / ((ns[i] - 1) * batches));
        consistent = consistent && std::abs(mean_s2 - sigma2) <= tol;
        shrinking = shrinking && mean_se < prev_se;
        prev_se = mean_se;
        detail += fmt(" n=%.0f: mean stderr %.3g, stderr*sqrt(n) %.3g, var dev %.2g sigma;", ns[i], mean_se,
                      std::sqrt(mean_s2), std::abs(mean_s2 - sigma2) / (tol / 3.0));
    }
    const HomogEstimate a = estimate_whom(stats_request(4, 77));
    EstimateRequest serial = stats_request(4, 77);
    serial.jobs = 1;
    const HomogEstimate b = estimate_whom(serial);
    const bool deterministic = a.per_h.back().value == b.per_h.back().value &&
                               a.per_h.back().stats.stderr_ == b.per_h.back().stats.stderr_ &&
                               a.per_h.back().seeds == b.per_h.back().seeds;
    detail += fmt(" deterministic %.0f", deterministic ? 1 : 0);
    return {consistent && shrinking && deterministic, detail};
}

Outcome isotropy() {
    const Mat xi = mat2(1.1, 0.0, 0.0, 1.0);
    EnergyModel springs;
    springs.pair = PairPotential::quadratic(1.0);
    CellProblem periodic;
    periodic.model = springs;
    periodic.source = PeriodicSource{16, Diagonal::nw};
    CellProblem stochastic;
    stochastic.model = springs;
    StochasticSource src;
    src.lattice.intensity = 1.0;
    src.lattice.r_min = 0.5;
    src.h = 1.0 / 16.0;
    stochastic.source = src;
    stochastic.xi = xi;
    periodic.xi = xi;
    const std::size_t periodic_elements = build_cell_mesh(periodic).element_count();
    stochastic.seed = realization_seed(7, 0);
    const std::size_t stochastic_elements = build_cell_mesh(stochastic).element_count();
    const double dp = isotropy_probe(cell_estimator(periodic), xi, 8, 3);
    const double ds = isotropy_probe(cell_estimator(stochastic, 4, 7, 0), xi, 8, 3);
    const double ratio = dp / ds;
    return {ratio >= 3.0,
            fmt("periodic %.4g (%.0f elements), ", dp, static_cast<double>(periodic_elements)) +
                fmt("stochastic %.4g (%.0f elements), contrast %.3g", ds, static_cast<double>(stochastic_elements),
                    ratio)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"series fidelity", series_fidelity},
        {"chain-energy calculus", chain_calculus},
        {"growth condition", growth},
        {"frame invariance", frame_invariance},
        {"assembly gradient", assembly_gradient},
        {"single-cell oracle agreement", single_cell},
        {"anisotropy counterexample", anisotropy},
        {"stochastic lattice admissibility", admissibility},
        {"stochastic homogenization statistics", statistics},
        {"isotropy contrast", isotropy},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %zu %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(),
                    secs);
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
