#include "rubbernet/minimize.hpp"

#include "doctest.h"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <stdexcept>

using namespace rubbernet;

namespace {

struct Quadratic {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;

    double operator()(std::span<const double> x, std::span<double> g) const {
        const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
        const Eigen::VectorXd ax = a * v;
        for (std::size_t k = 0; k < g.size(); ++k) {
            g[k] = ax(static_cast<Eigen::Index>(k)) - b(static_cast<Eigen::Index>(k));
        }
        return 0.5 * v.dot(ax) - b.dot(v);
    }
};

Quadratic random_spd(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            m(i, j) = nd(rng);
        }
    }
    Quadratic q;
    q.a = m * m.transpose() + n * Eigen::MatrixXd::Identity(n, n);
    q.b = Eigen::VectorXd(n);
    for (int i = 0; i < n; ++i) {
        q.b(i) = nd(rng);
    }
    return q;
}

}  // namespace

TEST_CASE("strictly convex quadratic matches the linear solve") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const Quadratic q = random_spd(30, seed);
        const Eigen::VectorXd exact = q.a.ldlt().solve(q.b);
        MinimizeSettings s;
        s.grad_tol = 5e-8;
        const MinimizeResult r = minimize(q, std::vector<double>(30, 5.0), {}, s);
        CHECK(r.converged);
        double err = 0.0;
        for (int i = 0; i < 30; ++i) {
            err = std::max(err, std::abs(r.state.positions[static_cast<std::size_t>(i)] - exact(i)));
        }
        CHECK(err < 1e-8);
        for (std::size_t k = 1; k < r.energy_history.size(); ++k) {
            CHECK(r.energy_history[k] <= r.energy_history[k - 1]);
        }
    }
}

TEST_CASE("Rosenbrock") {
    const Objective rosen = [](std::span<const double> x, std::span<double> g) {
        const double a = 1.0 - x[0];
        const double b = x[1] - x[0] * x[0];
        g[0] = -2.0 * a - 400.0 * x[0] * b;
        g[1] = 200.0 * b;
        return a * a + 100.0 * b * b;
    };
    MinimizeSettings s;
    s.grad_tol = 1e-9;
    const MinimizeResult r = minimize(rosen, {-1.2, 1.0}, {}, s);
    CHECK(r.converged);
    CHECK(r.state.positions[0] == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(r.state.positions[1] == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("fixed entries are not moved") {
    const Quadratic q = random_spd(6, 7);
    const std::vector<char> fixed{1, 0, 0, 1, 0, 0};
    const MinimizeResult r = minimize(q, {3, 0, 0, -2, 0, 0}, fixed, {});
    CHECK(r.state.positions[0] == 3.0);
    CHECK(r.state.positions[3] == -2.0);
    CHECK(r.converged);
    CHECK_THROWS_AS(minimize(q, std::vector<double>(6, 0.0), std::vector<char>(6, 1), {}), std::invalid_argument);
}

TEST_CASE("honest non-convergence and errors") {
    const Quadratic q = random_spd(20, 4);
    MinimizeSettings s;
    s.max_iters = 1;
    s.grad_tol = 1e-12;
    const MinimizeResult r = minimize(q, std::vector<double>(20, 3.0), {}, s);
    CHECK(r.iterations == 1);
    CHECK_FALSE(r.converged);
    CHECK(r.grad_norm > r.grad_tol);

    const Objective bad = [](std::span<const double>, std::span<double>) -> double {
        throw std::domain_error("no");
    };
    CHECK_THROWS_AS(minimize(bad, {1.0}, {}, {}), MinimizeError);

    MinimizeSettings wrong;
    wrong.c1 = 0.95;
    CHECK_THROWS_AS(wrong.validate(), std::invalid_argument);
}

TEST_CASE("deterministic iterate sequence") {
    const Quadratic q = random_spd(25, 8);
    const MinimizeResult a = minimize(q, std::vector<double>(25, 1.0), {}, {});
    const MinimizeResult b = minimize(q, std::vector<double>(25, 1.0), {}, {});
    CHECK(a.energy_history == b.energy_history);
    CHECK(a.state.positions == b.state.positions);
}

TEST_CASE("mesh minimization: affine state is critical on the periodic 2D lattice") {
    const Mesh mesh = periodic_mesh_2d(4, Diagonal::nw);
    EnergyModel m;
    m.pair = PairPotential::quadratic(1.0);
    BoundaryCondition bc;
    bc.xi = identity(2);
    bc.depth = 0.0;
    const MinimizeResult r = minimize(mesh, m, apply_bc(mesh, bc), affine_init(mesh, bc.xi), {});
    CHECK(r.converged);
    CHECK(r.iterations == 0);
    CHECK(r.energy == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("mesh minimization relaxes a perturbed interior") {
    const Mesh mesh = periodic_mesh_3d(3);
    ChainParams cp;
    cp.c = cp.beta * chain_energy(1.0, cp);
    EnergyModel m;
    m.pair = PairPotential::langevin(cp);
    m.vol = VolumetricParams{1.0, 0.0};
    BoundaryCondition bc;
    bc.xi = identity(3);
    bc.xi(0, 1) = 0.1;
    bc.depth = 0.0;
    const FixedDofs fixed = apply_bc(mesh, bc);
    DeformationState init = affine_init(mesh, bc.xi);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.02, 0.02);
    for (double& x : init.positions) {
        x += u(rng);
    }
    const MinimizeResult r = minimize(mesh, m, fixed, init, {});
    CHECK(r.converged);
    CHECK(r.grad_norm <= r.grad_tol);
    CHECK(r.energy < r.energy_history.front());
}

TEST_CASE("affine init") {
    const Mesh mesh = periodic_mesh_3d(1);
    const DeformationState s = affine_init(mesh, 2.0 * identity(3));
    for (std::size_t k = 0; k < s.positions.size(); ++k) {
        CHECK(s.positions[k] == 2.0 * mesh.coords()[k]);
    }
    CHECK_THROWS_AS(affine_init(mesh, identity(2)), std::invalid_argument);
}
