#include "rubbernet/assembly.hpp"
#include "rubbernet/minimize.hpp"
#include "rubbernet/simd/kernels.hpp"

#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>

using namespace rubbernet;

namespace {

EnergyModel quadratic_model(double k = 1.0) {
    EnergyModel m;
    m.pair = PairPotential::quadratic(k);
    return m;
}

std::vector<double> perturbed(const Mesh& mesh, const Mat& xi, double amp, std::uint64_t seed) {
    std::vector<double> p = affine_init(mesh, xi).positions;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-amp, amp);
    for (double& x : p) {
        x += u(rng);
    }
    return p;
}

}  // namespace

TEST_CASE("rest energy of the single-cell 2D mesh") {
    const Mesh mesh = periodic_mesh_2d(1, Diagonal::nw);
    const DeformationState rest{std::vector<double>(mesh.coords().begin(), mesh.coords().end())};
    CHECK(total_energy(mesh, rest, quadratic_model()) == doctest::Approx(3.0).epsilon(1e-15));
    EnergyModel vol = quadratic_model();
    vol.weight_mode = WeightMode::element_volume;
    CHECK(total_energy(mesh, rest, vol) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("calibrated chain rest energy vanishes") {
    ChainParams cp;
    cp.c = 0.0;
    cp.c = cp.beta * chain_energy(1.0, cp);
    EnergyModel m;
    m.pair = PairPotential::langevin(cp);
    m.vol = VolumetricParams{1.0, 0.0};
    const Mesh mesh = periodic_mesh_3d(2);
    const DeformationState rest{std::vector<double>(mesh.coords().begin(), mesh.coords().end())};
    CHECK(std::abs(total_energy(mesh, rest, m)) < 1e-12);
}

TEST_CASE("merged pairs equal the per-element sum") {
    EnergyModel m;
    m.vol = VolumetricParams{2.0, 0.0};
    for (const Mesh& mesh : {periodic_mesh_3d(2), periodic_mesh_2d(3, Diagonal::ne)}) {
        Mat xi = identity(mesh.dim());
        xi(0, 0) = 1.1;
        const std::vector<double> pos = perturbed(mesh, xi, 0.02, 3);
        double direct = 0.0;
        for (std::size_t e = 0; e < mesh.element_count(); ++e) {
            direct += element_energy(mesh, e, pos, m);
        }
        const Assembler a(mesh, m);
        CHECK(a.energy(pos) == doctest::Approx(direct).epsilon(1e-13));
        CHECK(a.pair_count() < mesh.element_count() * (mesh.dim() == 2 ? 3u : 6u));
    }
}

TEST_CASE("gradient matches central differences for all model combinations") {
    const Mesh mesh = periodic_mesh_3d(2);
    ChainParams cp;
    cp.n = 8.0;
    for (bool chain : {false, true}) {
        for (bool vol : {false, true}) {
            CAPTURE(chain);
            CAPTURE(vol);
            EnergyModel m = chain ? EnergyModel{} : quadratic_model(1.3);
            if (chain) {
                m.pair = PairPotential::langevin(cp);
            }
            if (vol) {
                m.vol = VolumetricParams{1.5, 0.0};
            }
            const std::vector<double> pos = perturbed(mesh, identity(3), 0.03, 9);
            const Assembler a(mesh, m);
            std::vector<double> g(pos.size());
            a.energy_and_gradient(pos, g);
            double worst = 0.0;
            double scale = 0.0;
            for (std::size_t k = 0; k < pos.size(); ++k) {
                std::vector<double> p = pos;
                const double e = 1e-6;
                p[k] += e;
                const double fp = a.energy(p);
                p[k] -= 2 * e;
                const double fm = a.energy(p);
                worst = std::max(worst, std::abs((fp - fm) / (2 * e) - g[k]));
                scale = std::max(scale, std::abs(g[k]));
            }
            CHECK(worst <= 1e-5 * scale);
        }
    }
}

TEST_CASE("energy is frame invariant") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    EnergyModel m;
    m.vol = VolumetricParams{1.0, 0.0};
    for (int dim : {2, 3}) {
        const Mesh mesh = dim == 2 ? periodic_mesh_2d(3, Diagonal::nw) : periodic_mesh_3d(2);
        const std::vector<double> pos = perturbed(mesh, identity(dim), 0.05, 17);
        const double e0 = total_energy(mesh, {pos}, m);
        const Mat r = rotation_from_uniform(dim, u(rng), u(rng), u(rng));
        std::vector<double> moved(pos.size());
        const auto d = static_cast<std::size_t>(dim);
        for (std::size_t i = 0; i < pos.size() / d; ++i) {
            Vec x(dim);
            for (int c = 0; c < dim; ++c) {
                x(c) = pos[i * d + static_cast<std::size_t>(c)];
            }
            const Vec y = r * x + Vec::Constant(dim, 0.7);
            for (int c = 0; c < dim; ++c) {
                moved[i * d + static_cast<std::size_t>(c)] = y(c);
            }
        }
        CHECK(total_energy(mesh, {moved}, m) == doctest::Approx(e0).epsilon(1e-12));
    }
}

TEST_CASE("inverted elements and collapsed pairs are domain errors") {
    const Mesh mesh = periodic_mesh_2d(1, Diagonal::nw);
    EnergyModel m = quadratic_model();
    m.vol = VolumetricParams{1.0, 0.0};
    std::vector<double> flipped(mesh.coords().begin(), mesh.coords().end());
    for (std::size_t i = 0; i < flipped.size(); i += 2) {
        flipped[i] = -flipped[i];
    }
    CHECK_THROWS_AS(total_energy(mesh, {flipped}, m), InvertedElementError);
    m.vol->eta = 0.1;
    CHECK(std::isfinite(total_energy(mesh, {flipped}, m)));

    std::vector<double> collapsed(mesh.coords().size(), 0.25);
    m.vol.reset();
    m.pair = PairPotential::langevin(ChainParams{});
    std::vector<double> g(collapsed.size());
    CHECK_THROWS_AS(Assembler(mesh, m).energy_and_gradient(collapsed, g), std::domain_error);
}

TEST_CASE("scalar and AVX2 assembly agree bitwise") {
    if (!simd::level_available(simd::Level::avx2)) {
        return;
    }
    const Mesh mesh = periodic_mesh_3d(3);
    EnergyModel m;
    m.vol = VolumetricParams{1.0, 0.0};
    const std::vector<double> pos = perturbed(mesh, identity(3), 0.02, 4);
    const simd::Level before = simd::active_level();
    std::vector<double> gs(pos.size()), gv(pos.size());
    simd::set_level(simd::Level::scalar);
    const double es = Assembler(mesh, m).energy_and_gradient(pos, gs);
    simd::set_level(simd::Level::avx2);
    const double ev = Assembler(mesh, m).energy_and_gradient(pos, gv);
    simd::set_level(before);
    CHECK(es == ev);
    CHECK(gs == gv);
}

TEST_CASE("boundary conditions") {
    const Mesh mesh = periodic_mesh_3d(2);
    BoundaryCondition bc;
    bc.xi = 1.1 * identity(3);
    bc.depth = 0.0;
    const FixedDofs f = apply_bc(mesh, bc);
    CHECK(f.free_count() == 3);
    CHECK(f.values[3 * 26 + 0] != 0.0);
    for (std::size_t k = 0; k < f.fixed.size(); ++k) {
        if (f.fixed[k]) {
            CHECK(f.values[k] == doctest::Approx(1.1 * mesh.coords()[k]));
        }
    }
    bc.depth = 0.5;
    CHECK_THROWS_AS(apply_bc(mesh, bc), std::invalid_argument);

    BoundaryCondition faces;
    faces.kind = BcKind::dirichlet_faces;
    faces.xi = identity(3);
    faces.faces = {Face::x0, Face::x1};
    CHECK(apply_bc(mesh, faces).free_count() == 9 * 3);
    BoundaryCondition bad = faces;
    bad.faces = {Face::z0};
    CHECK_THROWS_AS(apply_bc(periodic_mesh_2d(2, Diagonal::nw), [] {
                        BoundaryCondition b;
                        b.kind = BcKind::dirichlet_faces;
                        b.xi = identity(2);
                        b.faces = {Face::z0};
                        return b;
                    }()),
                    std::invalid_argument);
}
