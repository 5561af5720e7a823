#include "rubbernet/delaunay.hpp"
#include "rubbernet/predicates.hpp"

#include "doctest.h"

#include <array>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

using namespace rubbernet;

namespace {

std::vector<double> random_points(int dim, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> p(n * static_cast<std::size_t>(dim));
    for (double& x : p) {
        x = u(rng);
    }
    return p;
}

std::vector<const double*> simplex_ptrs(const Triangulation& t, std::size_t s, const std::vector<double>& pts) {
    const auto d = static_cast<std::size_t>(t.dim);
    std::vector<const double*> out;
    for (std::size_t k = 0; k <= d; ++k) {
        out.push_back(pts.data() + static_cast<std::size_t>(t.simplices[s * (d + 1) + k]) * d);
    }
    return out;
}

// No input point strictly inside any circumsphere; every simplex positive.
bool empty_circumspheres(const Triangulation& t, const std::vector<double>& pts) {
    const auto d = static_cast<std::size_t>(t.dim);
    const std::size_t n = pts.size() / d;
    for (std::size_t s = 0; s < t.size(); ++s) {
        const auto ptrs = simplex_ptrs(t, s, pts);
        if (predicates::orient(t.dim, ptrs) <= 0) {
            return false;
        }
        for (std::size_t q = 0; q < n; ++q) {
            if (predicates::insphere(t.dim, ptrs, pts.data() + q * d) > 0) {
                return false;
            }
        }
    }
    return true;
}

double total_volume(const Triangulation& t, const std::vector<double>& pts) {
    double v = 0.0;
    for (std::size_t s = 0; s < t.size(); ++s) {
        v += simplex_volume(t.dim, simplex_ptrs(t, s, pts));
    }
    return v;
}

}  // namespace

TEST_CASE("orientation sign convention") {
    const double a[] = {0, 0}, b[] = {1, 0}, c[] = {0, 1};
    const std::array<const double*, 3> ccw{a, b, c};
    const std::array<const double*, 3> cw{a, c, b};
    CHECK(predicates::orient(2, ccw) == 1);
    CHECK(predicates::orient(2, cw) == -1);
    const double d[] = {2, 0};
    const std::array<const double*, 3> line{a, b, d};
    CHECK(predicates::orient(2, line) == 0);

    const double o[] = {0, 0, 0}, x[] = {1, 0, 0}, y[] = {0, 1, 0}, z[] = {0, 0, 1};
    const std::array<const double*, 4> right{o, x, y, z};
    const std::array<const double*, 4> left{o, y, x, z};
    CHECK(predicates::orient(3, right) == 1);
    CHECK(predicates::orient(3, left) == -1);
}

TEST_CASE("insphere sign convention in 2D and 3D, both orientations") {
    const double a[] = {0, 0}, b[] = {1, 0}, c[] = {0, 1};
    const double in[] = {0.5, 0.5}, on[] = {1, 1}, out[] = {1.2, 1.2};
    for (const auto& tri : {std::array<const double*, 3>{a, b, c}, std::array<const double*, 3>{a, c, b}}) {
        CHECK(predicates::insphere(2, tri, in) == 1);
        CHECK(predicates::insphere(2, tri, on) == 0);
        CHECK(predicates::insphere(2, tri, out) == -1);
    }
    const double o[] = {0, 0, 0}, x[] = {1, 0, 0}, y[] = {0, 1, 0}, z[] = {0, 0, 1};
    const double in3[] = {0.5, 0.5, 0.5}, on3[] = {1, 1, 1}, out3[] = {1, 1, 1.01};
    for (const auto& tet : {std::array<const double*, 4>{o, x, y, z}, std::array<const double*, 4>{o, y, x, z}}) {
        CHECK(predicates::insphere(3, tet, in3) == 1);
        CHECK(predicates::insphere(3, tet, on3) == 0);
        CHECK(predicates::insphere(3, tet, out3) == -1);
    }
    const double e[] = {2, 0};
    const std::array<const double*, 3> flat{a, b, e};
    CHECK_THROWS_AS(predicates::insphere(2, flat, in), std::domain_error);
}

TEST_CASE("exact fallback decides nearly degenerate cases") {
    // points on a tiny-slope line: double evaluation is unreliable here
    const double a[] = {0.5, 0.5}, b[] = {12.0, 12.0}, c[] = {24.0, 24.0};
    const std::array<const double*, 3> t{a, b, c};
    CHECK(predicates::orient(2, t) == 0);
    const double c2[] = {24.0, std::nextafter(24.0, 25.0)};
    const std::array<const double*, 3> t2{a, b, c2};
    CHECK(predicates::orient(2, t2) == 1);
}

TEST_CASE("face circumsphere") {
    const double a[] = {0, 0}, b[] = {2, 0};
    const std::array<const double*, 2> seg{a, b};
    const double mid[] = {1, 0}, end[] = {2, 0}, beyond[] = {3, 0};
    CHECK(predicates::in_face_sphere(2, seg, mid) == 1);
    CHECK(predicates::in_face_sphere(2, seg, end) == 0);
    CHECK(predicates::in_face_sphere(2, seg, beyond) == -1);
    const double p[] = {0, 0, 0}, q[] = {2, 0, 0}, r[] = {0, 2, 0};
    const std::array<const double*, 3> tri{p, q, r};
    const double inside[] = {1, 0.9, 0}, corner[] = {2, 2, 0}, outside[] = {2.1, 2, 0};
    CHECK(predicates::in_face_sphere(3, tri, inside) == 1);
    CHECK(predicates::in_face_sphere(3, tri, corner) == 0);
    CHECK(predicates::in_face_sphere(3, tri, outside) == -1);
}

TEST_CASE("Delaunay of random clouds has empty circumspheres and fills the hull") {
    for (int dim : {2, 3}) {
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            CAPTURE(dim);
            CAPTURE(seed);
            std::vector<double> pts = random_points(dim, 60, seed);
            // the unit cube corners make the hull the cube itself
            for (int k = 0; k < (1 << dim); ++k) {
                for (int c = 0; c < dim; ++c) {
                    pts.push_back((k >> c) & 1);
                }
            }
            const Triangulation t = delaunay(dim, pts);
            CHECK(empty_circumspheres(t, pts));
            CHECK(total_volume(t, pts) == doctest::Approx(1.0).epsilon(1e-12));
            // every point is used
            std::set<int> used(t.simplices.begin(), t.simplices.end());
            CHECK(used.size() == pts.size() / static_cast<std::size_t>(dim));
        }
    }
}

TEST_CASE("Delaunay of cospherical grid points") {
    std::vector<double> grid;
    for (int j = 0; j <= 4; ++j) {
        for (int i = 0; i <= 4; ++i) {
            grid.push_back(i / 4.0);
            grid.push_back(j / 4.0);
        }
    }
    const Triangulation t = delaunay(2, grid);
    CHECK(t.size() == 32);
    CHECK(empty_circumspheres(t, grid));

    std::vector<double> cube;
    for (int k = 0; k < 27; ++k) {
        cube.push_back((k % 3) / 2.0);
        cube.push_back((k / 3 % 3) / 2.0);
        cube.push_back((k / 9) / 2.0);
    }
    const Triangulation t3 = delaunay(3, cube);
    CHECK(empty_circumspheres(t3, cube));
    CHECK(total_volume(t3, cube) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Delaunay input errors") {
    CHECK_THROWS_AS(delaunay(2, std::vector<double>{0, 0, 1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(delaunay(2, std::vector<double>{0, 0, 1, 0, 0, 1, 1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(delaunay(2, std::vector<double>{0, 0, 1, 1, 2, 2, 3, 3}), std::invalid_argument);
    CHECK_THROWS_AS(delaunay(3, std::vector<double>{0, 0, 0, 1, 0, 0, 0, 1, 0, 1, 1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(delaunay(2, std::vector<double>{0, 0, 1, 0, 0, std::nan("")}), std::invalid_argument);
}

TEST_CASE("Delaunay mesh of points in the unit cube") {
    std::vector<double> pts = random_points(2, 100, 42);
    const Mesh mesh = delaunay_triangulate(pts, 2);
    CHECK(mesh.vertex_count() == 100);
    double hull = 0.0;
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        hull += mesh.element_volume(e);
    }
    CHECK(hull == doctest::Approx(mesh.total_volume()));
    CHECK(hull < 1.0);
    pts[0] = 1.5;
    CHECK_THROWS_AS(delaunay_triangulate(pts, 2), std::invalid_argument);
}
