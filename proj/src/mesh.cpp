#include "rubbernet/mesh.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rubbernet {

namespace {

constexpr double kBoxTol = 1e-12;

double cube_distance(std::span<const double> p) {
    double d = std::numeric_limits<double>::infinity();
    for (double x : p) {
        d = std::min({d, x, 1.0 - x});
    }
    return std::max(d, 0.0);
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

}  // namespace

Mat edge_matrix(int dim, std::span<const int> el, std::span<const double> data) {
    Mat m(dim, dim);
    const auto base = static_cast<std::size_t>(el[0]) * static_cast<std::size_t>(dim);
    for (int k = 0; k < dim; ++k) {
        const auto off = static_cast<std::size_t>(el[static_cast<std::size_t>(k) + 1]) *
                         static_cast<std::size_t>(dim);
        for (int c = 0; c < dim; ++c) {
            m(c, k) = data[off + static_cast<std::size_t>(c)] - data[base + static_cast<std::size_t>(c)];
        }
    }
    return m;
}

Mesh::Mesh(int dim, std::vector<double> coords, std::vector<int> elements)
    : dim_(dim), coords_(std::move(coords)), elements_(std::move(elements)) {
    if (dim_ != 2 && dim_ != 3) {
        throw std::invalid_argument("Mesh: dim must be 2 or 3");
    }
    const auto d = static_cast<std::size_t>(dim_);
    if (coords_.size() % d != 0 || elements_.size() % (d + 1) != 0) {
        throw std::invalid_argument("Mesh: coordinate/element arrays have inconsistent sizes");
    }
    if (element_count() == 0) {
        throw std::invalid_argument("Mesh: no elements");
    }
    const auto nv = static_cast<int>(vertex_count());
    for (int idx : elements_) {
        if (idx < 0 || idx >= nv) {
            throw std::invalid_argument("Mesh: element references vertex " + std::to_string(idx) +
                                        " out of range");
        }
    }
    boundary_distance_.resize(vertex_count());
    for (std::size_t i = 0; i < vertex_count(); ++i) {
        const auto p = std::span<const double>(coords_).subspan(i * d, d);
        for (double x : p) {
            if (!(x >= -kBoxTol && x <= 1.0 + kBoxTol)) {
                throw std::invalid_argument("Mesh: vertex " + std::to_string(i) +
                                            " lies outside the unit cube");
            }
        }
        boundary_distance_[i] = cube_distance(p);
    }
    for (std::size_t e = 0; e < element_count(); ++e) {
        if (!(element_volume(e) > 0.0)) {
            throw std::invalid_argument("Mesh: element " + std::to_string(e) +
                                        " is not positively oriented");
        }
    }
    h_ = std::pow(1.0 / static_cast<double>(element_count()), 1.0 / dim_);
}

Vec Mesh::vertex(std::size_t i) const {
    Vec v(dim_);
    for (int c = 0; c < dim_; ++c) {
        v(c) = coords_[i * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(c)];
    }
    return v;
}

double Mesh::element_volume(std::size_t e) const {
    return det(edge_matrix(dim_, element(e), coords_)) / factorial(dim_);
}

double Mesh::total_volume() const {
    double v = 0.0;
    for (std::size_t e = 0; e < element_count(); ++e) {
        v += element_volume(e);
    }
    return v;
}

double simplex_volume(int dim, std::span<const double* const> points) {
    Mat m(dim, dim);
    for (int k = 0; k < dim; ++k) {
        for (int c = 0; c < dim; ++c) {
            m(c, k) = points[static_cast<std::size_t>(k) + 1][c] - points[0][c];
        }
    }
    return det(m) / factorial(dim);
}

Mesh periodic_mesh_3d(int m) {
    if (m < 1) {
        throw std::invalid_argument("periodic_mesh_3d: m must be >= 1");
    }
    const int n = m + 1;
    std::vector<double> coords;
    coords.reserve(static_cast<std::size_t>(n * n * n * 3));
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                coords.push_back(static_cast<double>(i) / m);
                coords.push_back(static_cast<double>(j) / m);
                coords.push_back(static_cast<double>(k) / m);
            }
        }
    }
    auto index = [n](int i, int j, int k) { return i + n * (j + n * k); };

    // Kuhn split: one tetrahedron per monotone lattice path from (0,0,0) to (1,1,1).
    std::array<int, 3> perm{0, 1, 2};
    std::vector<std::array<int, 3>> perms;
    do {
        perms.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));

    std::vector<int> elements;
    elements.reserve(static_cast<std::size_t>(m * m * m * 6 * 4));
    for (int k = 0; k < m; ++k) {
        for (int j = 0; j < m; ++j) {
            for (int i = 0; i < m; ++i) {
                for (const auto& p : perms) {
                    std::array<int, 3> c{i, j, k};
                    std::array<int, 4> tet{};
                    tet[0] = index(c[0], c[1], c[2]);
                    for (int s = 0; s < 3; ++s) {
                        ++c[static_cast<std::size_t>(p[static_cast<std::size_t>(s)])];
                        tet[static_cast<std::size_t>(s) + 1] = index(c[0], c[1], c[2]);
                    }
                    // odd permutations come out negatively oriented
                    const int inversions = (p[0] > p[1]) + (p[0] > p[2]) + (p[1] > p[2]);
                    if (inversions % 2 == 1) {
                        std::swap(tet[2], tet[3]);
                    }
                    elements.insert(elements.end(), tet.begin(), tet.end());
                }
            }
        }
    }
    return Mesh(3, std::move(coords), std::move(elements));
}

Mesh periodic_mesh_2d(int m, Diagonal diagonal) {
    if (m < 1) {
        throw std::invalid_argument("periodic_mesh_2d: m must be >= 1");
    }
    const int n = m + 1;
    std::vector<double> coords;
    coords.reserve(static_cast<std::size_t>(n * n * 2));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            coords.push_back(static_cast<double>(i) / m);
            coords.push_back(static_cast<double>(j) / m);
        }
    }
    std::vector<int> elements;
    elements.reserve(static_cast<std::size_t>(m * m * 6));
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
            const int a = i + n * j;  // (0,0)
            const int b = a + 1;      // (1,0)
            const int c = b + n;      // (1,1)
            const int d = a + n;      // (0,1)
            if (diagonal == Diagonal::nw) {
                elements.insert(elements.end(), {a, b, d, b, c, d});
            } else {
                elements.insert(elements.end(), {a, b, c, a, c, d});
            }
        }
    }
    return Mesh(2, std::move(coords), std::move(elements));
}

Mat element_gradient(const Mesh& mesh, std::size_t e, std::span<const double> nodal) {
    if (nodal.size() != mesh.coords().size()) {
        throw std::invalid_argument("element_gradient: nodal data size does not match mesh");
    }
    const int dim = mesh.dim();
    const Mat dm = edge_matrix(dim, mesh.element(e), mesh.coords());
    if (det(dm) == 0.0) {
        throw std::domain_error("element_gradient: degenerate element " + std::to_string(e));
    }
    const Mat ds = edge_matrix(dim, mesh.element(e), nodal);
    return ds * inverse(dm);
}

std::vector<int> boundary_layer(const Mesh& mesh, double depth) {
    if (!(depth >= 0.0)) {
        throw std::invalid_argument("boundary_layer: depth must be >= 0");
    }
    std::vector<int> out;
    for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
        if (mesh.boundary_distance(i) <= depth) {
            out.push_back(static_cast<int>(i));
        }
    }
    return out;
}

Ball circumball(const Mesh& mesh, std::size_t e) {
    const int dim = mesh.dim();
    const auto el = mesh.element(e);
    const Mat a = edge_matrix(dim, el, mesh.coords());
    // circumcenter c (relative to x_0) solves 2 a^T c = |a_k|^2
    Vec rhs(dim);
    for (int k = 0; k < dim; ++k) {
        rhs(k) = a.col(k).squaredNorm();
    }
    const Mat at = a.transpose();
    const Vec offset = 0.5 * (inverse(at) * rhs);
    return {mesh.vertex(static_cast<std::size_t>(el[0])) + offset, offset.norm()};
}

double radius_edge_ratio(const Mesh& mesh, std::size_t e) {
    const auto el = mesh.element(e);
    double shortest = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < el.size(); ++p) {
        for (std::size_t q = p + 1; q < el.size(); ++q) {
            shortest = std::min(shortest, (mesh.vertex(static_cast<std::size_t>(el[p])) -
                                           mesh.vertex(static_cast<std::size_t>(el[q])))
                                              .norm());
        }
    }
    return circumball(mesh, e).radius / shortest;
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
    const auto d = static_cast<std::size_t>(mesh.dim());
    out << mesh.dim() << ' ' << mesh.vertex_count() << ' ' << mesh.element_count() << '\n';
    out << std::setprecision(17);
    const auto coords = mesh.coords();
    for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
        for (std::size_t c = 0; c < d; ++c) {
            out << (c ? " " : "") << coords[i * d + c];
        }
        out << '\n';
    }
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        const auto el = mesh.element(e);
        for (std::size_t k = 0; k < el.size(); ++k) {
            out << (k ? " " : "") << el[k];
        }
        out << '\n';
    }
}

Mesh read_mesh(std::istream& in) {
    int dim = 0;
    std::size_t nv = 0;
    std::size_t ne = 0;
    if (!(in >> dim >> nv >> ne) || (dim != 2 && dim != 3)) {
        throw std::runtime_error("read_mesh: malformed header");
    }
    const auto d = static_cast<std::size_t>(dim);
    std::vector<double> coords(nv * d);
    for (double& x : coords) {
        if (!(in >> x)) {
            throw std::runtime_error("read_mesh: truncated vertex block");
        }
    }
    std::vector<int> elements(ne * (d + 1));
    for (int& v : elements) {
        if (!(in >> v)) {
            throw std::runtime_error("read_mesh: truncated element block");
        }
    }
    return Mesh(dim, std::move(coords), std::move(elements));
}

void write_mesh_file(const std::string& path, const Mesh& mesh) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    write_mesh(out, mesh);
}

Mesh read_mesh_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    return read_mesh(in);
}

}  // namespace rubbernet
