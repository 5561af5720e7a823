#pragma once

#include "rubbernet/linalg.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace rubbernet {

/// Simplicial mesh (triangles in 2D, tetrahedra in 3D) of a subset of the
/// closed unit cube. Immutable after construction; every element is
/// positively oriented and h = (1/N_el)^(1/dim).
class Mesh {
public:
    /// Validates orientation and bounds; `coords` holds dim values per vertex
    /// and `elements` dim+1 vertex indices per element.
    Mesh(int dim, std::vector<double> coords, std::vector<int> elements);

    int dim() const { return dim_; }
    int nodes_per_element() const { return dim_ + 1; }
    std::size_t vertex_count() const { return coords_.size() / static_cast<std::size_t>(dim_); }
    std::size_t element_count() const { return elements_.size() / static_cast<std::size_t>(dim_ + 1); }
    double h() const { return h_; }

    std::span<const double> coords() const { return coords_; }
    std::span<const int> elements() const { return elements_; }
    std::span<const int> element(std::size_t e) const {
        return std::span<const int>(elements_).subspan(e * static_cast<std::size_t>(dim_ + 1),
                                                       static_cast<std::size_t>(dim_ + 1));
    }
    Vec vertex(std::size_t i) const;
    /// Euclidean distance from vertex i to the boundary of the unit cube.
    double boundary_distance(std::size_t i) const { return boundary_distance_[i]; }

    /// Signed volume (area in 2D) of element e in the reference configuration.
    double element_volume(std::size_t e) const;
    double total_volume() const;

private:
    int dim_;
    std::vector<double> coords_;
    std::vector<int> elements_;
    std::vector<double> boundary_distance_;
    double h_;
};

enum class Diagonal {
    nw,  // from (0,1) to (1,0) of each cell: direction e1 - e2
    ne,  // from (0,0) to (1,1): direction e1 + e2
};

/// Unit cube split into m^3 subcubes, 6 Kuhn tetrahedra each.
Mesh periodic_mesh_3d(int m);
/// Unit square split into m^2 squares, 2 triangles each along `diagonal`.
Mesh periodic_mesh_2d(int m, Diagonal diagonal);

/// Columns x_k - x_0 (k = 1..dim) of the element `el` over flat coordinates.
Mat edge_matrix(int dim, std::span<const int> el, std::span<const double> data);

/// Signed simplex volume from dim+1 points given as flat coordinates.
double simplex_volume(int dim, std::span<const double* const> points);

/// Gradient of the affine interpolant of per-vertex vectors `nodal` (flat,
/// dim values per vertex) on element e: D_s D_m^{-1}.
Mat element_gradient(const Mesh& mesh, std::size_t e, std::span<const double> nodal);

/// Vertices within closed distance `depth` of the unit cube boundary.
std::vector<int> boundary_layer(const Mesh& mesh, double depth);

struct Ball {
    Vec center;
    double radius = 0.0;
};

Ball circumball(const Mesh& mesh, std::size_t e);

/// Radius-edge ratio (circumradius / shortest edge) of element e.
double radius_edge_ratio(const Mesh& mesh, std::size_t e);

void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);
void write_mesh_file(const std::string& path, const Mesh& mesh);
Mesh read_mesh_file(const std::string& path);

}  // namespace rubbernet
