#pragma once

#include "rubbernet/mesh.hpp"

#include <span>
#include <vector>

namespace rubbernet {

/// Raw Delaunay triangulation: positively oriented simplices (dim+1 indices
/// each) over the input points.
struct Triangulation {
    int dim = 0;
    std::vector<int> simplices;

    std::size_t size() const { return simplices.size() / static_cast<std::size_t>(dim + 1); }
};

/// Incremental (Bowyer-Watson) Delaunay triangulation of `points` (flat, dim
/// values each) with exact predicates. Hull facets are tracked as simplices
/// with a vertex at infinity, so no bounding super-simplex is needed.
/// Cospherical ties are resolved by treating points on a circumsphere as
/// outside it. Throws std::invalid_argument for duplicate points, fewer than
/// dim+1 points, or affinely degenerate (all collinear/coplanar) input.
Triangulation delaunay(int dim, std::span<const double> points);

/// Delaunay mesh of points inside the closed unit cube.
Mesh delaunay_triangulate(std::span<const double> points, int dim);

}  // namespace rubbernet
