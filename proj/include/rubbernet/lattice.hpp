#pragma once

// Admissible stochastic point sets: hard-core separation r (no two points
// closer than r) and covering radius R (every ball of radius R holds a point).

#include "rubbernet/mesh.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rubbernet {

enum class LatticeKind { matern_hardcore, jittered_grid };

struct StochasticLatticeSpec {
    LatticeKind kind = LatticeKind::jittered_grid;
    int dim = 2;
    double intensity = 1.0;  // points per unit volume
    double r_min = 0.5;      // hard-core separation
    double r_cov = 0.0;      // claimed covering radius; 0 = use the constructive bound (jittered grid)
    std::uint64_t seed = 0;

    /// Throws InfeasibleLatticeError or std::invalid_argument.
    void validate() const;
    /// Grid spacing intensity^(-1/dim).
    double spacing() const;
    /// Jitter ball radius (spacing - r_min) / 2 for the jittered grid.
    double jitter_radius() const;
    /// r_cov if set, else sqrt(dim)/2 * spacing + jitter radius (jittered grid only).
    double covering_radius() const;
};

class InfeasibleLatticeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Axis-aligned box [lo, hi].
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    static Box unit(int dim) { return {std::vector<double>(static_cast<std::size_t>(dim), 0.0), std::vector<double>(static_cast<std::size_t>(dim), 1.0)}; }
    static Box cube(int dim, double side) { return {std::vector<double>(static_cast<std::size_t>(dim), 0.0), std::vector<double>(static_cast<std::size_t>(dim), side)}; }
    int dim() const { return static_cast<int>(lo.size()); }
    bool contains(const double* p) const;
    double volume() const;
};

/// Deterministic in the seed. Matérn II: Poisson proposals on the box grown by
/// r_min, thinned by random marks, clipped to the box. Jittered grid: sites
/// lo + spacing * k covering the box, each moved uniformly within the jitter
/// ball; points are not clipped, so the covering bound holds on the whole box.
std::vector<double> stochastic_lattice(const StochasticLatticeSpec& spec, const Box& box);

/// { h * y : h * y in box }.
std::vector<double> rescale_and_clip(std::span<const double> points, int dim, double h, const Box& box);

struct AdmissibilityReport {
    bool covering_ok = false;
    bool separation_ok = false;
    double measured_R = 0.0;
    double measured_r = 0.0;
    /// Largest radius-edge ratio over the assessed Delaunay elements (0 if
    /// not computed).
    double delaunay_quality = 0.0;
    bool delaunay_regular = true;
    std::size_t delaunay_assessed = 0;
};

/// measured_r is the exact minimum pairwise distance; measured_R is the
/// largest distance from a probe point to its nearest lattice point over a
/// probe grid of the box with spacing <= r_claim / 4.
AdmissibilityReport check_admissibility(std::span<const double> points, int dim, const Box& box,
                                        double r_claim, double R_claim);

/// Fills the Delaunay quality fields of `report` for `mesh`, a triangulation
/// of every lattice point in `window`. Only elements whose circumball lies in
/// the window are assessed: those are simplices of the whole lattice's
/// triangulation, while the rest are artifacts of truncating it.
void assess_delaunay_quality(const Mesh& mesh, const Box& window, double max_radius_edge,
                             AdmissibilityReport& report);

/// Uniform bucket grid for exact nearest-neighbour queries.
class PointGrid {
public:
    PointGrid(std::span<const double> points, int dim, double cell);

    /// Index and distance of the nearest point to q, skipping index `exclude`.
    std::pair<int, double> nearest(const double* q, int exclude = -1) const;
    /// Candidates from every bucket meeting the cube of half-side `radius` around q.
    std::vector<int> within(const double* q, double radius) const;

private:
    std::int64_t cell_of(double x, int axis) const;
    std::int64_t flat(const std::vector<std::int64_t>& c) const;

    std::span<const double> points_;
    int dim_;
    double cell_;
    std::vector<double> origin_;
    std::vector<std::int64_t> extent_;
    std::vector<std::size_t> start_;
    std::vector<int> items_;
};

}  // namespace rubbernet
