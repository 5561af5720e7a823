#pragma once

// Finite-h estimates of the homogenized energy density W_hom(xi): cell
// problems with an affine boundary layer on periodic or stochastic meshes,
// refinement studies, and probes of frame invariance, isotropy and rank-one
// convexity.

#include "rubbernet/assembly.hpp"
#include "rubbernet/lattice.hpp"
#include "rubbernet/minimize.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rubbernet {

/// Cell problems stop at 1e-6 * (1 + |E|): tighter gradients are below what
/// the energy can resolve in double precision on fine meshes.
inline MinimizeSettings cell_settings() {
    MinimizeSettings s;
    s.rel_grad_tol = 1e-6;
    return s;
}

struct PeriodicSource {
    int m = 4;
    Diagonal diagonal = Diagonal::nw;  // 2D only
};

/// Lattice points generated at unit scale in the cube of side 1/h, then
/// rescaled by h into the unit cube and Delaunay-triangulated.
struct StochasticSource {
    StochasticLatticeSpec lattice;
    double h = 0.1;
};

using MeshSource = std::variant<PeriodicSource, StochasticSource>;

struct CellProblem {
    Mat xi = identity(2);
    MeshSource source = PeriodicSource{};
    EnergyModel model;
    /// Unset: 2h for periodic meshes, 2hR for stochastic ones.
    std::optional<double> layer_depth;
    /// Total number of minimizations; run 0 starts from the affine state, the
    /// others from random perturbations of it.
    int restarts = 1;
    /// Perturbation amplitude relative to the mesh h.
    double restart_noise = 0.05;
    std::uint64_t seed = 0;
    /// Throw instead of returning the prescribed-state energy when the layer
    /// pins every vertex.
    bool require_interior = false;
    MinimizeSettings settings = cell_settings();

    int dim() const { return static_cast<int>(xi.rows()); }
    void validate() const;
};

struct CellResult {
    double value = 0.0;  // min energy / vol(unit cube)
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    double h = 0.0;  // mesh scale: 1/m (periodic) or the rescaling factor
    std::size_t elements = 0;
    std::size_t free_vertices = 0;
    std::vector<double> positions;  // minimizer
};

Mesh build_cell_mesh(const CellProblem& problem);
double cell_layer_depth(const CellProblem& problem);
CellResult solve_cell(const CellProblem& problem);
double cell_energy_density(const CellProblem& problem);

/// L2 norm over the unit cube of the difference between two deformations,
/// the coarse one interpolated at the fine vertices. Exact when `fine`
/// refines `coarse` (nested periodic meshes); throws std::invalid_argument if
/// a fine vertex lies outside the coarse mesh.
double interpolated_l2_distance(const Mesh& coarse, std::span<const double> coarse_positions, const Mesh& fine,
                                std::span<const double> fine_positions);

/// W_hom(xi) of the 2D periodic lattice with quadratic springs, from the
/// periodic cell of `cell_m` x `cell_m` squares: minimizes over periodic
/// fluctuations with a linear solve. Weights match WeightMode::uniform.
double single_cell_oracle_2d(const Mat& xi, double stiffness, double f, int cell_m = 1,
                             Diagonal diagonal = Diagonal::nw);

struct RealizationStats {
    double mean = 0.0;
    double stderr_ = 0.0;  // sample standard deviation / sqrt(n); 0 when n = 1
    int n = 0;
};

struct ScaleEstimate {
    double h = 0.0;
    int m = 0;  // periodic only
    double value = 0.0;
    double grad_norm = 0.0;  // largest over realizations
    RealizationStats stats;
    std::vector<CellResult> runs;
    std::vector<std::uint64_t> seeds;
};

struct HomogEstimate {
    Mat xi;
    std::vector<ScaleEstimate> per_h;
    double extrapolated = 0.0;  // value at the finest scale
    /// First-order Richardson extrapolation from the two finest scales.
    double richardson = 0.0;
    std::vector<double> cauchy_gaps;
    /// Periodic only: interpolated_l2_distance between the minimizers of
    /// consecutive scales, as a diagnostic.
    std::vector<double> minimizer_l2_gaps;
};

enum class MeshKind { periodic, stochastic };

struct EstimateRequest {
    Mat xi = identity(2);
    EnergyModel model;
    MeshKind kind = MeshKind::periodic;
    Diagonal diagonal = Diagonal::nw;
    std::vector<int> m_list;       // periodic scales
    std::vector<double> h_list;    // stochastic scales
    StochasticLatticeSpec lattice;  // seed field is replaced per realization
    int n_realizations = 1;
    std::uint64_t seed = 0;
    int restarts = 1;
    MinimizeSettings settings = cell_settings();
    unsigned jobs = 1;  // 0 = hardware concurrency

    void validate() const;
    /// Cell problems in job order: scale-major, then realization.
    std::vector<CellProblem> cell_problems() const;
};

/// Seed of realization k of a batch seeded with `seed`.
std::uint64_t realization_seed(std::uint64_t seed, int k);

struct CellOutcome {
    bool ok = false;
    CellResult result;
    std::string error;
};

/// Solves independent cell problems on up to `jobs` threads; outcomes are in
/// input order whatever the scheduling.
std::vector<CellOutcome> run_cells(std::span<const CellProblem> problems, unsigned jobs);

/// Aggregates outcomes produced from request.cell_problems(). Throws the first
/// recorded error if any cell failed.
HomogEstimate aggregate_estimate(const EstimateRequest& request, std::span<const CellOutcome> outcomes);

HomogEstimate estimate_whom(const EstimateRequest& request);

using Estimator = std::function<double(const Mat& xi)>;

/// Cell-problem estimator at a fixed scale: the mean over `realizations`
/// lattice seeds (periodic meshes use one).
Estimator cell_estimator(CellProblem base, int realizations = 1, std::uint64_t seed = 0, unsigned jobs = 1);

/// max_R |W(R xi) - W(xi)| / |W(xi)| over `rotation_count` random rotations.
double frame_invariance_probe(const Estimator& estimator, const Mat& xi, int rotation_count, std::uint64_t seed);
/// Same with W(xi R).
double isotropy_probe(const Estimator& estimator, const Mat& xi, int rotation_count, std::uint64_t seed);
/// Deviation over explicit rotations, applied on the left (frame) or right
/// (material).
double rotation_deviation(const Estimator& estimator, const Mat& xi, std::span<const Mat> rotations, bool left);

struct Anisotropy {
    double stiffness_diag = 0.0;      // along (e2 - e1)/sqrt2
    double stiffness_antidiag = 0.0;  // along (e1 + e2)/sqrt2
    double ratio = 0.0;
};

Anisotropy anisotropy_counterexample(double stiffness, double f, int cell_m = 1, Diagonal diagonal = Diagonal::nw,
                                     double step = 1e-3);

struct ConvexityReport {
    std::size_t triples = 0;
    /// Largest W(t_i) - [lambda W(t_{i-1}) + (1 - lambda) W(t_{i+1})] over
    /// consecutive triples (<= 0 when convex).
    double worst_violation = 0.0;
    double worst_t = 0.0;
    double noise = 0.0;
    bool convex = true;  // worst_violation <= noise
};

/// Samples t -> W(xi + t a b^T) on the sorted t_grid.
ConvexityReport rank_one_convexity_sample(const Estimator& estimator, const Mat& xi, const Vec& a, const Vec& b,
                                          std::vector<double> t_grid, double noise);

/// One row per cell: xi_id, xi entries, h, realization, value, grad_norm,
/// iterations, converged, seed, status.
void write_cells_csv(std::ostream& out, std::span<const EstimateRequest> requests,
                     std::span<const std::vector<CellOutcome>> outcomes);

/// Runs fn(0..count-1) on up to `jobs` threads; rethrows the first exception by index.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn);

}  // namespace rubbernet
