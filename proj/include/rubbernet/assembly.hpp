#pragma once

// Discrete energy of a deformed mesh:
//
//   E_h(v) = sum_T w_T sum_{(i,j) in T} f W(|v_i - v_j| / |x_i - x_j|)
//          + sum_T vol(T) W_vol(grad v |_T)
//
// where w_T = h^dim (weight_mode = uniform) or vol(T) (element_volume). Pairs
// shared by several elements are counted once per element.

#include "rubbernet/chain_models.hpp"
#include "rubbernet/linalg.hpp"
#include "rubbernet/mesh.hpp"
#include "rubbernet/volumetric.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rubbernet {

enum class WeightMode { uniform, element_volume };

struct EnergyModel {
    PairPotential pair = PairPotential::langevin(ChainParams{});
    double f = 1.0;  // chains per unit volume
    std::optional<VolumetricParams> vol;
    WeightMode weight_mode = WeightMode::uniform;

    void validate() const;
};

/// Deformed positions v_h(x_i), flat with dim values per vertex.
struct DeformationState {
    std::vector<double> positions;
};

class InvertedElementError : public std::domain_error {
public:
    InvertedElementError(std::size_t element, const std::string& what)
        : std::domain_error(what), element_(element) {}
    std::size_t element() const { return element_; }

private:
    std::size_t element_;
};

/// Precomputed per-mesh data (merged pair list, inverse edge matrices) for
/// repeated energy/gradient evaluation on one mesh. Keeps a reference to the
/// mesh, which must outlive it.
class Assembler {
public:
    Assembler(const Mesh& mesh, EnergyModel model);

    const Mesh& mesh() const { return *mesh_; }
    const EnergyModel& model() const { return model_; }
    std::size_t dof_count() const { return mesh_->coords().size(); }
    std::size_t pair_count() const { return first_.size(); }

    double energy(std::span<const double> positions) const;
    /// Writes dE/dv into `grad` (same layout as positions); returns E.
    double energy_and_gradient(std::span<const double> positions, std::span<double> grad) const;

private:
    void check_size(std::span<const double> positions) const;
    double pair_terms(std::span<const double> positions, std::span<double> grad, bool want_grad) const;
    double volumetric_terms(std::span<const double> positions, std::span<double> grad, bool want_grad) const;

    const Mesh* mesh_;
    EnergyModel model_;
    // unique vertex pairs with accumulated weight sum_{T ∋ (i,j)} w_T f
    std::vector<int> first_;
    std::vector<int> second_;
    std::vector<double> weight_;
    std::vector<double> inv_rest_;
    // per element
    std::vector<Mat> dm_inv_;
    std::vector<double> volume_;
    // scratch; an Assembler is not safe for concurrent calls
    mutable std::vector<double> r_;
    mutable std::vector<double> x_;
    mutable std::vector<double> w_;
    mutable std::vector<double> dw_;
};

double total_energy(const Mesh& mesh, const DeformationState& state, const EnergyModel& model);
std::vector<double> energy_gradient(const Mesh& mesh, const DeformationState& state, const EnergyModel& model);

/// Energy of a single element evaluated directly from the definition, without
/// the merged pair list.
double element_energy(const Mesh& mesh, std::size_t e, std::span<const double> positions,
                      const EnergyModel& model);

enum class BcKind { affine_layer, dirichlet_faces };

/// Faces of the unit cube: x0 = {x_0 = 0}, x1 = {x_0 = 1}, y0, y1, z0, z1.
enum class Face { x0, x1, y0, y1, z0, z1 };

struct BoundaryCondition {
    BcKind kind = BcKind::affine_layer;
    Mat xi = identity(3);
    double depth = 0.0;       // affine layer depth
    std::vector<Face> faces;  // dirichlet_faces: pinned to xi * x on these faces
};

/// Per-dof pinning: fixed[k] != 0 marks dof k as prescribed with value values[k].
struct FixedDofs {
    std::vector<char> fixed;
    std::vector<double> values;

    std::size_t free_count() const;
};

FixedDofs apply_bc(const Mesh& mesh, const BoundaryCondition& bc);

}  // namespace rubbernet
