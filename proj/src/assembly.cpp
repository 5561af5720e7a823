#include "rubbernet/assembly.hpp"

#include "rubbernet/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace rubbernet {

namespace {

double pair_weight(const Mesh& mesh, std::size_t e, const EnergyModel& model) {
    const double w = model.weight_mode == WeightMode::uniform ? std::pow(mesh.h(), mesh.dim())
                                                            : mesh.element_volume(e);
    return w * model.f;
}

double distance(std::span<const double> pos, int dim, int i, int j) {
    const auto d = static_cast<std::size_t>(dim);
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
        const double diff = pos[static_cast<std::size_t>(i) * d + c] - pos[static_cast<std::size_t>(j) * d + c];
        s += diff * diff;
    }
    return std::sqrt(s);
}

}  // namespace

void EnergyModel::validate() const {
    if (!(f > 0.0) || !std::isfinite(f)) {
        throw std::invalid_argument("EnergyModel: f must be finite and > 0");
    }
    if (vol) {
        vol->validate();
    }
}

Assembler::Assembler(const Mesh& mesh, EnergyModel model) : mesh_(&mesh), model_(std::move(model)) {
    model_.validate();
    const int dim = mesh.dim();
    const std::size_t ne = mesh.element_count();
    const auto npe = static_cast<std::size_t>(mesh.nodes_per_element());

    std::vector<std::tuple<int, int, double>> pairs;
    pairs.reserve(ne * npe * (npe - 1) / 2);
    for (std::size_t e = 0; e < ne; ++e) {
        const auto el = mesh.element(e);
        const double w = pair_weight(mesh, e, model_);
        for (std::size_t a = 0; a < npe; ++a) {
            for (std::size_t b = a + 1; b < npe; ++b) {
                pairs.emplace_back(std::min(el[a], el[b]), std::max(el[a], el[b]), w);
            }
        }
    }
    std::sort(pairs.begin(), pairs.end());
    for (const auto& [i, j, w] : pairs) {
        if (!first_.empty() && first_.back() == i && second_.back() == j) {
            weight_.back() += w;
            continue;
        }
        first_.push_back(i);
        second_.push_back(j);
        weight_.push_back(w);
        const double rest = distance(mesh.coords(), dim, i, j);
        if (!(rest > 0.0)) {
            throw std::invalid_argument("Assembler: coincident reference vertices");
        }
        inv_rest_.push_back(1.0 / rest);
    }

    if (model_.vol) {
        dm_inv_.reserve(ne);
        volume_.reserve(ne);
        for (std::size_t e = 0; e < ne; ++e) {
            dm_inv_.push_back(inverse(edge_matrix(dim, mesh.element(e), mesh.coords())));
            volume_.push_back(mesh.element_volume(e));
        }
    }
    r_.resize(first_.size());
    w_.resize(first_.size());
    dw_.resize(first_.size());
    x_.resize(first_.size());
}

void Assembler::check_size(std::span<const double> positions) const {
    if (positions.size() != dof_count()) {
        throw std::invalid_argument("Assembler: state has " + std::to_string(positions.size()) +
                                    " values, mesh needs " + std::to_string(dof_count()));
    }
}

double Assembler::pair_terms(std::span<const double> positions, std::span<double> grad, bool want_grad) const {
    const auto& kern = simd::active();
    const std::size_t n = first_.size();
    const int dim = mesh_->dim();
    kern.edge_stretch(dim, positions.data(), first_.data(), second_.data(), inv_rest_.data(), n, r_.data());

    if (model_.pair.is_quadratic()) {
        kern.quadratic_pair(r_.data(), model_.pair.spring().stiffness, n, w_.data(), dw_.data());
    } else {
        const ChainParams& p = model_.pair.chain();
        const double sqrt_n = std::sqrt(p.n);
        const double scale = p.k / p.beta;
        const double shift = p.c / p.beta;
        // w_ holds rho, then x; dw_ holds dx
        std::vector<double>& x = x_;
        for (std::size_t k = 0; k < n; ++k) {
            w_[k] = r_[k] / sqrt_n;
        }
        kern.inv_langevin_series(w_.data(), n, x.data(), dw_.data());
        for (std::size_t k = 0; k < n; ++k) {
            const double rho = w_[k];
            const double dx = dw_[k];
            w_[k] = scale * p.n * (rho * x[k] + log_x_over_sinh(x[k])) - shift;
            dw_[k] = scale * sqrt_n * (x[k] + (rho - langevin(x[k])) * dx);
        }
    }
    const double energy = kern.dot(weight_.data(), w_.data(), n);
    if (!want_grad) {
        return energy;
    }

    const auto d = static_cast<std::size_t>(dim);
    for (std::size_t k = 0; k < n; ++k) {
        if (!(r_[k] > 0.0)) {
            throw std::domain_error("energy_gradient: deformed vertices " + std::to_string(first_[k]) +
                                    " and " + std::to_string(second_[k]) + " coincide");
        }
        const double coef = weight_[k] * dw_[k] * inv_rest_[k] * inv_rest_[k] / r_[k];
        const std::size_t i = static_cast<std::size_t>(first_[k]) * d;
        const std::size_t j = static_cast<std::size_t>(second_[k]) * d;
        for (std::size_t c = 0; c < d; ++c) {
            const double g = coef * (positions[i + c] - positions[j + c]);
            grad[i + c] += g;
            grad[j + c] -= g;
        }
    }
    return energy;
}

double Assembler::volumetric_terms(std::span<const double> positions, std::span<double> grad,
                                   bool want_grad) const {
    const VolumetricParams& vp = *model_.vol;
    const int dim = mesh_->dim();
    const auto d = static_cast<std::size_t>(dim);
    double energy = 0.0;
    for (std::size_t e = 0; e < dm_inv_.size(); ++e) {
        const auto el = mesh_->element(e);
        const Mat f = edge_matrix(dim, el, positions) * dm_inv_[e];
        try {
            energy += volume_[e] * w_vol_active(f, vp);
        } catch (const std::domain_error& err) {
            throw InvertedElementError(e, "element " + std::to_string(e) + ": " + err.what());
        }
        if (!want_grad) {
            continue;
        }
        const Mat g = volume_[e] * w_vol_gradient(f, vp) * dm_inv_[e].transpose();
        const auto base = static_cast<std::size_t>(el[0]) * d;
        for (std::size_t k = 0; k < d; ++k) {
            const auto off = static_cast<std::size_t>(el[k + 1]) * d;
            for (std::size_t c = 0; c < d; ++c) {
                const double v = g(static_cast<int>(c), static_cast<int>(k));
                grad[off + c] += v;
                grad[base + c] -= v;
            }
        }
    }
    return energy;
}

double Assembler::energy(std::span<const double> positions) const {
    check_size(positions);
    double e = pair_terms(positions, {}, false);
    if (model_.vol) {
        e += volumetric_terms(positions, {}, false);
    }
    return e;
}

double Assembler::energy_and_gradient(std::span<const double> positions, std::span<double> grad) const {
    check_size(positions);
    if (grad.size() != positions.size()) {
        throw std::invalid_argument("Assembler: gradient buffer has the wrong size");
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    double e = pair_terms(positions, grad, true);
    if (model_.vol) {
        e += volumetric_terms(positions, grad, true);
    }
    return e;
}

double total_energy(const Mesh& mesh, const DeformationState& state, const EnergyModel& model) {
    return Assembler(mesh, model).energy(state.positions);
}

std::vector<double> energy_gradient(const Mesh& mesh, const DeformationState& state, const EnergyModel& model) {
    Assembler a(mesh, model);
    std::vector<double> g(state.positions.size());
    a.energy_and_gradient(state.positions, g);
    return g;
}

double element_energy(const Mesh& mesh, std::size_t e, std::span<const double> positions,
                      const EnergyModel& model) {
    const auto el = mesh.element(e);
    const int dim = mesh.dim();
    const double w = pair_weight(mesh, e, model);
    double energy = 0.0;
    for (std::size_t a = 0; a < el.size(); ++a) {
        for (std::size_t b = a + 1; b < el.size(); ++b) {
            const double r = distance(positions, dim, el[a], el[b]) / distance(mesh.coords(), dim, el[a], el[b]);
            energy += w * model.pair.energy(r);
        }
    }
    if (model.vol) {
        energy += mesh.element_volume(e) * w_vol_active(element_gradient(mesh, e, positions), *model.vol);
    }
    return energy;
}

std::size_t FixedDofs::free_count() const {
    return static_cast<std::size_t>(std::count(fixed.begin(), fixed.end(), 0));
}

FixedDofs apply_bc(const Mesh& mesh, const BoundaryCondition& bc) {
    const int dim = mesh.dim();
    const auto d = static_cast<std::size_t>(dim);
    if (bc.xi.rows() != dim || bc.xi.cols() != dim || !bc.xi.allFinite()) {
        throw std::invalid_argument("apply_bc: macro gradient must be a finite dim x dim matrix");
    }
    FixedDofs out;
    out.fixed.assign(mesh.coords().size(), 0);
    out.values.assign(mesh.coords().begin(), mesh.coords().end());

    auto pin = [&](std::size_t i) {
        const Vec target = bc.xi * mesh.vertex(i);
        for (std::size_t c = 0; c < d; ++c) {
            out.fixed[i * d + c] = 1;
            out.values[i * d + c] = target(static_cast<int>(c));
        }
    };

    if (bc.kind == BcKind::affine_layer) {
        for (int i : boundary_layer(mesh, bc.depth)) {
            pin(static_cast<std::size_t>(i));
        }
    } else {
        constexpr double tol = 1e-12;
        for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
            const Vec x = mesh.vertex(i);
            for (Face face : bc.faces) {
                const int axis = static_cast<int>(face) / 2;
                const double level = static_cast<int>(face) % 2 == 0 ? 0.0 : 1.0;
                if (axis >= dim) {
                    throw std::invalid_argument("apply_bc: face does not exist in this dimension");
                }
                if (std::abs(x(axis) - level) <= tol) {
                    pin(i);
                    break;
                }
            }
        }
    }
    if (out.free_count() == 0) {
        throw std::invalid_argument("apply_bc: every degree of freedom is fixed, nothing to minimize");
    }
    return out;
}

}  // namespace rubbernet
