#pragma once

// Limited-memory BFGS with a strong-Wolfe line search over the free degrees
// of freedom. Accepted iterates never increase the energy.

#include "rubbernet/assembly.hpp"
#include "rubbernet/mesh.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace rubbernet {

struct MinimizeSettings {
    /// Gradient-norm tolerance on the free dofs. Unset: rel_grad_tol * (1 + |E(init)|).
    std::optional<double> grad_tol;
    double rel_grad_tol = 1e-8;
    int max_iters = 2000;
    int memory = 10;
    double c1 = 1e-4;  // sufficient decrease
    double c2 = 0.9;   // curvature
    int max_line_search = 40;

    void validate() const;
};

struct MinimizeResult {
    DeformationState state;
    double energy = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    double grad_tol = 0.0;
    /// Energy after each accepted iteration, starting with the initial energy.
    std::vector<double> energy_history;
};

/// Raised when the energy cannot be evaluated at the start or the solver can
/// no longer decrease it; `best` holds the last accepted iterate.
class MinimizeError : public std::runtime_error {
public:
    MinimizeError(const std::string& what, MinimizeResult best)
        : std::runtime_error(what), best_(std::move(best)) {}
    const MinimizeResult& best() const { return best_; }

private:
    MinimizeResult best_;
};

/// Objective: returns f(x) and writes the full gradient into g.
using Objective = std::function<double(std::span<const double> x, std::span<double> g)>;

/// Minimizes over entries with fixed[k] == 0; fixed entries keep their value
/// from x0. An empty `fixed` means every entry is free.
MinimizeResult minimize(const Objective& objective, std::vector<double> x0, std::span<const char> fixed,
                        const MinimizeSettings& settings);

/// Minimizes the assembled energy with the boundary values of `bc` imposed on
/// top of `init`.
MinimizeResult minimize(const Mesh& mesh, const EnergyModel& model, const FixedDofs& bc,
                        const DeformationState& init, const MinimizeSettings& settings);

/// Every vertex placed at xi * x_i.
DeformationState affine_init(const Mesh& mesh, const Mat& xi);

}  // namespace rubbernet
