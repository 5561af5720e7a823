#pragma once

// Pair potentials acting on the stretch ratio r = |v_i - v_j| / |x_i - x_j|
// of a mesh edge: the Langevin-chain free energy (with the inverse Langevin
// function replaced by its order-7 series) and a quadratic spring.

#include <cstddef>
#include <variant>

namespace rubbernet {

struct ChainParams {
    double k = 1.0;     // Boltzmann-like constant
    double beta = 1.0;  // inverse absolute temperature
    double c = 0.0;     // additive constant
    double n = 8.0;     // segments per chain
    double l = 1.0;     // segment length; informational only

    void validate() const;
};

struct QuadraticSpring {
    double stiffness = 1.0;

    void validate() const;
};

/// Either potential; evaluation is defined for every r >= 0.
class PairPotential {
public:
    PairPotential() : params_(ChainParams{}) {}
    explicit PairPotential(ChainParams p);
    explicit PairPotential(QuadraticSpring s);

    static PairPotential langevin(ChainParams p) { return PairPotential(p); }
    static PairPotential quadratic(double stiffness) { return PairPotential(QuadraticSpring{stiffness}); }

    bool is_quadratic() const { return std::holds_alternative<QuadraticSpring>(params_); }
    const ChainParams& chain() const { return std::get<ChainParams>(params_); }
    const QuadraticSpring& spring() const { return std::get<QuadraticSpring>(params_); }

    double energy(double r) const;
    double derivative(double r) const;

private:
    std::variant<ChainParams, QuadraticSpring> params_;
};

/// 3p + 9/5 p^3 + 297/175 p^5 + 1539/875 p^7.
double inv_langevin_series(double rho);
/// d/drho of inv_langevin_series.
double inv_langevin_series_derivative(double rho);

/// ln(x / sinh x), finite for every finite x.
double log_x_over_sinh(double x);
/// Langevin function coth x - 1/x.
double langevin(double x);

double chain_energy(double r, const ChainParams& p);
double chain_energy_derivative(double r, const ChainParams& p);

double quadratic_spring_energy(double r, double stiffness);
double quadratic_spring_derivative(double r, double stiffness);

struct GrowthBounds {
    double p = 8.0;
    double c_lo = 1.0;
    double c_hi = 1.0;

    void validate() const;
};

struct GrowthReport {
    bool holds = false;
    // min over samples of the smaller of (W - lower) and (upper - W); negative
    // means a violation.
    double worst_margin = 0.0;
    double witness = 0.0;
};

/// Samples c_lo r^p - 1 <= W(r) <= c_hi (r^p + 1) at r = 0 and on a
/// log-uniform grid of `samples - 1` points ending at r_max.
GrowthReport check_growth_condition(const PairPotential& potential, const GrowthBounds& bounds,
                                    double r_max, std::size_t samples);

}  // namespace rubbernet
