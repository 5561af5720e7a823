#include "rubbernet/chain_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rubbernet {

namespace {

// Exact rationals 3, 9/5, 297/175, 1539/875.
constexpr double kSeries1 = 3.0;
constexpr double kSeries3 = 9.0 / 5.0;
constexpr double kSeries5 = 297.0 / 175.0;
constexpr double kSeries7 = 1539.0 / 875.0;

// Below this |x| the series branches of ln(x/sinh x) and L(x) are used.
constexpr double kSmallX = 0.1;

}  // namespace

void ChainParams::validate() const {
    if (!(k > 0.0) || !(beta > 0.0) || !(n > 0.0) || !std::isfinite(c)) {
        throw std::invalid_argument("ChainParams: require k > 0, beta > 0, n > 0 and finite c");
    }
}

void QuadraticSpring::validate() const {
    if (!(stiffness > 0.0) || !std::isfinite(stiffness)) {
        throw std::invalid_argument("QuadraticSpring: stiffness must be finite and > 0");
    }
}

PairPotential::PairPotential(ChainParams p) : params_(p) { p.validate(); }

PairPotential::PairPotential(QuadraticSpring s) : params_(s) { s.validate(); }

double PairPotential::energy(double r) const {
    if (const auto* s = std::get_if<QuadraticSpring>(&params_)) {
        return quadratic_spring_energy(r, s->stiffness);
    }
    return chain_energy(r, std::get<ChainParams>(params_));
}

double PairPotential::derivative(double r) const {
    if (const auto* s = std::get_if<QuadraticSpring>(&params_)) {
        return quadratic_spring_derivative(r, s->stiffness);
    }
    return chain_energy_derivative(r, std::get<ChainParams>(params_));
}

double inv_langevin_series(double rho) {
    const double r2 = rho * rho;
    return rho * (kSeries1 + r2 * (kSeries3 + r2 * (kSeries5 + r2 * kSeries7)));
}

double inv_langevin_series_derivative(double rho) {
    const double r2 = rho * rho;
    return kSeries1 + r2 * (3.0 * kSeries3 + r2 * (5.0 * kSeries5 + r2 * (7.0 * kSeries7)));
}

double log_x_over_sinh(double x) {
    const double ax = std::abs(x);
    if (ax < kSmallX) {
        // -ln(sinh x / x) = -(x^2/6 - x^4/180 + x^6/2835 - x^8/37800 + x^10/467775)
        const double x2 = ax * ax;
        return -x2 * (1.0 / 6.0 +
                      x2 * (-1.0 / 180.0 + x2 * (1.0 / 2835.0 + x2 * (-1.0 / 37800.0 + x2 / 467775.0))));
    }
    if (ax < 1.0) {
        return -std::log(std::sinh(ax) / ax);
    }
    // sinh x = e^x (1 - e^{-2x}) / 2, so no overflow for large x.
    return std::log(ax) - ax - std::log1p(-std::exp(-2.0 * ax)) + std::numbers::ln2;
}

double langevin(double x) {
    const double ax = std::abs(x);
    double v;
    if (ax < kSmallX) {
        const double x2 = ax * ax;
        v = ax * (1.0 / 3.0 +
                  x2 * (-1.0 / 45.0 + x2 * (2.0 / 945.0 + x2 * (-1.0 / 4725.0 + x2 * 2.0 / 93555.0))));
    } else {
        v = 1.0 / std::tanh(ax) - 1.0 / ax;
    }
    return std::copysign(v, x);
}

double chain_energy(double r, const ChainParams& p) {
    if (r < 0.0 || std::isnan(r)) {
        throw std::domain_error("chain_energy: stretch ratio must be >= 0, got " + std::to_string(r));
    }
    const double scale = p.k / p.beta;
    if (r == 0.0) {
        return -p.c / p.beta;
    }
    const double rho = r / std::sqrt(p.n);
    const double x = inv_langevin_series(rho);
    return scale * p.n * (rho * x + log_x_over_sinh(x)) - p.c / p.beta;
}

double chain_energy_derivative(double r, const ChainParams& p) {
    if (r < 0.0 || std::isnan(r)) {
        throw std::domain_error("chain_energy_derivative: stretch ratio must be >= 0");
    }
    if (r == 0.0) {
        return 0.0;
    }
    const double sqrt_n = std::sqrt(p.n);
    const double rho = r / sqrt_n;
    const double x = inv_langevin_series(rho);
    const double dx = inv_langevin_series_derivative(rho);
    return (p.k / p.beta) * sqrt_n * (x + (rho - langevin(x)) * dx);
}

double quadratic_spring_energy(double r, double stiffness) { return stiffness * r * r; }

double quadratic_spring_derivative(double r, double stiffness) { return 2.0 * stiffness * r; }

void GrowthBounds::validate() const {
    if (!(p > 1.0) || !(c_lo > 0.0) || !(c_hi >= c_lo)) {
        throw std::invalid_argument("GrowthBounds: require p > 1 and 0 < c_lo <= c_hi");
    }
}

GrowthReport check_growth_condition(const PairPotential& potential, const GrowthBounds& bounds,
                                    double r_max, std::size_t samples) {
    bounds.validate();
    if (samples < 2 || !(r_max > 0.0)) {
        throw std::invalid_argument("check_growth_condition: need samples >= 2 and r_max > 0");
    }
    GrowthReport report;
    report.worst_margin = std::numeric_limits<double>::infinity();

    auto visit = [&](double r) {
        const double w = potential.energy(r);
        const double rp = std::pow(r, bounds.p);
        const double margin = std::min(w - (bounds.c_lo * rp - 1.0), bounds.c_hi * (rp + 1.0) - w);
        if (margin < report.worst_margin) {
            report.worst_margin = margin;
            report.witness = r;
        }
    };

    visit(0.0);
    // log-uniform over six decades below r_max
    const std::size_t m = samples - 1;
    const double lo = std::log(r_max) - 6.0 * std::numbers::ln10;
    const double hi = std::log(r_max);
    for (std::size_t i = 0; i < m; ++i) {
        const double t = m == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(m - 1);
        visit(i + 1 == m ? r_max : std::exp(lo + t * (hi - lo)));
    }
    report.holds = report.worst_margin >= 0.0;
    return report;
}

}  // namespace rubbernet
