#include "rubbernet/minimize.hpp"

#include "rubbernet/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace rubbernet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Objective restricted to the free entries of the full vector.
class Reduced {
public:
    Reduced(const Objective& objective, std::vector<double> full, std::span<const char> fixed)
        : objective_(objective), full_(std::move(full)), grad_(full_.size()) {
        for (std::size_t k = 0; k < full_.size(); ++k) {
            if (fixed.empty() || fixed[k] == 0) {
                free_.push_back(k);
            }
        }
    }

    std::size_t size() const { return free_.size(); }

    std::vector<double> gather() const {
        std::vector<double> z(free_.size());
        for (std::size_t k = 0; k < free_.size(); ++k) {
            z[k] = full_[free_[k]];
        }
        return z;
    }

    const std::vector<double>& expand(std::span<const double> z) {
        for (std::size_t k = 0; k < free_.size(); ++k) {
            full_[free_[k]] = z[k];
        }
        return full_;
    }

    // Returns +inf when the energy is undefined there (inverted element,
    // collapsed pair).
    double eval(std::span<const double> z, std::span<double> g) {
        expand(z);
        double f;
        try {
            f = objective_(full_, grad_);
        } catch (const std::domain_error&) {
            return kInf;
        }
        if (!std::isfinite(f)) {
            return kInf;
        }
        for (std::size_t k = 0; k < free_.size(); ++k) {
            g[k] = grad_[free_[k]];
        }
        return f;
    }

private:
    const Objective& objective_;
    std::vector<double> full_;
    std::vector<double> grad_;
    std::vector<std::size_t> free_;
};

struct Trial {
    double alpha = 0.0;
    double f = kInf;
    double slope = 0.0;  // g(alpha) . d
    std::vector<double> z;
    std::vector<double> g;
};

class LineSearch {
public:
    LineSearch(Reduced& fn, const MinimizeSettings& s, std::span<const double> z0, double f0,
               std::span<const double> d, double slope0)
        : fn_(fn), s_(s), z0_(z0), f0_(f0), d_(d), slope0_(slope0) {}

    // Strong-Wolfe point if one is found; otherwise the best strictly
    // decreasing trial; otherwise nothing.
    std::optional<Trial> run(double alpha0) {
        Trial prev{0.0, f0_, slope0_, {}, {}};
        double alpha = alpha0;
        for (int it = 0; it < s_.max_line_search && evals_ < s_.max_line_search; ++it) {
            Trial cur = eval(alpha);
            if (!sufficient(cur) || (it > 0 && cur.f >= prev.f && !flat(cur))) {
                return finish(zoom(std::move(prev), std::move(cur)));
            }
            if (std::abs(cur.slope) <= -s_.c2 * slope0_) {
                return cur;
            }
            if (cur.slope >= 0.0) {
                return finish(zoom(std::move(cur), std::move(prev)));
            }
            prev = std::move(cur);
            alpha *= 2.0;
        }
        return finish(std::nullopt);
    }

private:
    // Energies within roundoff of f0 cannot resolve the decrease; there the
    // slopes alone drive the search and f <= f0 is enough.
    bool flat(const Trial& t) const { return std::abs(t.f - f0_) <= 1e-13 * std::max(1.0, std::abs(f0_)); }

    bool sufficient(const Trial& t) const {
        return std::isfinite(t.f) && (t.f <= f0_ + s_.c1 * t.alpha * slope0_ || (t.f <= f0_ && flat(t)));
    }

    Trial eval(double alpha) {
        ++evals_;
        Trial t;
        t.alpha = alpha;
        t.z.assign(z0_.begin(), z0_.end());
        simd::axpy(alpha, d_, t.z);
        t.g.resize(t.z.size());
        t.f = fn_.eval(t.z, t.g);
        if (std::isfinite(t.f)) {
            t.slope = simd::dot(t.g, d_);
            if (t.f < f0_ && (!best_ || t.f < best_->f)) {
                best_ = t;
            }
        }
        return t;
    }

    std::optional<Trial> finish(std::optional<Trial> wolfe) {
        if (wolfe) {
            return wolfe;
        }
        return best_;
    }

    // lo satisfies sufficient decrease; the minimizer is bracketed between lo and hi.
    std::optional<Trial> zoom(Trial lo, Trial hi) {
        while (evals_ < s_.max_line_search) {
            const double a = std::min(lo.alpha, hi.alpha);
            const double b = std::max(lo.alpha, hi.alpha);
            if (b - a <= 1e-16 * std::max(1.0, b)) {
                break;
            }
            double alpha = 0.5 * (a + b);
            if (std::isfinite(hi.f)) {
                // minimizer of the cubic interpolating f and slope at both ends
                const double d1 = lo.slope + hi.slope - 3.0 * (lo.f - hi.f) / (lo.alpha - hi.alpha);
                const double disc = d1 * d1 - lo.slope * hi.slope;
                if (disc >= 0.0) {
                    const double d2 = std::copysign(std::sqrt(disc), hi.alpha - lo.alpha);
                    const double cand = hi.alpha - (hi.alpha - lo.alpha) * (hi.slope + d2 - d1) /
                                                       (hi.slope - lo.slope + 2.0 * d2);
                    if (std::isfinite(cand)) {
                        alpha = cand;
                    }
                }
            }
            const double margin = 0.1 * (b - a);
            alpha = std::clamp(alpha, a + margin, b - margin);

            Trial cur = eval(alpha);
            if (!sufficient(cur) || (cur.f >= lo.f && !flat(cur))) {
                hi = std::move(cur);
                continue;
            }
            if (std::abs(cur.slope) <= -s_.c2 * slope0_) {
                return cur;
            }
            if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) {
                hi = std::move(lo);
            }
            lo = std::move(cur);
        }
        return std::nullopt;
    }

    Reduced& fn_;
    const MinimizeSettings& s_;
    std::span<const double> z0_;
    double f0_;
    std::span<const double> d_;
    double slope0_;
    int evals_ = 0;
    std::optional<Trial> best_;
};

double norm(std::span<const double> v) { return std::sqrt(simd::dot(v, v)); }

struct Pair {
    std::vector<double> s;
    std::vector<double> y;
    double rho;
};

// d = -H g by the two-loop recursion.
std::vector<double> direction(const std::deque<Pair>& mem, std::span<const double> g) {
    std::vector<double> q(g.begin(), g.end());
    std::vector<double> alpha(mem.size());
    for (std::size_t k = mem.size(); k-- > 0;) {
        alpha[k] = mem[k].rho * simd::dot(mem[k].s, q);
        simd::axpy(-alpha[k], mem[k].y, q);
    }
    if (!mem.empty()) {
        const Pair& last = mem.back();
        const double gamma = simd::dot(last.s, last.y) / simd::dot(last.y, last.y);
        for (double& v : q) {
            v *= gamma;
        }
    }
    for (std::size_t k = 0; k < mem.size(); ++k) {
        const double beta = mem[k].rho * simd::dot(mem[k].y, q);
        simd::axpy(alpha[k] - beta, mem[k].s, q);
    }
    for (double& v : q) {
        v = -v;
    }
    return q;
}

}  // namespace

void MinimizeSettings::validate() const {
    if ((grad_tol && !(*grad_tol > 0.0)) || !(rel_grad_tol > 0.0) || max_iters < 1 || memory < 1 || !(c1 > 0.0) || !(c1 < c2) ||
        !(c2 < 1.0) || max_line_search < 1) {
        throw std::invalid_argument(
            "MinimizeSettings: require grad_tol > 0, max_iters >= 1, memory >= 1, 0 < c1 < c2 < 1");
    }
}

MinimizeResult minimize(const Objective& objective, std::vector<double> x0, std::span<const char> fixed,
                        const MinimizeSettings& settings) {
    settings.validate();
    if (!fixed.empty() && fixed.size() != x0.size()) {
        throw std::invalid_argument("minimize: fixed mask size does not match the state");
    }
    Reduced fn(objective, std::move(x0), fixed);
    if (fn.size() == 0) {
        throw std::invalid_argument("minimize: no free degrees of freedom");
    }

    std::vector<double> z = fn.gather();
    std::vector<double> g(z.size());
    double f = fn.eval(z, g);
    MinimizeResult result;
    if (!std::isfinite(f)) {
        result.state.positions = fn.expand(z);
        result.energy = f;
        throw MinimizeError("minimize: energy is not finite at the initial state", result);
    }
    const double tol = settings.grad_tol.value_or(settings.rel_grad_tol * (1.0 + std::abs(f)));
    double gnorm = norm(g);
    result.grad_tol = tol;
    result.energy_history.push_back(f);

    auto snapshot = [&]() {
        result.state.positions = fn.expand(z);
        result.energy = f;
        result.grad_norm = gnorm;
        return result;
    };

    std::deque<Pair> mem;
    int iter = 0;
    while (gnorm > tol && iter < settings.max_iters) {
        std::vector<double> d = direction(mem, g);
        double slope = simd::dot(g, d);
        if (!(slope < 0.0)) {
            mem.clear();
            d = direction(mem, g);
            slope = simd::dot(g, d);
        }
        std::optional<Trial> step =
            LineSearch(fn, settings, z, f, d, slope).run(mem.empty() ? std::min(1.0, 1.0 / gnorm) : 1.0);
        if (!step && !mem.empty()) {
            // quasi-Newton direction failed: steepest descent from scratch
            mem.clear();
            d = direction(mem, g);
            slope = simd::dot(g, d);
            step = LineSearch(fn, settings, z, f, d, slope).run(std::min(1.0, 1.0 / gnorm));
        }
        if (!step) {
            result.iterations = iter;
            std::ostringstream msg;
            msg << "minimize: line search cannot decrease the energy (grad norm " << gnorm << ", tolerance " << tol
                << ", iteration " << iter << ")";
            throw MinimizeError(msg.str(), snapshot());
        }

        Pair p;
        p.s = step->z;
        simd::axpy(-1.0, z, p.s);
        p.y = step->g;
        simd::axpy(-1.0, g, p.y);
        const double sy = simd::dot(p.s, p.y);
        if (sy > 1e-12 * norm(p.s) * norm(p.y)) {
            p.rho = 1.0 / sy;
            mem.push_back(std::move(p));
            if (mem.size() > static_cast<std::size_t>(settings.memory)) {
                mem.pop_front();
            }
        }
        z = std::move(step->z);
        g = std::move(step->g);
        f = step->f;
        gnorm = norm(g);
        ++iter;
        result.energy_history.push_back(f);
    }
    result.iterations = iter;
    result.converged = gnorm <= tol;
    return snapshot();
}

MinimizeResult minimize(const Mesh& mesh, const EnergyModel& model, const FixedDofs& bc,
                        const DeformationState& init, const MinimizeSettings& settings) {
    if (init.positions.size() != mesh.coords().size() || bc.fixed.size() != init.positions.size()) {
        throw std::invalid_argument("minimize: state or boundary data does not match the mesh");
    }
    Assembler assembler(mesh, model);
    std::vector<double> x0 = init.positions;
    for (std::size_t k = 0; k < x0.size(); ++k) {
        if (bc.fixed[k] != 0) {
            x0[k] = bc.values[k];
        }
    }
    const Objective objective = [&assembler](std::span<const double> x, std::span<double> g) {
        return assembler.energy_and_gradient(x, g);
    };
    return minimize(objective, std::move(x0), bc.fixed, settings);
}

DeformationState affine_init(const Mesh& mesh, const Mat& xi) {
    if (xi.rows() != mesh.dim() || xi.cols() != mesh.dim()) {
        throw std::invalid_argument("affine_init: macro gradient has the wrong size");
    }
    DeformationState s;
    s.positions.resize(mesh.coords().size());
    const auto d = static_cast<std::size_t>(mesh.dim());
    for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
        const Vec y = xi * mesh.vertex(i);
        for (std::size_t c = 0; c < d; ++c) {
            s.positions[i * d + c] = y(static_cast<int>(c));
        }
    }
    return s;
}

}  // namespace rubbernet
