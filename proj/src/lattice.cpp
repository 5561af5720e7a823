#include "rubbernet/lattice.hpp"

#include "rubbernet/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace rubbernet {

namespace {

// 53-bit uniform deviate in [0, 1) from the raw engine output, so the
// stream does not depend on the standard library's distribution code.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void uniform_in_ball(std::mt19937_64& rng, int dim, double radius, double* out) {
    for (;;) {
        double r2 = 0.0;
        for (int c = 0; c < dim; ++c) {
            out[c] = 2.0 * uniform01(rng) - 1.0;
            r2 += out[c] * out[c];
        }
        if (r2 <= 1.0) {
            break;
        }
    }
    for (int c = 0; c < dim; ++c) {
        out[c] *= radius;
    }
}

void check_box(const Box& box, int dim) {
    if (box.dim() != dim || box.hi.size() != box.lo.size()) {
        throw std::invalid_argument("box dimension does not match");
    }
    for (int c = 0; c < dim; ++c) {
        if (!(box.hi[static_cast<std::size_t>(c)] > box.lo[static_cast<std::size_t>(c)])) {
            throw std::invalid_argument("box is empty");
        }
    }
}

std::vector<double> jittered_grid(const StochasticLatticeSpec& spec, const Box& box, std::mt19937_64& rng) {
    const int dim = spec.dim;
    const double s = spec.spacing();
    const double jitter = spec.jitter_radius();
    std::vector<std::int64_t> count(static_cast<std::size_t>(dim));
    for (int c = 0; c < dim; ++c) {
        const double len = box.hi[static_cast<std::size_t>(c)] - box.lo[static_cast<std::size_t>(c)];
        count[static_cast<std::size_t>(c)] = static_cast<std::int64_t>(std::ceil(len / s - 1e-12)) + 1;
    }
    std::vector<double> out;
    std::vector<std::int64_t> k(static_cast<std::size_t>(dim), 0);
    double offset[3];
    for (;;) {
        uniform_in_ball(rng, dim, jitter, offset);
        for (int c = 0; c < dim; ++c) {
            out.push_back(box.lo[static_cast<std::size_t>(c)] + static_cast<double>(k[static_cast<std::size_t>(c)]) * s + offset[c]);
        }
        int axis = 0;
        while (axis < dim && ++k[static_cast<std::size_t>(axis)] == count[static_cast<std::size_t>(axis)]) {
            k[static_cast<std::size_t>(axis)] = 0;
            ++axis;
        }
        if (axis == dim) {
            break;
        }
    }
    return out;
}

std::vector<double> matern_hardcore(const StochasticLatticeSpec& spec, const Box& box, std::mt19937_64& rng) {
    const int dim = spec.dim;
    const auto d = static_cast<std::size_t>(dim);
    Box grown = box;
    for (std::size_t c = 0; c < d; ++c) {
        grown.lo[c] -= spec.r_min;
        grown.hi[c] += spec.r_min;
    }
    std::poisson_distribution<long> poisson(spec.intensity * grown.volume());
    const auto n = static_cast<std::size_t>(poisson(rng));
    std::vector<double> proposals(n * d);
    std::vector<double> marks(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < d; ++c) {
            proposals[i * d + c] = grown.lo[c] + (grown.hi[c] - grown.lo[c]) * uniform01(rng);
        }
        marks[i] = uniform01(rng);
    }
    std::vector<double> out;
    if (n == 0) {
        return out;
    }
    const PointGrid grid(proposals, dim, spec.r_min);
    for (std::size_t i = 0; i < n; ++i) {
        const double* p = proposals.data() + i * d;
        bool keep = true;
        // a proposal survives if no lighter-marked proposal is closer than r_min
        for (int j : grid.within(p, spec.r_min)) {
            const auto uj = static_cast<std::size_t>(j);
            if (uj == i) {
                continue;
            }
            double dist2 = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = p[c] - proposals[uj * d + c];
                dist2 += diff * diff;
            }
            if (dist2 < spec.r_min * spec.r_min && (marks[uj] < marks[i] || (marks[uj] == marks[i] && uj < i))) {
                keep = false;
                break;
            }
        }
        if (keep && box.contains(p)) {
            out.insert(out.end(), p, p + d);
        }
    }
    return out;
}

}  // namespace

void StochasticLatticeSpec::validate() const {
    if (dim != 2 && dim != 3) {
        throw std::invalid_argument("lattice: dim must be 2 or 3");
    }
    if (!(intensity > 0.0) || !(r_min > 0.0) || !std::isfinite(intensity)) {
        throw std::invalid_argument("lattice: require intensity > 0 and r_min > 0");
    }
    if (r_cov != 0.0 && !(r_cov > 0.5 * r_min)) {
        throw std::invalid_argument("lattice: covering radius must exceed r_min / 2");
    }
    if (r_min > spacing()) {
        throw InfeasibleLatticeError("lattice: hard-core distance " + std::to_string(r_min) +
                                     " exceeds the mean spacing " + std::to_string(spacing()) +
                                     " implied by intensity " + std::to_string(intensity));
    }
    if (kind == LatticeKind::matern_hardcore && r_cov == 0.0) {
        throw std::invalid_argument("lattice: matern-hardcore needs an explicit covering radius");
    }
}

double StochasticLatticeSpec::spacing() const { return std::pow(intensity, -1.0 / dim); }

double StochasticLatticeSpec::jitter_radius() const { return 0.5 * (spacing() - r_min); }

double StochasticLatticeSpec::covering_radius() const {
    if (r_cov > 0.0) {
        return r_cov;
    }
    return 0.5 * std::sqrt(static_cast<double>(dim)) * spacing() + jitter_radius();
}

bool Box::contains(const double* p) const {
    for (std::size_t c = 0; c < lo.size(); ++c) {
        if (p[c] < lo[c] || p[c] > hi[c]) {
            return false;
        }
    }
    return true;
}

double Box::volume() const {
    double v = 1.0;
    for (std::size_t c = 0; c < lo.size(); ++c) {
        v *= hi[c] - lo[c];
    }
    return v;
}

std::vector<double> stochastic_lattice(const StochasticLatticeSpec& spec, const Box& box) {
    spec.validate();
    check_box(box, spec.dim);
    std::mt19937_64 rng(spec.seed);
    return spec.kind == LatticeKind::jittered_grid ? jittered_grid(spec, box, rng) : matern_hardcore(spec, box, rng);
}

std::vector<double> rescale_and_clip(std::span<const double> points, int dim, double h, const Box& box) {
    if (!(h > 0.0)) {
        throw std::invalid_argument("rescale_and_clip: h must be > 0");
    }
    const auto d = static_cast<std::size_t>(dim);
    std::vector<double> out;
    double y[3];
    for (std::size_t i = 0; i + d <= points.size(); i += d) {
        for (std::size_t c = 0; c < d; ++c) {
            y[c] = h * points[i + c];
        }
        if (box.contains(y)) {
            out.insert(out.end(), y, y + d);
        }
    }
    return out;
}

AdmissibilityReport check_admissibility(std::span<const double> points, int dim, const Box& box,
                                        double r_claim, double R_claim) {
    const auto d = static_cast<std::size_t>(dim);
    const std::size_t n = points.size() / d;
    if (n == 0) {
        throw std::invalid_argument("check_admissibility: no points");
    }
    if (n < 2) {
        throw std::invalid_argument("check_admissibility: need at least two points");
    }
    if (!(r_claim > 0.0) || !(R_claim > 0.0)) {
        throw std::invalid_argument("check_admissibility: claims must be positive");
    }
    check_box(box, dim);

    // bucket size from the mean spacing over the points' bounding box
    double bbox_vol = 1.0;
    for (std::size_t c = 0; c < d; ++c) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t i = 0; i < n; ++i) {
            lo = std::min(lo, points[i * d + c]);
            hi = std::max(hi, points[i * d + c]);
        }
        bbox_vol *= std::max(hi - lo, r_claim);
    }
    const PointGrid grid(points, dim, std::pow(bbox_vol / static_cast<double>(n), 1.0 / dim));

    AdmissibilityReport report;
    report.measured_r = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        report.measured_r = std::min(report.measured_r, grid.nearest(points.data() + i * d, static_cast<int>(i)).second);
    }

    const double probe = r_claim / 4.0;
    std::vector<std::int64_t> count(d);
    for (std::size_t c = 0; c < d; ++c) {
        count[c] = static_cast<std::int64_t>(std::ceil((box.hi[c] - box.lo[c]) / probe)) + 1;
    }
    std::vector<std::int64_t> k(d, 0);
    double q[3];
    for (;;) {
        for (std::size_t c = 0; c < d; ++c) {
            const double t = static_cast<double>(k[c]) / static_cast<double>(count[c] - 1);
            q[c] = box.lo[c] + t * (box.hi[c] - box.lo[c]);
        }
        report.measured_R = std::max(report.measured_R, grid.nearest(q).second);
        std::size_t axis = 0;
        while (axis < d && ++k[axis] == count[axis]) {
            k[axis] = 0;
            ++axis;
        }
        if (axis == d) {
            break;
        }
    }
    report.separation_ok = report.measured_r >= r_claim;
    report.covering_ok = report.measured_R <= R_claim;
    return report;
}

void assess_delaunay_quality(const Mesh& mesh, const Box& window, double max_radius_edge,
                             AdmissibilityReport& report) {
    if (window.dim() != mesh.dim()) {
        throw std::invalid_argument("assess_delaunay_quality: window dimension mismatch");
    }
    double worst = 0.0;
    std::size_t assessed = 0;
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        const Ball ball = circumball(mesh, e);
        bool inside = true;
        for (int c = 0; c < mesh.dim(); ++c) {
            const auto k = static_cast<std::size_t>(c);
            inside = inside && ball.center(c) - ball.radius >= window.lo[k] && ball.center(c) + ball.radius <= window.hi[k];
        }
        if (inside) {
            worst = std::max(worst, radius_edge_ratio(mesh, e));
            ++assessed;
        }
    }
    report.delaunay_assessed = assessed;
    report.delaunay_quality = worst;
    report.delaunay_regular = worst <= max_radius_edge;
}

PointGrid::PointGrid(std::span<const double> points, int dim, double cell)
    : points_(points), dim_(dim), cell_(cell) {
    if (!(cell > 0.0)) {
        throw std::invalid_argument("PointGrid: cell size must be > 0");
    }
    const auto d = static_cast<std::size_t>(dim);
    const std::size_t n = points.size() / d;
    origin_.assign(d, std::numeric_limits<double>::infinity());
    std::vector<double> top(d, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < d; ++c) {
            origin_[c] = std::min(origin_[c], points[i * d + c]);
            top[c] = std::max(top[c], points[i * d + c]);
        }
    }
    extent_.resize(d);
    std::size_t cells = 1;
    for (std::size_t c = 0; c < d; ++c) {
        extent_[c] = n == 0 ? 1 : static_cast<std::int64_t>(std::floor((top[c] - origin_[c]) / cell_)) + 1;
        cells *= static_cast<std::size_t>(extent_[c]);
    }
    std::vector<std::size_t> bucket(n);
    start_.assign(cells + 1, 0);
    std::vector<std::int64_t> idx(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < d; ++c) {
            idx[c] = std::clamp<std::int64_t>(cell_of(points[i * d + c], static_cast<int>(c)), 0, extent_[c] - 1);
        }
        bucket[i] = static_cast<std::size_t>(flat(idx));
        ++start_[bucket[i] + 1];
    }
    for (std::size_t b = 0; b < cells; ++b) {
        start_[b + 1] += start_[b];
    }
    items_.resize(n);
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < n; ++i) {
        items_[fill[bucket[i]]++] = static_cast<int>(i);
    }
}

std::int64_t PointGrid::cell_of(double x, int axis) const {
    return static_cast<std::int64_t>(std::floor((x - origin_[static_cast<std::size_t>(axis)]) / cell_));
}

std::int64_t PointGrid::flat(const std::vector<std::int64_t>& c) const {
    std::int64_t f = 0;
    for (std::size_t a = c.size(); a-- > 0;) {
        f = f * extent_[a] + c[a];
    }
    return f;
}

std::pair<int, double> PointGrid::nearest(const double* q, int exclude) const {
    const auto d = static_cast<std::size_t>(dim_);
    std::vector<std::int64_t> home(d);
    std::int64_t max_ring = 0;
    for (std::size_t c = 0; c < d; ++c) {
        home[c] = cell_of(q[c], static_cast<int>(c));
        max_ring = std::max({max_ring, std::abs(home[c]), std::abs(home[c] - (extent_[c] - 1))});
    }
    int best = -1;
    double best2 = std::numeric_limits<double>::infinity();
    std::vector<std::int64_t> idx(d);
    for (std::int64_t ring = 0; ring <= max_ring; ++ring) {
        std::vector<std::int64_t> lo(d);
        std::vector<std::int64_t> hi(d);
        bool any = true;
        for (std::size_t c = 0; c < d; ++c) {
            lo[c] = std::max<std::int64_t>(home[c] - ring, 0);
            hi[c] = std::min<std::int64_t>(home[c] + ring, extent_[c] - 1);
            any = any && lo[c] <= hi[c];
        }
        if (any) {
            idx = lo;
            for (;;) {
                std::int64_t cheb = 0;
                for (std::size_t c = 0; c < d; ++c) {
                    cheb = std::max(cheb, std::abs(idx[c] - home[c]));
                }
                if (cheb == ring) {
                    const auto b = static_cast<std::size_t>(flat(idx));
                    for (std::size_t k = start_[b]; k < start_[b + 1]; ++k) {
                        const int j = items_[k];
                        if (j == exclude) {
                            continue;
                        }
                        double dist2 = 0.0;
                        for (std::size_t c = 0; c < d; ++c) {
                            const double diff = q[c] - points_[static_cast<std::size_t>(j) * d + c];
                            dist2 += diff * diff;
                        }
                        if (dist2 < best2 || (dist2 == best2 && j < best)) {
                            best2 = dist2;
                            best = j;
                        }
                    }
                }
                std::size_t axis = 0;
                while (axis < d && ++idx[axis] > hi[axis]) {
                    idx[axis] = lo[axis];
                    ++axis;
                }
                if (axis == d) {
                    break;
                }
            }
        }
        // anything in a farther ring is at least ring * cell away
        if (best >= 0 && std::sqrt(best2) <= static_cast<double>(ring) * cell_) {
            break;
        }
    }
    return {best, std::sqrt(best2)};
}

std::vector<int> PointGrid::within(const double* q, double radius) const {
    const auto d = static_cast<std::size_t>(dim_);
    std::vector<std::int64_t> lo(d);
    std::vector<std::int64_t> hi(d);
    for (std::size_t c = 0; c < d; ++c) {
        lo[c] = std::max<std::int64_t>(cell_of(q[c] - radius, static_cast<int>(c)), 0);
        hi[c] = std::min<std::int64_t>(cell_of(q[c] + radius, static_cast<int>(c)), extent_[c] - 1);
        if (lo[c] > hi[c]) {
            return {};
        }
    }
    std::vector<int> out;
    std::vector<std::int64_t> idx = lo;
    for (;;) {
        const auto b = static_cast<std::size_t>(flat(idx));
        out.insert(out.end(), items_.begin() + static_cast<std::ptrdiff_t>(start_[b]),
                   items_.begin() + static_cast<std::ptrdiff_t>(start_[b + 1]));
        std::size_t axis = 0;
        while (axis < d && ++idx[axis] > hi[axis]) {
            idx[axis] = lo[axis];
            ++axis;
        }
        if (axis == d) {
            break;
        }
    }
    return out;
}

}  // namespace rubbernet
