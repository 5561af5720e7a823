#include "rubbernet/delaunay.hpp"

#include "rubbernet/predicates.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace rubbernet {

namespace {

constexpr int kInfinite = -1;

struct Simplex {
    std::array<int, 4> v{};
    bool alive = true;
};

std::uint64_t morton_spread(std::uint64_t x, int dim) {
    std::uint64_t out = 0;
    for (int b = 0; b < 20; ++b) {
        out |= ((x >> b) & 1u) << (b * dim);
    }
    return out;
}

class Builder {
public:
    Builder(int dim, std::span<const double> pts) : dim_(dim), pts_(pts) {}

    Triangulation run() {
        const std::size_t n = pts_.size() / static_cast<std::size_t>(dim_);
        std::vector<int> order = insertion_order(n);
        reject_duplicates(n);
        std::array<int, 4> init = initial_simplex(order);
        seed(init);
        for (int p : order) {
            if (std::find(init.begin(), init.begin() + dim_ + 1, p) == init.begin() + dim_ + 1) {
                insert(p);
            }
        }
        Triangulation t;
        t.dim = dim_;
        for (const Simplex& s : simplices_) {
            if (s.alive && !is_ghost(s)) {
                t.simplices.insert(t.simplices.end(), s.v.begin(), s.v.begin() + dim_ + 1);
            }
        }
        return t;
    }

private:
    const double* point(int i) const { return pts_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(dim_); }

    bool is_ghost(const Simplex& s) const {
        return std::find(s.v.begin(), s.v.begin() + dim_ + 1, kInfinite) != s.v.begin() + dim_ + 1;
    }

    std::vector<int> insertion_order(std::size_t n) const {
        std::vector<double> lo(static_cast<std::size_t>(dim_), std::numeric_limits<double>::infinity());
        std::vector<double> hi(static_cast<std::size_t>(dim_), -std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < n; ++i) {
            for (int c = 0; c < dim_; ++c) {
                const double x = point(static_cast<int>(i))[c];
                if (!std::isfinite(x)) {
                    throw std::invalid_argument("delaunay: non-finite coordinate");
                }
                lo[static_cast<std::size_t>(c)] = std::min(lo[static_cast<std::size_t>(c)], x);
                hi[static_cast<std::size_t>(c)] = std::max(hi[static_cast<std::size_t>(c)], x);
            }
        }
        std::vector<std::uint64_t> key(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t k = 0;
            for (int c = 0; c < dim_; ++c) {
                const double span = hi[static_cast<std::size_t>(c)] - lo[static_cast<std::size_t>(c)];
                const double t = span > 0.0 ? (point(static_cast<int>(i))[c] - lo[static_cast<std::size_t>(c)]) / span : 0.0;
                const auto q = static_cast<std::uint64_t>(std::min(t * 1023.0, 1023.0));
                k |= morton_spread(q, dim_) << c;
            }
            key[i] = k;
        }
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return key[static_cast<std::size_t>(a)] < key[static_cast<std::size_t>(b)];
        });
        return order;
    }

    void reject_duplicates(std::size_t n) const {
        std::vector<int> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        auto less = [&](int a, int b) {
            return std::lexicographical_compare(point(a), point(a) + dim_, point(b), point(b) + dim_);
        };
        std::sort(idx.begin(), idx.end(), less);
        for (std::size_t k = 1; k < n; ++k) {
            if (std::equal(point(idx[k - 1]), point(idx[k - 1]) + dim_, point(idx[k]))) {
                throw std::invalid_argument("delaunay: duplicate point " + std::to_string(idx[k]));
            }
        }
    }

    bool collinear3(int a, int b, int c) const {
        // collinear in 3D iff every coordinate projection is collinear
        for (int drop = 0; drop < 3; ++drop) {
            std::array<std::array<double, 2>, 3> q{};
            int idx = 0;
            for (int p : {a, b, c}) {
                int k = 0;
                for (int cc = 0; cc < 3; ++cc) {
                    if (cc != drop) {
                        q[static_cast<std::size_t>(idx)][static_cast<std::size_t>(k++)] = point(p)[cc];
                    }
                }
                ++idx;
            }
            const std::array<const double*, 3> ptrs{q[0].data(), q[1].data(), q[2].data()};
            if (predicates::orient(2, ptrs) != 0) {
                return false;
            }
        }
        return true;
    }

    std::array<int, 4> initial_simplex(const std::vector<int>& order) const {
        if (order.size() < static_cast<std::size_t>(dim_) + 1) {
            throw std::invalid_argument("delaunay: need at least dim+1 points");
        }
        std::array<int, 4> s{order[0], -1, -1, -1};
        s[1] = order[1];  // duplicates already rejected
        auto pick = [&](auto accept) {
            for (int p : order) {
                if (accept(p)) {
                    return p;
                }
            }
            throw std::invalid_argument("delaunay: input points are affinely degenerate (collinear/coplanar)");
        };
        if (dim_ == 2) {
            s[2] = pick([&](int p) {
                const std::array<const double*, 3> q{point(s[0]), point(s[1]), point(p)};
                return predicates::orient(2, q) != 0;
            });
        } else {
            s[2] = pick([&](int p) { return p != s[0] && p != s[1] && !collinear3(s[0], s[1], p); });
            s[3] = pick([&](int p) {
                const std::array<const double*, 4> q{point(s[0]), point(s[1]), point(s[2]), point(p)};
                return predicates::orient(3, q) != 0;
            });
        }
        return s;
    }

    int orientation(const std::array<int, 4>& v) const {
        std::array<const double*, 4> q{};
        for (int k = 0; k <= dim_; ++k) {
            q[static_cast<std::size_t>(k)] = point(v[static_cast<std::size_t>(k)]);
        }
        return predicates::orient(dim_, std::span<const double* const>(q.data(), static_cast<std::size_t>(dim_) + 1));
    }

    void seed(std::array<int, 4> v) {
        if (orientation(v) < 0) {
            std::swap(v[0], v[1]);
        }
        add(v);
        for (int k = 0; k <= dim_; ++k) {
            std::array<int, 4> g = v;
            g[static_cast<std::size_t>(k)] = kInfinite;
            // infinity sits on the far side of the facet from v[k]; swap two
            // finite entries to keep the stored orientation positive
            int a = k == 0 ? 1 : 0;
            int b = (k == 0 || k == 1) ? 2 : 1;
            std::swap(g[static_cast<std::size_t>(a)], g[static_cast<std::size_t>(b)]);
            add(g);
        }
    }

    bool conflict(const Simplex& s, int p) const {
        std::array<const double*, 4> q{};
        int inf_at = -1;
        for (int k = 0; k <= dim_; ++k) {
            const int vk = s.v[static_cast<std::size_t>(k)];
            if (vk == kInfinite) {
                inf_at = k;
                q[static_cast<std::size_t>(k)] = point(p);
            } else {
                q[static_cast<std::size_t>(k)] = point(vk);
            }
        }
        const auto ptrs = std::span<const double* const>(q.data(), static_cast<std::size_t>(dim_) + 1);
        if (inf_at < 0) {
            return predicates::insphere(dim_, ptrs, point(p)) > 0;
        }
        const int o = predicates::orient(dim_, ptrs);
        if (o != 0) {
            return o > 0;
        }
        std::array<const double*, 3> face{};
        int m = 0;
        for (int k = 0; k <= dim_; ++k) {
            if (k != inf_at) {
                face[static_cast<std::size_t>(m++)] = q[static_cast<std::size_t>(k)];
            }
        }
        return predicates::in_face_sphere(dim_, std::span<const double* const>(face.data(), static_cast<std::size_t>(dim_)),
                                          point(p)) > 0;
    }

    std::uint64_t facet_key(const std::array<int, 4>& v, int skip) const {
        std::array<std::uint64_t, 3> f{};
        int m = 0;
        for (int k = 0; k <= dim_; ++k) {
            if (k != skip) {
                f[static_cast<std::size_t>(m++)] = static_cast<std::uint64_t>(v[static_cast<std::size_t>(k)] + 1);
            }
        }
        std::sort(f.begin(), f.begin() + m);
        std::uint64_t key = 0;
        for (int k = 0; k < m; ++k) {
            key = (key << 21) | f[static_cast<std::size_t>(k)];
        }
        return key;
    }

    void add(const std::array<int, 4>& v) {
        const int id = static_cast<int>(simplices_.size());
        simplices_.push_back(Simplex{v, true});
        for (int k = 0; k <= dim_; ++k) {
            auto [it, inserted] = facets_.try_emplace(facet_key(v, k), std::array<int, 2>{-1, -1});
            auto& slot = it->second;
            if (slot[0] == -1) {
                slot[0] = id;
            } else if (slot[1] == -1) {
                slot[1] = id;
            } else {
                throw std::logic_error("delaunay: facet shared by more than two simplices");
            }
        }
    }

    void kill(int id) {
        Simplex& s = simplices_[static_cast<std::size_t>(id)];
        s.alive = false;
        for (int k = 0; k <= dim_; ++k) {
            auto it = facets_.find(facet_key(s.v, k));
            auto& slot = it->second;
            if (slot[0] == id) {
                slot[0] = slot[1];
            }
            slot[1] = -1;
            if (slot[0] == -1) {
                facets_.erase(it);
            }
        }
        ++dead_;
    }

    int neighbor(int id, int k) const {
        const auto it = facets_.find(facet_key(simplices_[static_cast<std::size_t>(id)].v, k));
        if (it == facets_.end()) {
            return -1;
        }
        return it->second[0] == id ? it->second[1] : it->second[0];
    }

    void insert(int p) {
        int seed_id = -1;
        for (std::size_t i = simplices_.size(); i-- > 0;) {
            if (simplices_[i].alive && conflict(simplices_[i], p)) {
                seed_id = static_cast<int>(i);
                break;
            }
        }
        if (seed_id < 0) {
            throw std::logic_error("delaunay: no simplex in conflict with point " + std::to_string(p));
        }

        ++epoch_;
        visit_.resize(simplices_.size(), 0);
        in_cavity_.resize(simplices_.size(), 0);
        std::vector<int> cavity{seed_id};
        visit_[static_cast<std::size_t>(seed_id)] = epoch_;
        in_cavity_[static_cast<std::size_t>(seed_id)] = 1;
        std::vector<std::pair<int, int>> boundary;
        for (std::size_t c = 0; c < cavity.size(); ++c) {
            const int id = cavity[c];
            for (int k = 0; k <= dim_; ++k) {
                const int nb = neighbor(id, k);
                if (nb < 0) {
                    throw std::logic_error("delaunay: open facet");
                }
                const auto unb = static_cast<std::size_t>(nb);
                if (visit_[unb] != epoch_) {
                    visit_[unb] = epoch_;
                    in_cavity_[unb] = conflict(simplices_[unb], p) ? 1 : 0;
                    if (in_cavity_[unb]) {
                        cavity.push_back(nb);
                        continue;
                    }
                }
                if (!in_cavity_[unb]) {
                    boundary.emplace_back(id, k);
                }
            }
        }

        std::vector<std::array<int, 4>> created;
        created.reserve(boundary.size());
        for (const auto& [id, k] : boundary) {
            std::array<int, 4> v = simplices_[static_cast<std::size_t>(id)].v;
            v[static_cast<std::size_t>(k)] = p;
            created.push_back(v);
        }
        for (int id : cavity) {
            kill(id);
        }
        for (const auto& v : created) {
            if (std::find(v.begin(), v.begin() + dim_ + 1, kInfinite) == v.begin() + dim_ + 1 && orientation(v) <= 0) {
                throw std::logic_error("delaunay: degenerate simplex created");
            }
            add(v);
        }
        if (dead_ > 2 * (simplices_.size() - dead_) + 64) {
            compact();
        }
    }

    void compact() {
        std::vector<Simplex> keep;
        keep.reserve(simplices_.size() - dead_);
        for (const Simplex& s : simplices_) {
            if (s.alive) {
                keep.push_back(s);
            }
        }
        simplices_.clear();
        facets_.clear();
        dead_ = 0;
        for (const Simplex& s : keep) {
            add(s.v);
        }
        visit_.assign(simplices_.size(), 0);
        in_cavity_.assign(simplices_.size(), 0);
    }

    int dim_;
    std::span<const double> pts_;
    std::vector<Simplex> simplices_;
    std::unordered_map<std::uint64_t, std::array<int, 2>> facets_;
    std::size_t dead_ = 0;
    std::vector<std::uint32_t> visit_;
    std::vector<char> in_cavity_;
    std::uint32_t epoch_ = 0;
};

}  // namespace

Triangulation delaunay(int dim, std::span<const double> points) {
    if (dim != 2 && dim != 3) {
        throw std::invalid_argument("delaunay: dim must be 2 or 3");
    }
    if (points.size() % static_cast<std::size_t>(dim) != 0) {
        throw std::invalid_argument("delaunay: coordinate count is not a multiple of dim");
    }
    if (points.size() / static_cast<std::size_t>(dim) >= (1u << 20)) {
        throw std::invalid_argument("delaunay: too many points");
    }
    return Builder(dim, points).run();
}

Mesh delaunay_triangulate(std::span<const double> points, int dim) {
    Triangulation t = delaunay(dim, points);
    return Mesh(dim, std::vector<double>(points.begin(), points.end()), std::move(t.simplices));
}

}  // namespace rubbernet
