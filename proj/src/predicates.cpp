#include "rubbernet/predicates.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <array>
#include <cmath>
#include <stdexcept>

namespace rubbernet::predicates {

namespace {

using Rational = boost::multiprecision::cpp_rational;

template <class T>
using Square = std::array<std::array<T, 4>, 4>;

// Laplace expansion along columns; `rows` is the bitmask of rows still
// available. With `unsigned_sum` set this computes the permanent.
template <class T>
T expand(const Square<T>& m, int n, int col, unsigned rows, bool unsigned_sum) {
    if (col == n) {
        return T(1);
    }
    T sum(0);
    int position = 0;
    for (int r = 0; r < n; ++r) {
        if ((rows & (1u << r)) == 0) {
            continue;
        }
        const T& a = m[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)];
        if (a != 0) {
            const T minor = expand(m, n, col + 1, rows & ~(1u << r), unsigned_sum);
            if (unsigned_sum || position % 2 == 0) {
                sum += a * minor;
            } else {
                sum -= a * minor;
            }
        }
        ++position;
    }
    return sum;
}

template <class T>
T determinant(const Square<T>& m, int n) {
    return expand(m, n, 0, (1u << n) - 1u, false);
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

int sign_of(const Rational& v) { return v.sign(); }

// Sign of a determinant whose entries are built by `fill` (called once with
// double and, if needed, once with Rational).
template <class Fill>
int filtered_sign(int n, Fill fill) {
    Square<double> m{};
    fill(m);
    const double d = determinant(m, n);
    Square<double> a{};
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                std::abs(m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        }
    }
    const double permanent = expand(a, n, 0, (1u << n) - 1u, true);
    // Entry rounding plus at most 24 products of 4 factors stays far below
    // 1e-12 relative to the permanent.
    if (std::isfinite(d) && std::abs(d) > 1e-12 * permanent) {
        return sign_of(d);
    }
    Square<Rational> e{};
    fill(e);
    return sign_of(determinant(e, n));
}

}  // namespace

int orient(int dim, std::span<const double* const> pts) {
    if ((dim != 2 && dim != 3) || pts.size() != static_cast<std::size_t>(dim) + 1) {
        throw std::invalid_argument("orient: need dim+1 points, dim in {2,3}");
    }
    return filtered_sign(dim, [&](auto& m) {
        using T = std::decay_t<decltype(m[0][0])>;
        for (int k = 0; k < dim; ++k) {
            for (int c = 0; c < dim; ++c) {
                m[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)] =
                    T(pts[static_cast<std::size_t>(k) + 1][c]) - T(pts[0][c]);
            }
        }
    });
}

int insphere(int dim, std::span<const double* const> pts, const double* q) {
    if ((dim != 2 && dim != 3) || pts.size() != static_cast<std::size_t>(dim) + 1) {
        throw std::invalid_argument("insphere: need dim+1 points, dim in {2,3}");
    }
    const int o = orient(dim, pts);
    if (o == 0) {
        throw std::domain_error("insphere: degenerate simplex");
    }
    const int s = filtered_sign(dim + 1, [&](auto& m) {
        using T = std::decay_t<decltype(m[0][0])>;
        for (int i = 0; i <= dim; ++i) {
            T lift(0);
            for (int c = 0; c < dim; ++c) {
                const T a = T(pts[static_cast<std::size_t>(i)][c]) - T(q[c]);
                m[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] = a;
                lift += a * a;
            }
            m[static_cast<std::size_t>(i)][static_cast<std::size_t>(dim)] = lift;
        }
    });
    // det[(p_i - q, |p_i - q|^2)] has sign (-1)^dim * orient when q is inside.
    return dim % 2 == 0 ? s * o : -s * o;
}

int in_face_sphere(int dim, std::span<const double* const> face, const double* q) {
    if ((dim != 2 && dim != 3) || face.size() != static_cast<std::size_t>(dim)) {
        throw std::invalid_argument("in_face_sphere: need dim points, dim in {2,3}");
    }
    if (dim == 2) {
        Rational s(0);
        for (int c = 0; c < 2; ++c) {
            s += (Rational(q[c]) - Rational(face[0][c])) * (Rational(q[c]) - Rational(face[1][c]));
        }
        return -s.sign();
    }
    // Circumcenter a + z of triangle abc: z.u = |u|^2/2, z.v = |v|^2/2, z.(u x v) = 0.
    std::array<Rational, 3> u;
    std::array<Rational, 3> v;
    for (std::size_t c = 0; c < 3; ++c) {
        u[c] = Rational(face[1][c]) - Rational(face[0][c]);
        v[c] = Rational(face[2][c]) - Rational(face[0][c]);
    }
    const std::array<Rational, 3> w{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2],
                                    u[0] * v[1] - u[1] * v[0]};
    auto dot3 = [](const std::array<Rational, 3>& a, const std::array<Rational, 3>& b) {
        return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    };
    Square<Rational> m{};
    for (std::size_t c = 0; c < 3; ++c) {
        m[0][c] = u[c];
        m[1][c] = v[c];
        m[2][c] = w[c];
    }
    const Rational d = determinant(m, 3);
    if (d == 0) {
        throw std::domain_error("in_face_sphere: degenerate face");
    }
    const std::array<Rational, 3> rhs{dot3(u, u) / 2, dot3(v, v) / 2, Rational(0)};
    std::array<Rational, 3> z;
    for (std::size_t k = 0; k < 3; ++k) {
        Square<Rational> mk = m;
        for (std::size_t r = 0; r < 3; ++r) {
            mk[r][k] = rhs[r];
        }
        z[k] = determinant(mk, 3) / d;
    }
    std::array<Rational, 3> qa;
    for (std::size_t c = 0; c < 3; ++c) {
        qa[c] = Rational(q[c]) - Rational(face[0][c]) - z[c];
    }
    const Rational diff = dot3(z, z) - dot3(qa, qa);
    return diff.sign();
}

}  // namespace rubbernet::predicates
