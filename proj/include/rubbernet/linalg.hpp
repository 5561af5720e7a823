#pragma once

// Small dense vectors/matrices for d <= 3. Storage is bounded at 3x3 so
// nothing here allocates.

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>

namespace rubbernet {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;

inline void require_small_square(const Mat& m) {
    if (m.rows() != m.cols() || m.rows() < 1 || m.rows() > 3) {
        throw std::invalid_argument("expected a square matrix of size 1..3");
    }
}

inline double det(const Mat& m) {
    require_small_square(m);
    switch (m.rows()) {
    case 1:
        return m(0, 0);
    case 2:
        return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    default:
        return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
               m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
               m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    }
}

/// Cofactor matrix: cof(F) = det(F) * F^{-T}, defined for singular F too.
inline Mat cofactor(const Mat& m) {
    require_small_square(m);
    const auto n = m.rows();
    Mat c(n, n);
    if (n == 1) {
        c(0, 0) = 1.0;
    } else if (n == 2) {
        c(0, 0) = m(1, 1);
        c(0, 1) = -m(1, 0);
        c(1, 0) = -m(0, 1);
        c(1, 1) = m(0, 0);
    } else {
        c(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
        c(0, 1) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
        c(0, 2) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
        c(1, 0) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
        c(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
        c(1, 2) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
        c(2, 0) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
        c(2, 1) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
        c(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    }
    return c;
}

/// Inverse via the adjugate. Throws std::domain_error when det == 0.
inline Mat inverse(const Mat& m) {
    const double d = det(m);
    if (d == 0.0) {
        throw std::domain_error("singular matrix");
    }
    return cofactor(m).transpose() / d;
}

inline Mat identity(int dim) { return Mat::Identity(dim, dim); }

/// Uniformly distributed rotation in SO(dim), dim in {2, 3}, from uniform
/// deviates u in [0,1)^3 (only u[0] is used in 2D).
Mat rotation_from_uniform(int dim, double u0, double u1, double u2);

/// Deterministic stream of uniformly random rotations.
class RotationSampler {
public:
    RotationSampler(int dim, std::uint64_t seed) : dim_(dim), state_(seed) {}
    Mat next();

private:
    double uniform();

    int dim_;
    std::uint64_t state_;
};

/// SplitMix64 finalizer; used to derive independent seeds from (seed, index).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace rubbernet
