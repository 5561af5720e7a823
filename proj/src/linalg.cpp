#include "rubbernet/linalg.hpp"

#include <cmath>
#include <numbers>

namespace rubbernet {

Mat rotation_from_uniform(int dim, double u0, double u1, double u2) {
    if (dim == 2) {
        const double a = 2.0 * std::numbers::pi * u0;
        Mat r(2, 2);
        r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        return r;
    }
    if (dim != 3) {
        throw std::invalid_argument("rotation_from_uniform: dim must be 2 or 3");
    }
    // Shoemake's uniform unit quaternion.
    const double s1 = std::sqrt(1.0 - u0);
    const double s2 = std::sqrt(u0);
    const double t1 = 2.0 * std::numbers::pi * u1;
    const double t2 = 2.0 * std::numbers::pi * u2;
    const double w = s2 * std::cos(t2);
    const double x = s1 * std::sin(t1);
    const double y = s1 * std::cos(t1);
    const double z = s2 * std::sin(t2);
    Mat r(3, 3);
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w),
        2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w),
        2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y);
    return r;
}

double RotationSampler::uniform() {
    state_ = mix_seed(state_, 0);
    return static_cast<double>(state_ >> 11) * 0x1.0p-53;
}

Mat RotationSampler::next() {
    const double u0 = uniform();
    const double u1 = uniform();
    const double u2 = uniform();
    return rotation_from_uniform(dim_, u0, u1, u2);
}

}  // namespace rubbernet
