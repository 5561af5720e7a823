#include "rubbernet/volumetric.hpp"

#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

using namespace rubbernet;

TEST_CASE("volumetric energy values") {
    VolumetricParams p;
    CHECK(w_vol(identity(3), p) == 0.0);
    CHECK(w_vol(identity(2), p) == 0.0);
    CHECK(w_vol(2.0 * identity(3), p) == doctest::Approx((63.0 - std::log(8.0)) / 4.0).epsilon(1e-14));
    p.bulk = 4.0;
    CHECK(w_vol_of_j(2.0, 4.0) == doctest::Approx(3.0 - std::log(2.0)).epsilon(1e-14));
    CHECK_THROWS_AS(w_vol_of_j(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(w_vol(Mat(-identity(3)), VolumetricParams{}), std::domain_error);
}

TEST_CASE("scalar form has its minimum at 1/sqrt2 below zero") {
    const double jmin = 1.0 / std::sqrt(2.0);
    CHECK(w_vol_of_j(jmin, 1.0) == doctest::Approx(0.25 * (-0.5 + std::log(2.0) / 2.0)).epsilon(1e-12));
    CHECK(w_vol_of_j(jmin, 1.0) < w_vol_of_j(jmin * 1.01, 1.0));
    CHECK(w_vol_of_j(jmin, 1.0) < w_vol_of_j(jmin * 0.99, 1.0));
}

TEST_CASE("cut-off freezes the energy below eta") {
    VolumetricParams p{1.0, 0.1};
    Mat f = identity(3);
    f(0, 0) = -1.0;
    CHECK(w_vol_eta(f, p) == doctest::Approx(0.25 * (0.01 - 1.0 - std::log(0.1))).epsilon(1e-14));
    CHECK(w_vol_eta(f, p) == doctest::Approx(0.3282).epsilon(1e-4));
    Mat g = identity(3);
    g(2, 2) = 0.05;
    CHECK(w_vol_eta(g, p) == w_vol_eta(f, p));
    CHECK(w_vol_gradient(g, p).norm() == 0.0);
    // above eta the cut-off is inactive
    CHECK(w_vol_eta(1.5 * identity(3), p) == w_vol(1.5 * identity(3), p));
    CHECK(w_vol_active(f, p) == w_vol_eta(f, p));
    CHECK_THROWS_AS(w_vol_active(f, VolumetricParams{1.0, 0.0}), std::domain_error);
}

TEST_CASE("gradient matches finite differences") {
    const VolumetricParams p{1.7, 0.0};
    Mat f(3, 3);
    f << 1.1, 0.2, -0.1, 0.05, 0.9, 0.3, -0.2, 0.1, 1.2;
    const Mat g = w_vol_gradient(f, p);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            Mat a = f;
            Mat b = f;
            a(i, j) += 1e-6;
            b(i, j) -= 1e-6;
            const double fd = (w_vol(a, p) - w_vol(b, p)) / 2e-6;
            CHECK(g(i, j) == doctest::Approx(fd).epsilon(1e-7));
        }
    }
}

TEST_CASE("cut-off energy satisfies the upper growth bound with C = 1") {
    const VolumetricParams p{1.0, 0.1};
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<Mat> samples;
    for (int k = 0; k < 4000; ++k) {
        Mat f(3, 3);
        const double s = std::exp(2.0 * n(rng));
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                f(i, j) = s * n(rng);
            }
        }
        samples.push_back(f);
    }
    samples.push_back(Mat::Zero(3, 3));
    const double c = w_vol_upper_growth_constant(samples, p, 8.0);
    CHECK(c > 0.0);
    CHECK(c <= 1.0);
}
