#pragma once

// Volume-change energy W_vol(F) = K/4 (J^2 - 1 - ln J), J = det F, and the
// cut-off variant that freezes W_vol at its value for J = eta when J <= eta.

#include "rubbernet/linalg.hpp"

#include <span>

namespace rubbernet {

struct VolumetricParams {
    double bulk = 1.0;  // K
    double eta = 0.0;   // 0 disables the cut-off

    void validate() const;
};

/// Scalar form g(J) = K/4 (J^2 - 1 - ln J). Throws std::domain_error for J <= 0.
double w_vol_of_j(double j, double bulk);

double w_vol(const Mat& f, const VolumetricParams& params);
/// Requires params.eta > 0; total for every F.
double w_vol_eta(const Mat& f, const VolumetricParams& params);
/// Dispatches to w_vol or w_vol_eta depending on params.eta.
double w_vol_active(const Mat& f, const VolumetricParams& params);

/// dW/dF = K/4 (2J - 1/J) cof(F) on the active branch, zero when det F <= eta.
Mat w_vol_gradient(const Mat& f, const VolumetricParams& params);

/// Largest sampled ratio W_vol^eta(F) / (|F|^p + 1); the upper growth bound
/// holds on the sample for any C_eta at least this large.
double w_vol_upper_growth_constant(std::span<const Mat> samples, const VolumetricParams& params,
                                   double p);

}  // namespace rubbernet
