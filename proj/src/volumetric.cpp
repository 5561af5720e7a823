#include "rubbernet/volumetric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rubbernet {

void VolumetricParams::validate() const {
    if (!(bulk > 0.0) || !(eta >= 0.0 && eta < 1.0)) {
        throw std::invalid_argument("VolumetricParams: require K > 0 and 0 <= eta < 1");
    }
}

double w_vol_of_j(double j, double bulk) {
    if (!(j > 0.0)) {
        throw std::domain_error("w_vol: non-positive determinant " + std::to_string(j) +
                                " (inverted element)");
    }
    return 0.25 * bulk * (j * j - 1.0 - std::log(j));
}

double w_vol(const Mat& f, const VolumetricParams& params) { return w_vol_of_j(det(f), params.bulk); }

double w_vol_eta(const Mat& f, const VolumetricParams& params) {
    if (!(params.eta > 0.0)) {
        throw std::invalid_argument("w_vol_eta: eta must be > 0");
    }
    const double j = det(f);
    return j > params.eta ? w_vol_of_j(j, params.bulk) : w_vol_of_j(params.eta, params.bulk);
}

double w_vol_active(const Mat& f, const VolumetricParams& params) {
    return params.eta > 0.0 ? w_vol_eta(f, params) : w_vol(f, params);
}

Mat w_vol_gradient(const Mat& f, const VolumetricParams& params) {
    const double j = det(f);
    if (params.eta > 0.0 && j <= params.eta) {
        return Mat::Zero(f.rows(), f.cols());
    }
    if (!(j > 0.0)) {
        throw std::domain_error("w_vol_gradient: non-positive determinant on the active branch");
    }
    return 0.25 * params.bulk * (2.0 * j - 1.0 / j) * cofactor(f);
}

double w_vol_upper_growth_constant(std::span<const Mat> samples, const VolumetricParams& params,
                                   double p) {
    double worst = 0.0;
    for (const Mat& f : samples) {
        worst = std::max(worst, w_vol_eta(f, params) / (std::pow(f.norm(), p) + 1.0));
    }
    return worst;
}

}  // namespace rubbernet
