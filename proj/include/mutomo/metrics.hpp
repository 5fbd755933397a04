#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "mutomo/grid.hpp"

namespace mutomo {

// PSNR reference amplitude (cm^-1), approximately the densest material's
// lambda; configurable everywhere it is consumed.
inline constexpr double kDefaultPeak = 3.45;

struct EvalReport {
    double mse = 0.0;
    double mae = 0.0;
    double psnr_mean = 0.0;  // mean of per-sample PSNR
    int count = 0;
    double seconds = 0.0;
};

inline std::pair<double, double> voxel_metrics(const VoxelGrid& pred, const VoxelGrid& truth) {
    if (pred.resolution() != truth.resolution())
        throw std::invalid_argument("voxel_metrics: shape mismatch");
    const Eigen::ArrayXd diff = pred.values() - truth.values();
    return {diff.square().mean(), diff.abs().mean()};
}

inline double psnr(double mse, double peak) {
    if (!(peak > 0.0)) throw std::invalid_argument("psnr: peak must be positive");
    if (mse < 0.0) throw std::invalid_argument("psnr: mse must be non-negative");
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

}  // namespace mutomo
