#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <stdexcept>

#include "mutomo/core.hpp"

namespace mutomo {

// Cubic voxel field of scattering density lambda (cm^-1), centered at the
// origin. Storage order is x fastest, then y, then z.
class VoxelGrid {
public:
    VoxelGrid() = default;
    VoxelGrid(int resolution, double extent)
        : resolution_(resolution), extent_(extent) {
        if (resolution < 1) throw std::invalid_argument("grid resolution must be >= 1");
        if (extent <= 0.0) throw std::invalid_argument("grid extent must be positive");
        values_ = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(resolution) * resolution *
                                       resolution);
    }

    int resolution() const { return resolution_; }
    double extent() const { return extent_; }
    double voxel_size() const { return extent_ / resolution_; }
    std::size_t voxel_count() const { return static_cast<std::size_t>(values_.size()); }

    Eigen::ArrayXd& values() { return values_; }
    const Eigen::ArrayXd& values() const { return values_; }

    std::size_t linear(int ix, int iy, int iz) const {
        return static_cast<std::size_t>(ix) +
               static_cast<std::size_t>(resolution_) *
                   (static_cast<std::size_t>(iy) + static_cast<std::size_t>(resolution_) * iz);
    }

    double operator()(int ix, int iy, int iz) const { return values_[linear(ix, iy, iz)]; }
    double& operator()(int ix, int iy, int iz) { return values_[linear(ix, iy, iz)]; }

    bool inside_index(int ix, int iy, int iz) const {
        return ix >= 0 && iy >= 0 && iz >= 0 && ix < resolution_ && iy < resolution_ &&
               iz < resolution_;
    }

    // Voxel index containing a point; callers must ensure the point is inside
    // the cube (indexes are clamped against boundary round-off).
    Eigen::Vector3i index_of(const Vec3& p) const {
        const double h = voxel_size();
        const double half = 0.5 * extent_;
        Eigen::Vector3i idx;
        for (int a = 0; a < 3; ++a) {
            int i = static_cast<int>(std::floor((p[a] + half) / h));
            idx[a] = std::min(std::max(i, 0), resolution_ - 1);
        }
        return idx;
    }

    Vec3 voxel_center(int ix, int iy, int iz) const {
        const double h = voxel_size();
        const double half = 0.5 * extent_;
        return Vec3(-half + (ix + 0.5) * h, -half + (iy + 0.5) * h, -half + (iz + 0.5) * h);
    }

    bool contains(const Vec3& p) const {
        const double half = 0.5 * extent_;
        return std::abs(p.x()) <= half && std::abs(p.y()) <= half && std::abs(p.z()) <= half;
    }

    double max_value() const { return values_.size() ? values_.maxCoeff() : 0.0; }

private:
    int resolution_ = 0;
    double extent_ = 0.0;
    Eigen::ArrayXd values_;
};

}  // namespace mutomo
