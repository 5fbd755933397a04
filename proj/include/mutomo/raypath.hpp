#pragma once

#include <vector>

#include "mutomo/geometry.hpp"
#include "mutomo/grid.hpp"

namespace mutomo {

struct PathSegment {
    Eigen::Vector3i voxel = Eigen::Vector3i::Zero();
    double length = 0.0;
};

// Decomposes the chord from entry to exit (both on or inside the grid cube,
// along ray.direction) into per-voxel segments ordered along flight. Segment
// lengths tile the chord exactly; zero-length chords give an empty list.
std::vector<PathSegment> voxel_path(const Ray& ray, const Vec3& entry, const Vec3& exit,
                                    const VoxelGrid& grid);

}  // namespace mutomo
