#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "mutomo/grid.hpp"
#include "mutomo/material.hpp"

namespace mutomo {

struct PhantomConfig {
    int resolution = 16;
    double extent = 100.0;
    int octaves = 3;
    double persistence = 0.5;
    int base_cells = 4;  // lattice cells spanning the volume at the first octave
    double occupancy_threshold = 0.5;
};

// Octave-summed lattice value noise sampled at voxel centers, rescaled to
// [0, 1] over the field. Deterministic in seed.
Eigen::ArrayXd fractal_noise(std::uint64_t seed, int resolution, int octaves,
                             double persistence, int base_cells = 4);

// Thresholds the noise field, partitions occupied voxels into 6-connected
// components, assigns each component one material drawn uniformly from the
// library's solids, and returns the lambda grid.
VoxelGrid generate_phantom(std::uint64_t seed, const PhantomConfig& config,
                           const MaterialLibrary& library);

}  // namespace mutomo
