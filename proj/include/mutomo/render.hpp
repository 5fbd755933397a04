#pragma once

#include <string>
#include <vector>

#include "mutomo/grid.hpp"

namespace mutomo {

// r x r slice of the grid perpendicular to `axis` ('x', 'y' or 'z') at voxel
// `index`, as 8-bit gray: [0, peak] maps linearly to [0, 255], clipped.
std::vector<unsigned char> slice_pixels(const VoxelGrid& grid, char axis, int index, double peak);

// Writes the slice as a binary portable graymap (P5).
void render_slice(const VoxelGrid& grid, char axis, int index, double peak,
                  const std::string& path);

}  // namespace mutomo
