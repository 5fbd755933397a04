#pragma once

#include <string>
#include <vector>

#include "mutomo/event.hpp"
#include "mutomo/grid.hpp"

namespace mutomo {

// One supervised example: a ground-truth voxel grid and the detector events
// recorded through it.
struct Sample {
    VoxelGrid truth;
    std::vector<MuonEvent> events;
};

// Binary dataset, float32 little endian throughout.  Values pass through
// float32 on write, so write(read(file)) reproduces the file byte for byte.
void write_dataset(const std::string& path, const std::vector<Sample>& samples);
std::vector<Sample> read_dataset(const std::string& path, double extent = 100.0);

}  // namespace mutomo
