#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mutomo/dataset.hpp"
#include "mutomo/metrics.hpp"
#include "mutomo/runconfig.hpp"

namespace mutomo {

// Deterministic sub-seed for one purpose ("phantom-train", "events-test", ...)
// and index under a master seed.
std::uint64_t derived_seed(std::uint64_t master, const std::string& what, std::uint64_t index);

// Ground-truth lambda grid for sample `index` of a split.  Depends only on
// (master seed, split, index), so the same phantoms reappear when the test
// set is regenerated under different beam or detector conditions.
VoxelGrid phantom_for(const RunConfig& cfg, const std::string& split, int index);

// Phantom plus its simulated detector events at cfg.dosage/cfg.detector.
Sample sample_for(const RunConfig& cfg, const std::string& split, int index);
std::vector<Sample> build_split(const RunConfig& cfg, const std::string& split, int count);

// Classical baselines under a run configuration.
VoxelGrid reconstruct_poca(const RunConfig& cfg, const std::vector<MuonEvent>& events);
VoxelGrid reconstruct_mlem(const RunConfig& cfg, const std::vector<MuonEvent>& events);

// Piecewise-constant refinement of a coarse grid onto a finer one whose
// resolution is an integer multiple.
VoxelGrid upsample_nearest(const VoxelGrid& coarse, int target_resolution);

using Reconstructor = std::function<VoxelGrid(const Sample&)>;

// Per-sample metrics averaged over a test set; reconstructions at a coarser
// resolution are refined to the truth grid first.
EvalReport evaluate(const std::vector<Sample>& test_set, const Reconstructor& recon, double peak);

}  // namespace mutomo
