#pragma once

#include <utility>
#include <vector>

#include "mutomo/event.hpp"
#include "mutomo/geometry.hpp"
#include "mutomo/grid.hpp"

namespace mutomo {

enum class PocaKind { skew, intersecting, parallel };

struct PocaResult {
    Vec3 point = Vec3::Zero();
    double gap = 0.0;  // closest distance between the two lines
    PocaKind kind = PocaKind::skew;
};

// Midpoint of the mutual-perpendicular segment between the two trajectory
// lines. Parallel rays resolve to the point on the incoming line closest to
// the outgoing origin, averaged with that origin.
PocaResult closest_approach(const Ray& incoming, const Ray& outgoing);

// (space angle, direction chord |d_f - d_0|) between entry and exit.
std::pair<double, double> scattering_angle(const MuonEvent& event);

struct PocaReconConfig {
    int resolution = 16;
    double tau = 0.002;       // rad; events at or below contribute nothing
    double p0 = kNominalP;    // MeV
};

// Direct-allocation baseline: each event with theta > tau and PoCA inside the
// cube deposits its scattering-density estimate at the PoCA voxel; a voxel's
// value is the mean of its deposits.
VoxelGrid poca_reconstruct(const std::vector<MuonEvent>& events, const PocaReconConfig& config,
                           const Geometry& geom);

}  // namespace mutomo
