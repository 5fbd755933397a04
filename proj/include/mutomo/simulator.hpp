#pragma once

#include <cstdint>
#include <vector>

#include "mutomo/event.hpp"
#include "mutomo/geometry.hpp"
#include "mutomo/grid.hpp"
#include "mutomo/rng.hpp"

namespace mutomo {

struct BeamConfig {
    double gamma = 2.7;          // power-law exponent, p^-gamma
    double p_min = 500.0;        // MeV
    double p_max = 100000.0;     // MeV

    void validate() const {
        if (!(p_min > 0.0) || !(p_max > p_min)) throw ConfigError("beam momentum range invalid");
        if (!(gamma > 1.0)) throw ConfigError("beam exponent must exceed 1");
    }
};

struct DetectorConfig {
    int pixels_per_side = 0;      // 0 = infinite resolution
    double momentum_error = 0.2;  // fractional, in [0, 1]

    bool infinite() const { return pixels_per_side <= 0; }
    void validate() const {
        if (momentum_error < 0.0 || momentum_error > 1.0)
            throw ConfigError("momentum error must be in [0, 1]");
    }
};

struct MuonState {
    Vec3 position = Vec3::Zero();
    Vec3 direction = -Vec3::UnitZ();
    double momentum = 0.0;  // MeV
};

// Exact kinematics at one detector plane, before any detector effects.
struct TrueRecord {
    Vec3 position = Vec3::Zero();
    Vec3 direction = -Vec3::UnitZ();
};

struct TransportResult {
    TrueRecord entry;
    TrueRecord exit;
    double momentum = 0.0;  // true momentum, constant through the volume
    bool dropped = false;   // exits the side and misses the lower detector
};

struct SimStats {
    std::uint64_t attempts = 0;  // transports launched, including dropped ones
    std::uint64_t dropped = 0;
};

// Draws position, zenith (cos^2 law), azimuth, momentum; rejection-resamples
// the whole tuple until the straight ray crosses the lower detector square.
MuonState sample_muon(RngStream& rng, const BeamConfig& beam, const Geometry& geom);

// Applies one multiple-scattering kick for a segment of length x through
// material of density lambda: correlated (displacement, angle) per transverse
// plane. Does not advance the position along the flight direction.
MuonState step_scatter(const MuonState& state, double x, double lambda, RngStream& rng);

// Straight flight to the object cube, per-voxel scattering inside (re-tracing
// after each kick), straight flight to the lower detector plane.
TransportResult transport(const MuonState& state, const VoxelGrid& grid, const Geometry& geom,
                          RngStream& rng);

// Pixel snapping on both measurement planes per side, direction recomputation
// from the snapped crossings, multiplicative momentum-estimate noise.
MuonEvent detect(const TransportResult& truth, const DetectorConfig& det, const Geometry& geom,
                 RngStream& rng);

struct SimConfig {
    Geometry geometry;
    BeamConfig beam;
    DetectorConfig detector;
};

// Exactly `dosage` detected events, resampling dropped ones. Deterministic in
// master_seed and thread count: every (slot, attempt) owns a counter stream.
std::vector<MuonEvent> simulate_event_set(const VoxelGrid& grid, int dosage,
                                          const SimConfig& config, std::uint64_t master_seed,
                                          SimStats* stats = nullptr);

}  // namespace mutomo
