#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <vector>

#include "mutomo/core.hpp"

namespace mutomo {

// One detected muon. Positions in cm on the detector planes, directions unit
// and downward, momenta in MeV. true_momentum is carried for simulation
// bookkeeping only; reconstructors must use momentum (the estimate).
struct MuonEvent {
    Vec3 entry_position = Vec3::Zero();
    Vec3 exit_position = Vec3::Zero();
    Vec3 entry_direction = -Vec3::UnitZ();
    Vec3 exit_direction = -Vec3::UnitZ();
    double momentum = 0.0;
    double true_momentum = 0.0;

    double chord() const { return (exit_direction - entry_direction).norm(); }

    // Raw serialization order: positions, directions, momentum estimate,
    // direction chord (14 values, cm / MeV units).
    std::array<double, 14> raw() const {
        return {entry_position.x(), entry_position.y(), entry_position.z(),
                exit_position.x(),  exit_position.y(),  exit_position.z(),
                entry_direction.x(), entry_direction.y(), entry_direction.z(),
                exit_direction.x(),  exit_direction.y(),  exit_direction.z(),
                momentum,           chord()};
    }
};

// Order-independent fingerprint of an event's physical content; keys the
// placement randomness so results cannot depend on list position.
inline std::uint64_t event_content_hash(const MuonEvent& e) {
    const std::array<double, 14> r = e.raw();
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        h ^= bits;
        h *= 0x100000001b3ull;
    };
    for (double v : r) mix(v);
    mix(e.true_momentum);
    return h;
}

}  // namespace mutomo
