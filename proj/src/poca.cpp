#include "mutomo/poca.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "mutomo/parallel.hpp"

namespace mutomo {

PocaResult closest_approach(const Ray& incoming, const Ray& outgoing) {
    const Vec3& d1 = incoming.direction;
    const Vec3& d2 = outgoing.direction;
    const Vec3 w0 = incoming.origin - outgoing.origin;
    const double b = d1.dot(d2);
    const double d = d1.dot(w0);
    const double e = d2.dot(w0);

    PocaResult res;
    if (d1.cross(d2).norm() < 1e-12) {
        const Vec3 p1 = incoming.origin - d * d1;  // closest point on L1 to outgoing origin
        res.point = 0.5 * (p1 + outgoing.origin);
        res.gap = (p1 - outgoing.origin).norm();
        res.kind = PocaKind::parallel;
        return res;
    }
    const double denom = 1.0 - b * b;
    const double t = (b * e - d) / denom;
    const double s = (e - b * d) / denom;
    const Vec3 p1 = incoming.at(t);
    const Vec3 p2 = outgoing.at(s);
    res.point = 0.5 * (p1 + p2);
    res.gap = (p1 - p2).norm();
    res.kind = res.gap <= 1e-9 ? PocaKind::intersecting : PocaKind::skew;
    return res;
}

std::pair<double, double> scattering_angle(const MuonEvent& event) {
    const double dot = std::clamp(event.entry_direction.dot(event.exit_direction), -1.0, 1.0);
    return {std::acos(dot), (event.exit_direction - event.entry_direction).norm()};
}

namespace {

struct Deposit {
    std::size_t voxel = 0;
    double value = 0.0;
    bool valid = false;
};

std::uint64_t bits_of(double v) {
    std::uint64_t b;
    std::memcpy(&b, &v, sizeof b);
    return b;
}

}  // namespace

VoxelGrid poca_reconstruct(const std::vector<MuonEvent>& events, const PocaReconConfig& config,
                           const Geometry& geom) {
    if (config.resolution < 1) throw ConfigError("poca_reconstruct: resolution must be >= 1");
    VoxelGrid grid(config.resolution, geom.object_side);
    const double half = geom.half_side();

    std::vector<Deposit> deposits(events.size());
    parallel_for(events.size(), [&](std::size_t i) {
        const MuonEvent& ev = events[i];
        const Ray in{ev.entry_position, ev.entry_direction.normalized()};
        const Ray out{ev.exit_position, ev.exit_direction.normalized()};
        const auto [theta, chord] = scattering_angle(ev);
        if (!(theta > config.tau)) return;
        const PocaResult poca = closest_approach(in, out);
        if (!grid.contains(poca.point)) return;

        // Bent-path length through the cube: entry leg along the incoming
        // line, exit leg along the outgoing one.
        double length = 0.0;
        if (const auto ci = clip_to_cube(in, half)) length += (poca.point - in.at(ci->first)).norm();
        if (const auto co = clip_to_cube(out, half))
            length += (out.at(co->second) - poca.point).norm();
        if (length <= 1e-9) return;

        const double scaled = theta * ev.momentum / config.p0;
        const Eigen::Vector3i vi = grid.index_of(poca.point);
        deposits[i] = {grid.linear(vi.x(), vi.y(), vi.z()), scaled * scaled / (2.0 * length),
                       true};
    });

    std::vector<Deposit> placed;
    placed.reserve(deposits.size());
    for (const Deposit& d : deposits)
        if (d.valid) placed.push_back(d);
    // Accumulation in (voxel, value-bits) order makes the sum independent of
    // the event list's permutation.
    std::sort(placed.begin(), placed.end(), [](const Deposit& a, const Deposit& b) {
        if (a.voxel != b.voxel) return a.voxel < b.voxel;
        return bits_of(a.value) < bits_of(b.value);
    });

    std::vector<std::uint32_t> counts(grid.voxel_count(), 0);
    for (const Deposit& d : placed) {
        grid.values()[static_cast<Eigen::Index>(d.voxel)] += d.value;
        ++counts[d.voxel];
    }
    for (std::size_t v = 0; v < grid.voxel_count(); ++v)
        if (counts[v] > 0) grid.values()[static_cast<Eigen::Index>(v)] /= counts[v];
    return grid;
}

}  // namespace mutomo
