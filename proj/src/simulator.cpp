#include "mutomo/simulator.hpp"

#include <atomic>
#include <cmath>
#include <numbers>

#include "mutomo/parallel.hpp"

namespace mutomo {
namespace {

constexpr std::uint64_t kEventTag = tag_of("sim-event");
constexpr int kMaxRejections = 10000;
constexpr int kMaxAttemptsPerSlot = 1 << 20;

double sample_power_law(RngStream& rng, const BeamConfig& beam) {
    const double e = 1.0 - beam.gamma;
    const double lo = std::pow(beam.p_min, e);
    const double hi = std::pow(beam.p_max, e);
    return std::pow(lo + rng.uniform() * (hi - lo), 1.0 / e);
}

double snap_coordinate(double v, double half, int pixels) {
    const double cell = 2.0 * half / pixels;
    int k = static_cast<int>(std::floor((v + half) / cell));
    k = std::min(std::max(k, 0), pixels - 1);
    return -half + (k + 0.5) * cell;
}

}  // namespace

MuonState sample_muon(RngStream& rng, const BeamConfig& beam, const Geometry& geom) {
    beam.validate();
    geom.validate();
    const double hs = geom.detector_half_side;
    const double span = geom.upper_z() - geom.lower_z();
    for (int fails = 0; fails <= kMaxRejections; ++fails) {
        const double x = rng.uniform(-hs, hs);
        const double y = rng.uniform(-hs, hs);
        const double cos_t = std::cbrt(1.0 - rng.uniform());
        const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
        const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double p = sample_power_law(rng, beam);

        MuonState s;
        s.position = Vec3(x, y, geom.upper_z());
        s.direction = Vec3(sin_t * std::cos(phi), sin_t * std::sin(phi), -cos_t);
        s.momentum = p;

        const double t = span / cos_t;
        const double lx = x + t * s.direction.x();
        const double ly = y + t * s.direction.y();
        if (std::abs(lx) <= hs && std::abs(ly) <= hs) return s;
    }
    throw ConfigError("sample_muon: acceptance rate below 1e-4, geometry inconsistent");
}

MuonState step_scatter(const MuonState& state, double x, double lambda, RngStream& rng) {
    if (lambda <= 0.0 || x <= 0.0) return state;
    const double sigma = std::sqrt(plane_angle_variance(state.momentum, x, lambda));
    Vec3 e1, e2;
    transverse_basis(state.direction, e1, e2);

    double theta[2], shift[2];
    for (int plane = 0; plane < 2; ++plane) {
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        theta[plane] = z2 * sigma;
        shift[plane] = x * sigma * (z1 / std::sqrt(12.0) + 0.5 * z2);
    }

    MuonState out = state;
    out.position += shift[0] * e1 + shift[1] * e2;
    // tan() makes the realized plane-projected angle equal theta exactly.
    out.direction = (state.direction + std::tan(theta[0]) * e1 + std::tan(theta[1]) * e2)
                        .normalized();
    return out;
}

TransportResult transport(const MuonState& state, const VoxelGrid& grid, const Geometry& geom,
                          RngStream& rng) {
    TransportResult out;
    out.entry = {state.position, state.direction};
    out.momentum = state.momentum;

    const double half = geom.half_side();
    MuonState cur = state;

    // Lazy anchoring: the current point is anchor + direction * t_acc, and the
    // anchor only moves when a scatter actually perturbs the state. Straight
    // runs through vacuum therefore stay single-extrapolation exact.
    Vec3 anchor = cur.position;
    double t_acc = 0.0;
    const int guard = 64 * grid.resolution() + 64;

    auto clip = clip_to_cube(Ray{anchor, cur.direction}, half);
    if (clip && clip->second > 1e-12) {
        t_acc = std::max(clip->first, 0.0);
        for (int iter = 0;; ++iter) {
            if (iter > guard) {
                out.dropped = true;
                return out;
            }
            const double t_cube = clip->second - t_acc;
            if (t_cube <= 1e-12) break;
            const Vec3 pos = anchor + t_acc * cur.direction;

            // Distance to the next voxel face along the flight direction.
            const double h = grid.voxel_size();
            double t_step = t_cube;
            for (int a = 0; a < 3; ++a) {
                const double d = cur.direction[a];
                if (std::abs(d) < 1e-15) continue;
                double k = d > 0.0 ? std::floor((pos[a] + half) / h) + 1.0
                                   : std::ceil((pos[a] + half) / h) - 1.0;
                double t = (-half + k * h - pos[a]) / d;
                if (t <= 1e-9) t = (-half + (k + (d > 0.0 ? 1.0 : -1.0)) * h - pos[a]) / d;
                t_step = std::min(t_step, t);
            }
            const double seg = std::min(t_step, t_cube);
            const bool leaving = seg >= t_cube - 1e-12;
            const Eigen::Vector3i vi = grid.index_of(pos + (0.5 * seg) * cur.direction);
            const double lambda = grid(vi.x(), vi.y(), vi.z());

            if (lambda > 0.0) {
                cur.position = anchor + (t_acc + seg) * cur.direction;
                cur = step_scatter(cur, seg, lambda, rng);
                anchor = cur.position;
                t_acc = 0.0;
                if (leaving) break;
                clip = clip_to_cube(Ray{anchor, cur.direction}, half);
                if (!clip || clip->second <= 1e-12) break;
                t_acc = std::max(clip->first, 0.0);
            } else {
                t_acc += seg;
                if (leaving) {
                    t_acc = clip->second;
                    break;
                }
            }
        }
        cur.position = anchor + t_acc * cur.direction;
    }

    if (cur.direction.z() >= -1e-9) {
        out.dropped = true;
        return out;
    }
    const double t_low = (geom.lower_z() - cur.position.z()) / cur.direction.z();
    const Vec3 landing = cur.position + t_low * cur.direction;
    if (std::abs(landing.x()) > geom.detector_half_side ||
        std::abs(landing.y()) > geom.detector_half_side) {
        out.dropped = true;
        return out;
    }
    out.exit = {landing, cur.direction};
    return out;
}

MuonEvent detect(const TransportResult& truth, const DetectorConfig& det, const Geometry& geom,
                 RngStream& rng) {
    det.validate();
    MuonEvent ev;
    if (det.infinite()) {
        ev.entry_position = truth.entry.position;
        ev.entry_direction = truth.entry.direction;
        ev.exit_position = truth.exit.position;
        ev.exit_direction = truth.exit.direction;
    } else {
        const double hs = geom.detector_half_side;
        const int n = det.pixels_per_side;
        const auto read_side = [&](const TrueRecord& rec, double main_z, double aux_z,
                                   Vec3& position, Vec3& direction) {
            const double t = (aux_z - main_z) / rec.direction.z();
            const Vec3 aux = rec.position + t * rec.direction;
            const Vec3 main_snapped(snap_coordinate(rec.position.x(), hs, n),
                                    snap_coordinate(rec.position.y(), hs, n), main_z);
            const Vec3 aux_snapped(snap_coordinate(aux.x(), hs, n),
                                   snap_coordinate(aux.y(), hs, n), aux_z);
            position = main_snapped;
            // Flight order is downward: from the higher plane to the lower.
            direction = (aux_z > main_z ? main_snapped - aux_snapped : aux_snapped - main_snapped)
                            .normalized();
        };
        read_side(truth.entry, geom.upper_z(), geom.upper_aux_z(), ev.entry_position,
                  ev.entry_direction);
        read_side(truth.exit, geom.lower_z(), geom.lower_aux_z(), ev.exit_position,
                  ev.exit_direction);
    }
    // Drawn unconditionally so event streams coincide across momentum_error
    // settings.
    const double u = rng.uniform(-1.0, 1.0);
    ev.momentum = std::max(100.0, truth.momentum * (1.0 + det.momentum_error * u));
    ev.true_momentum = truth.momentum;
    return ev;
}

std::vector<MuonEvent> simulate_event_set(const VoxelGrid& grid, int dosage,
                                          const SimConfig& config, std::uint64_t master_seed,
                                          SimStats* stats) {
    if (dosage < 1) throw ConfigError("simulate_event_set: dosage must be >= 1");
    config.geometry.validate();
    config.beam.validate();
    config.detector.validate();

    std::vector<MuonEvent> events(static_cast<std::size_t>(dosage));
    std::vector<std::uint32_t> attempts(static_cast<std::size_t>(dosage), 0);
    std::atomic<bool> overflow{false};

    parallel_for(static_cast<std::size_t>(dosage), [&](std::size_t slot) {
        for (std::uint64_t a = 0; a < kMaxAttemptsPerSlot; ++a) {
            RngStream rng(master_seed,
                          stream_id(kEventTag, (static_cast<std::uint64_t>(slot) << 20) | a));
            const MuonState mu = sample_muon(rng, config.beam, config.geometry);
            const TransportResult tr = transport(mu, grid, config.geometry, rng);
            ++attempts[slot];
            if (tr.dropped) continue;
            events[slot] = detect(tr, config.detector, config.geometry, rng);
            return;
        }
        overflow.store(true);
    });
    if (overflow.load()) throw ConfigError("simulate_event_set: drop rate pathologically high");

    if (stats) {
        stats->attempts = 0;
        for (std::uint32_t a : attempts) stats->attempts += a;
        stats->dropped = stats->attempts - static_cast<std::uint64_t>(dosage);
    }
    return events;
}

}  // namespace mutomo
