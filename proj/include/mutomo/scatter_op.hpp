#pragma once

#include <algorithm>
#include <array>
#include <cstring>
#include <string>
#include <optional>
#include <vector>

#include "mutomo/event.hpp"
#include "mutomo/geometry.hpp"
#include "mutomo/nn/mlp.hpp"
#include "mutomo/parallel.hpp"
#include "mutomo/poca.hpp"
#include "mutomo/rng.hpp"

namespace mutomo {

struct ScatterConfig {
    int resolution = 16;              // r
    int point_size = 1;               // d: odd, or == resolution for full coverage
    int channels = 8;                 // c
    double tau = 0.002;               // rad, scattered-or-not threshold on the chord
    std::uint64_t placement_seed = 0;
    std::vector<int> projector_hidden = {32};
    std::vector<int> fuse_hidden = {16};

    void validate() const {
        if (resolution < 1 || channels < 1) throw ConfigError("scatter: bad resolution/channels");
        if (point_size < 1 || point_size > resolution)
            throw ConfigError("scatter: point size must be in [1, resolution]");
        if (point_size % 2 == 0 && point_size != resolution)
            throw ConfigError("scatter: point size must be odd (or equal to the resolution)");
    }

    std::string fingerprint() const {
        std::string s = "scatter:r" + std::to_string(resolution) + ":d" +
                        std::to_string(point_size) + ":c" + std::to_string(channels) + ":proj";
        for (int h : projector_hidden) s += "-" + std::to_string(h);
        s += ":fuse";
        for (int h : fuse_hidden) s += "-" + std::to_string(h);
        return s;
    }
};

// 14 features: positions normalized to [-1, 1] over the cube, unit
// directions, momentum estimate in GeV, direction chord (recomputed).
inline std::array<double, 14> featurize(const MuonEvent& ev, const Geometry& geom) {
    const double inv = 1.0 / geom.half_side();
    const double chord = (ev.exit_direction - ev.entry_direction).norm();
    return {ev.entry_position.x() * inv, ev.entry_position.y() * inv, ev.entry_position.z() * inv,
            ev.exit_position.x() * inv,  ev.exit_position.y() * inv,  ev.exit_position.z() * inv,
            ev.entry_direction.x(),      ev.entry_direction.y(),      ev.entry_direction.z(),
            ev.exit_direction.x(),       ev.exit_direction.y(),       ev.exit_direction.z(),
            ev.momentum / 1000.0,        chord};
}

// Scatterers land at their PoCA; non-scatterers at a uniform random point of
// the straight trajectory's cube chord. "none" when the candidate misses the
// object cube.
inline std::optional<Vec3> placement_point(const MuonEvent& ev, const ScatterConfig& cfg,
                                           const Geometry& geom, RngStream& rng) {
    const Ray in{ev.entry_position, ev.entry_direction.normalized()};
    const double chord = (ev.exit_direction - ev.entry_direction).norm();
    const double half = geom.half_side();
    if (chord > cfg.tau) {
        const Ray out{ev.exit_position, ev.exit_direction.normalized()};
        const Vec3 point = closest_approach(in, out).point;
        if (std::abs(point.x()) > half || std::abs(point.y()) > half ||
            std::abs(point.z()) > half)
            return std::nullopt;
        return point;
    }
    const auto clip = clip_to_cube(in, half);
    if (!clip) return std::nullopt;
    return in.at(clip->first + rng.uniform() * (clip->second - clip->first));
}

template <typename T>
struct ScatterModel {
    ScatterConfig cfg;
    nn::Mlp<T> projector;  // 14 -> d^3 * c
    nn::Mlp<T> fuse;       // c + 1 -> c

    void build(const ScatterConfig& config) {
        config.validate();
        cfg = config;
        const int d = cfg.point_size;
        std::vector<int> pw{14};
        pw.insert(pw.end(), cfg.projector_hidden.begin(), cfg.projector_hidden.end());
        pw.push_back(d * d * d * cfg.channels);
        projector.build("scatter.projector", pw);
        std::vector<int> fw{cfg.channels + 1};
        fw.insert(fw.end(), cfg.fuse_hidden.begin(), cfg.fuse_hidden.end());
        fw.push_back(cfg.channels);
        fuse.build("scatter.fuse", fw);
    }

    void init(std::uint64_t seed) {
        projector.init(seed);
        fuse.init(seed);
    }

    std::vector<nn::Param<T>*> params() {
        auto out = projector.params();
        for (auto* p : fuse.params()) out.push_back(p);
        return out;
    }
};

template <typename T>
struct ScatterForward {
    nn::Tensor4<T> volume;  // X: (r, r, r, c+1), last channel counts hits
    nn::Tensor4<T> fused;   // X': (r, r, r, c)
    // Caches for the backward pass, in accumulation order.
    std::vector<std::size_t> entry_voxel;
    typename nn::Mlp<T>::Cache projector_cache;
    typename nn::Mlp<T>::Cache fuse_cache;
    bool cached = false;
};

namespace detail_scatter {

struct Placed {
    std::size_t voxel = 0;
    std::array<double, 14> features{};
    bool valid = false;
};

inline bool feature_bits_less(const std::array<double, 14>& a, const std::array<double, 14>& b) {
    for (int k = 0; k < 14; ++k) {
        std::uint64_t ba, bb;
        std::memcpy(&ba, &a[k], sizeof ba);
        std::memcpy(&bb, &b[k], sizeof bb);
        if (ba != bb) return ba < bb;
    }
    return false;
}

}  // namespace detail_scatter

// Alg. 1 stage one: project, place, accumulate with a counter channel. The
// accumulation order is (placement voxel, feature bits), so the volume is
// bit-identical under any permutation of the event list; placement
// randomness is keyed by event content for the same reason.
template <typename T>
ScatterForward<T> scatter_forward(const std::vector<MuonEvent>& events, ScatterModel<T>& model,
                                  const Geometry& geom, bool with_cache = false) {
    const ScatterConfig& cfg = model.cfg;
    cfg.validate();
    const int r = cfg.resolution, d = cfg.point_size, c = cfg.channels;
    if (model.projector.out_width() != d * d * d * c)
        throw ConfigError("scatter: projector output width mismatch");
    if (model.fuse.in_width() != c + 1 || model.fuse.out_width() != c)
        throw ConfigError("scatter: fuse width mismatch");

    VoxelGrid index_grid(r, geom.object_side);  // indexing helper only
    std::vector<detail_scatter::Placed> placed(events.size());
    parallel_for(events.size(), [&](std::size_t i) {
        RngStream rng(cfg.placement_seed,
                      stream_id(tag_of("scatter-place"), event_content_hash(events[i])));
        const auto point = placement_point(events[i], cfg, geom, rng);
        if (!point) return;
        const Eigen::Vector3i vi = index_grid.index_of(*point);
        placed[i] = {index_grid.linear(vi.x(), vi.y(), vi.z()), featurize(events[i], geom), true};
    });

    std::vector<const detail_scatter::Placed*> order;
    order.reserve(placed.size());
    for (const auto& p : placed)
        if (p.valid) order.push_back(&p);
    std::sort(order.begin(), order.end(),
              [](const detail_scatter::Placed* a, const detail_scatter::Placed* b) {
                  if (a->voxel != b->voxel) return a->voxel < b->voxel;
                  return detail_scatter::feature_bits_less(a->features, b->features);
              });

    const std::size_t n = order.size();
    nn::MatrixR<T> feats(static_cast<Eigen::Index>(n), 14);
    for (std::size_t e = 0; e < n; ++e)
        for (int k = 0; k < 14; ++k)
            feats(static_cast<Eigen::Index>(e), k) = static_cast<T>(order[e]->features[k]);

    ScatterForward<T> fwd;
    fwd.cached = with_cache;
    const nn::MatrixR<T> proj =
        model.projector.forward(feats, with_cache ? &fwd.projector_cache : nullptr);

    fwd.volume = nn::Tensor4<T>(r, r, r, c + 1);
    fwd.entry_voxel.reserve(n);
    const int dh = (d - 1) / 2;
    for (std::size_t e = 0; e < n; ++e) {
        const std::size_t v = order[e]->voxel;
        fwd.entry_voxel.push_back(v);
        const int vx = static_cast<int>(v % r);
        const int vy = static_cast<int>((v / r) % r);
        const int vz = static_cast<int>(v / (static_cast<std::size_t>(r) * r));
        for (int gz = 0; gz < d; ++gz)
            for (int gy = 0; gy < d; ++gy)
                for (int gx = 0; gx < d; ++gx) {
                    // A full-volume block (d == r) covers the grid as-is;
                    // otherwise blocks center on the placement voxel and
                    // out-of-bounds cells are dropped.
                    const int tx = d == r ? gx : vx - dh + gx;
                    const int ty = d == r ? gy : vy - dh + gy;
                    const int tz = d == r ? gz : vz - dh + gz;
                    if (tx < 0 || ty < 0 || tz < 0 || tx >= r || ty >= r || tz >= r) continue;
                    const int cell = gx + d * (gy + d * gz);
                    for (int ch = 0; ch < c; ++ch)
                        fwd.volume.at(tx, ty, tz, ch) +=
                            proj(static_cast<Eigen::Index>(e), cell * c + ch);
                    fwd.volume.at(tx, ty, tz, c) += T(1);
                }
    }

    const nn::MatrixR<T> fused =
        model.fuse.forward(fwd.volume.mat(), with_cache ? &fwd.fuse_cache : nullptr);
    fwd.fused = nn::Tensor4<T>(r, r, r, c);
    fwd.fused.mat() = fused;
    return fwd;
}

// Backpropagates d(loss)/d(fused) into both MLPs. Placement is fixed, so the
// volume gradient simply gathers back onto each entry's footprint.
template <typename T>
void scatter_backward(const ScatterForward<T>& fwd, ScatterModel<T>& model,
                      const nn::Tensor4<T>& g_fused) {
    if (!fwd.cached) throw std::logic_error("scatter_backward: forward ran without cache");
    const ScatterConfig& cfg = model.cfg;
    const int r = cfg.resolution, d = cfg.point_size, c = cfg.channels;

    const nn::MatrixR<T> g_volume = model.fuse.backward(fwd.fuse_cache, g_fused.mat());

    const std::size_t n = fwd.entry_voxel.size();
    nn::MatrixR<T> g_proj =
        nn::MatrixR<T>::Zero(static_cast<Eigen::Index>(n), model.projector.out_width());
    const int dh = (d - 1) / 2;
    for (std::size_t e = 0; e < n; ++e) {
        const std::size_t v = fwd.entry_voxel[e];
        const int vx = static_cast<int>(v % r);
        const int vy = static_cast<int>((v / r) % r);
        const int vz = static_cast<int>(v / (static_cast<std::size_t>(r) * r));
        for (int gz = 0; gz < d; ++gz)
            for (int gy = 0; gy < d; ++gy)
                for (int gx = 0; gx < d; ++gx) {
                    const int tx = d == r ? gx : vx - dh + gx;
                    const int ty = d == r ? gy : vy - dh + gy;
                    const int tz = d == r ? gz : vz - dh + gz;
                    if (tx < 0 || ty < 0 || tz < 0 || tx >= r || ty >= r || tz >= r) continue;
                    const int cell = gx + d * (gy + d * gz);
                    const std::size_t row =
                        static_cast<std::size_t>(tx) +
                        static_cast<std::size_t>(r) *
                            (static_cast<std::size_t>(ty) + static_cast<std::size_t>(r) * tz);
                    for (int ch = 0; ch < c; ++ch)
                        g_proj(static_cast<Eigen::Index>(e), cell * c + ch) +=
                            g_volume(static_cast<Eigen::Index>(row), ch);
                }
    }
    model.projector.backward(fwd.projector_cache, g_proj);
}

// Stage-one fuse applied alone (pointwise per voxel).
template <typename T>
nn::Tensor4<T> combine(const nn::Tensor4<T>& volume, const nn::Mlp<T>& fuse) {
    if (fuse.in_width() != volume.c) throw ConfigError("combine: fuse width mismatch");
    nn::Tensor4<T> out(volume.nx, volume.ny, volume.nz, fuse.out_width());
    out.mat() = fuse.forward(volume.mat());
    return out;
}

}  // namespace mutomo
