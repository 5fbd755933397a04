#include "mutomo/mlem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mutomo/parallel.hpp"
#include "mutomo/raypath.hpp"

namespace mutomo {
namespace {

struct EventTrack {
    std::vector<PathSegment> segments;
    double d = 0.0;    // theta_x^2 + theta_y^2
    double pr2 = 0.0;  // (p0 / momentum)^2
};

// Straight entry-ray chord through the cube plus transverse-plane angles of
// the exit direction measured against the entry frame.
std::vector<EventTrack> build_tracks(const VoxelGrid& grid, const std::vector<MuonEvent>& events,
                                     const Geometry& geom, double p0) {
    std::vector<EventTrack> tracks(events.size());
    parallel_for(events.size(), [&](std::size_t i) {
        const MuonEvent& ev = events[i];
        const Vec3 d0 = ev.entry_direction.normalized();
        const Vec3 df = ev.exit_direction.normalized();
        const Ray ray{ev.entry_position, d0};
        const auto clip = clip_to_cube(ray, geom.half_side());
        if (!clip || clip->second <= clip->first) return;
        EventTrack& t = tracks[i];
        t.segments = voxel_path(ray, ray.at(clip->first), ray.at(clip->second), grid);
        Vec3 e1, e2;
        transverse_basis(d0, e1, e2);
        const double ax = std::atan2(df.dot(e1), df.dot(d0));
        const double ay = std::atan2(df.dot(e2), df.dot(d0));
        t.d = ax * ax + ay * ay;
        const double pr = p0 / ev.momentum;
        t.pr2 = pr * pr;
    });
    return tracks;
}

double likelihood_of(const std::vector<EventTrack>& tracks, const Eigen::ArrayXd& lambda,
                     const VoxelGrid& grid) {
    double ll = 0.0;
    for (const EventTrack& t : tracks) {
        if (t.segments.empty()) continue;
        double depth = 0.0;
        for (const PathSegment& s : t.segments)
            depth += s.length * lambda[static_cast<Eigen::Index>(
                                    grid.linear(s.voxel.x(), s.voxel.y(), s.voxel.z()))];
        const double sigma2 = t.pr2 * depth;
        ll += -std::log(sigma2) - t.d / (2.0 * sigma2);
    }
    return ll;
}

// Events sorted by physical content so the reduction order cannot depend on
// the caller's list order.
std::vector<MuonEvent> canonical_order(std::vector<MuonEvent> events) {
    std::sort(events.begin(), events.end(), [](const MuonEvent& a, const MuonEvent& b) {
        const auto ra = a.raw();
        const auto rb = b.raw();
        if (ra != rb) return ra < rb;
        return a.true_momentum < b.true_momentum;
    });
    return events;
}

}  // namespace

double log_likelihood(const VoxelGrid& grid, const std::vector<MuonEvent>& events,
                      const Geometry& geom, double p0) {
    return likelihood_of(build_tracks(grid, events, geom, p0), grid.values(), grid);
}

Eigen::ArrayXd log_likelihood_gradient(const VoxelGrid& grid,
                                       const std::vector<MuonEvent>& events, const Geometry& geom,
                                       double p0) {
    const std::vector<EventTrack> tracks = build_tracks(grid, events, geom, p0);
    const Eigen::ArrayXd& lambda = grid.values();
    Eigen::ArrayXd grad = Eigen::ArrayXd::Zero(lambda.size());
    for (const EventTrack& t : tracks) {
        if (t.segments.empty()) continue;
        double depth = 0.0;
        for (const PathSegment& s : t.segments)
            depth += s.length * lambda[static_cast<Eigen::Index>(
                                    grid.linear(s.voxel.x(), s.voxel.y(), s.voxel.z()))];
        const double s2 = t.pr2 * depth;
        for (const PathSegment& s : t.segments)
            grad[static_cast<Eigen::Index>(grid.linear(s.voxel.x(), s.voxel.y(), s.voxel.z()))] +=
                t.pr2 * s.length * (t.d / (2.0 * s2 * s2) - 1.0 / s2);
    }
    return grad;
}

VoxelGrid mlem_reconstruct(const std::vector<MuonEvent>& events, const MlemConfig& config,
                           const Geometry& geom, std::vector<double>* ll_trace) {
    if (config.resolution < 1) throw ConfigError("mlem: resolution must be >= 1");
    if (!(config.lambda_floor > 0.0)) throw ConfigError("mlem: lambda_floor must be positive");
    if (!(config.tolerance > 0.0)) throw ConfigError("mlem: tolerance must be positive");

    VoxelGrid grid(config.resolution, geom.object_side);
    const std::vector<MuonEvent> ordered = canonical_order(events);
    const std::vector<EventTrack> tracks = build_tracks(grid, ordered, geom, config.p0);
    const std::size_t voxels = grid.voxel_count();

    // Per-voxel postings (event, length), in canonical event order.
    std::vector<std::vector<std::pair<std::uint32_t, double>>> postings(voxels);
    bool any = false;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        for (const PathSegment& s : tracks[i].segments) {
            postings[grid.linear(s.voxel.x(), s.voxel.y(), s.voxel.z())].emplace_back(
                static_cast<std::uint32_t>(i), s.length);
            any = true;
        }
    }
    if (!any) throw ConfigError("mlem: no data (no event crosses the object)");

    Eigen::ArrayXd lambda = Eigen::ArrayXd::Constant(
        static_cast<Eigen::Index>(voxels), std::max(config.initial_lambda, config.lambda_floor));

    std::vector<double> sigma2(tracks.size(), 0.0);
    const auto refresh_sigma2 = [&](const Eigen::ArrayXd& lam) {
        parallel_for(tracks.size(), [&](std::size_t i) {
            if (tracks[i].segments.empty()) return;
            double depth = 0.0;
            for (const PathSegment& s : tracks[i].segments)
                depth += s.length * lam[static_cast<Eigen::Index>(
                                        grid.linear(s.voxel.x(), s.voxel.y(), s.voxel.z()))];
            sigma2[i] = tracks[i].pr2 * depth;
        });
    };

    double ll = likelihood_of(tracks, lambda, grid);
    if (ll_trace) {
        ll_trace->clear();
        ll_trace->push_back(ll);
    }
    for (int iter = 0; iter < config.max_iterations; ++iter) {
        refresh_sigma2(lambda);
        Eigen::ArrayXd delta = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(voxels));
        parallel_for(voxels, [&](std::size_t j) {
            const auto& posts = postings[j];
            if (posts.empty()) return;
            double g = 0.0;
            for (const auto& [i, length] : posts) {
                const double s2 = sigma2[i];
                g += tracks[i].pr2 * length * (tracks[i].d / (s2 * s2) - 2.0 / s2);
            }
            const double lj = lambda[static_cast<Eigen::Index>(j)];
            delta[static_cast<Eigen::Index>(j)] =
                lj * lj / (2.0 * static_cast<double>(posts.size())) * g;
        });

        // Step halving keeps the likelihood sequence non-decreasing.
        double alpha = 1.0;
        Eigen::ArrayXd candidate;
        double ll_new = ll;
        bool moved = false;
        for (int half = 0; half < 60; ++half) {
            candidate = (lambda + alpha * delta).max(config.lambda_floor);
            ll_new = likelihood_of(tracks, candidate, grid);
            if (ll_new >= ll) {
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!moved) break;
        const double rel = std::abs(ll_new - ll) / std::max(1.0, std::abs(ll));
        lambda = candidate;
        ll = ll_new;
        if (ll_trace) ll_trace->push_back(ll);
        if (rel < config.tolerance) break;
    }
    grid.values() = lambda;
    return grid;
}

}  // namespace mutomo
