#include "mutomo/raypath.hpp"

#include <algorithm>
#include <cmath>

namespace mutomo {

// Crossing-time decomposition: collect every axis-plane crossing parameter in
// (0, T), then classify each interval by the voxel containing its midpoint.
// Midpoint classification is immune to rays that run along voxel faces.
std::vector<PathSegment> voxel_path(const Ray& ray, const Vec3& entry, const Vec3& exit,
                                    const VoxelGrid& grid) {
    const double total = (exit - entry).norm();
    std::vector<PathSegment> segments;
    if (total <= 0.0) return segments;

    const int r = grid.resolution();
    const double h = grid.voxel_size();
    const double half = 0.5 * grid.extent();
    const Vec3 d = ray.direction;

    std::vector<double> cuts;
    cuts.reserve(static_cast<std::size_t>(3 * r) + 2);
    cuts.push_back(0.0);
    cuts.push_back(total);
    for (int a = 0; a < 3; ++a) {
        if (std::abs(d[a]) < 1e-15) continue;
        for (int k = 1; k < r; ++k) {
            const double plane = -half + k * h;
            const double t = (plane - entry[a]) / d[a];
            if (t > 0.0 && t < total) cuts.push_back(t);
        }
    }
    std::sort(cuts.begin(), cuts.end());

    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double t0 = cuts[i];
        const double t1 = cuts[i + 1];
        const double len = t1 - t0;
        if (len <= 0.0) continue;
        const Vec3 mid = entry + (0.5 * (t0 + t1)) * d;
        const Eigen::Vector3i voxel = grid.index_of(mid);
        if (!segments.empty() && segments.back().voxel == voxel)
            segments.back().length += len;
        else
            segments.push_back({voxel, len});
    }
    return segments;
}

}  // namespace mutomo
