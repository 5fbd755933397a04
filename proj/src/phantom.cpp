#include "mutomo/phantom.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mutomo/rng.hpp"

namespace mutomo {
namespace {

double lattice_value(std::uint64_t seed, int octave, std::int64_t ix, std::int64_t iy,
                     std::int64_t iz) {
    std::uint64_t h = detail::mix64(seed ^ (0x9E3779B97F4A7C15ull + std::uint64_t(octave)));
    h = detail::mix64(h ^ std::uint64_t(ix));
    h = detail::mix64(h ^ std::uint64_t(iy));
    h = detail::mix64(h ^ std::uint64_t(iz));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

double sample_octave(std::uint64_t seed, int octave, double frequency, const Vec3& u) {
    std::int64_t cell[3];
    double w[3];
    for (int a = 0; a < 3; ++a) {
        const double s = u[a] * frequency;
        const double f = std::floor(s);
        cell[a] = static_cast<std::int64_t>(f);
        w[a] = smoothstep(s - f);
    }
    double value = 0.0;
    for (int dz = 0; dz < 2; ++dz)
        for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
                const double corner =
                    lattice_value(seed, octave, cell[0] + dx, cell[1] + dy, cell[2] + dz);
                const double weight = (dx ? w[0] : 1.0 - w[0]) * (dy ? w[1] : 1.0 - w[1]) *
                                      (dz ? w[2] : 1.0 - w[2]);
                value += corner * weight;
            }
    return value;
}

}  // namespace

Eigen::ArrayXd fractal_noise(std::uint64_t seed, int resolution, int octaves,
                             double persistence, int base_cells) {
    if (resolution < 1) throw std::invalid_argument("fractal_noise: resolution must be >= 1");
    if (octaves < 1) throw std::invalid_argument("fractal_noise: octaves must be >= 1");
    if (!(persistence > 0.0 && persistence <= 1.0))
        throw std::invalid_argument("fractal_noise: persistence must be in (0, 1]");
    if (base_cells < 1) throw std::invalid_argument("fractal_noise: base_cells must be >= 1");

    const std::size_t n = static_cast<std::size_t>(resolution) * resolution * resolution;
    Eigen::ArrayXd field = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(n));
    std::size_t i = 0;
    for (int iz = 0; iz < resolution; ++iz)
        for (int iy = 0; iy < resolution; ++iy)
            for (int ix = 0; ix < resolution; ++ix, ++i) {
                const Vec3 u((ix + 0.5) / resolution, (iy + 0.5) / resolution,
                             (iz + 0.5) / resolution);
                double amplitude = 1.0;
                double value = 0.0;
                for (int o = 0; o < octaves; ++o) {
                    value += amplitude * sample_octave(seed, o, base_cells * std::pow(2.0, o), u);
                    amplitude *= persistence;
                }
                field[static_cast<Eigen::Index>(i)] = value;
            }
    const double lo = field.minCoeff();
    const double hi = field.maxCoeff();
    if (hi > lo)
        field = (field - lo) / (hi - lo);
    else
        field.setZero();
    return field;
}

VoxelGrid generate_phantom(std::uint64_t seed, const PhantomConfig& config,
                           const MaterialLibrary& library) {
    if (!(config.occupancy_threshold > 0.0 && config.occupancy_threshold < 1.0))
        throw std::invalid_argument("generate_phantom: threshold must be in (0, 1)");
    const int r = config.resolution;
    const Eigen::ArrayXd noise =
        fractal_noise(seed, r, config.octaves, config.persistence, config.base_cells);

    VoxelGrid grid(r, config.extent);
    const std::vector<Material>& solids = library.solids();

    // Flood fill of 6-connected occupied components in scan order; each
    // component draws one material from a stream keyed by its ordinal.
    std::vector<int> component(grid.voxel_count(), -1);
    std::vector<std::size_t> stack;
    int next_component = 0;
    const auto occupied = [&](std::size_t idx) {
        return noise[static_cast<Eigen::Index>(idx)] >= config.occupancy_threshold;
    };
    for (std::size_t start = 0; start < grid.voxel_count(); ++start) {
        if (!occupied(start) || component[start] >= 0) continue;
        RngStream pick(seed, stream_id(tag_of("phantom-material"), next_component));
        const double lambda = solids[pick.below(solids.size())].lambda;
        stack.assign(1, start);
        component[start] = next_component;
        while (!stack.empty()) {
            const std::size_t cur = stack.back();
            stack.pop_back();
            grid.values()[static_cast<Eigen::Index>(cur)] = lambda;
            const int ix = static_cast<int>(cur % r);
            const int iy = static_cast<int>((cur / r) % r);
            const int iz = static_cast<int>(cur / (static_cast<std::size_t>(r) * r));
            const int neighbors[6][3] = {{ix - 1, iy, iz}, {ix + 1, iy, iz}, {ix, iy - 1, iz},
                                         {ix, iy + 1, iz}, {ix, iy, iz - 1}, {ix, iy, iz + 1}};
            for (const auto& nb : neighbors) {
                if (!grid.inside_index(nb[0], nb[1], nb[2])) continue;
                const std::size_t ni = grid.linear(nb[0], nb[1], nb[2]);
                if (!occupied(ni) || component[ni] >= 0) continue;
                component[ni] = next_component;
                stack.push_back(ni);
            }
        }
        ++next_component;
    }
    return grid;
}

}  // namespace mutomo
