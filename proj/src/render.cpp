#include "mutomo/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mutomo/core.hpp"

namespace mutomo {

std::vector<unsigned char> slice_pixels(const VoxelGrid& grid, char axis, int index, double peak) {
    if (peak <= 0.0) throw ConfigError("render: peak must be > 0");
    const int r = grid.resolution();
    if (index < 0 || index >= r)
        throw ConfigError("render: slice index " + std::to_string(index) +
                          " out of range for resolution " + std::to_string(r));
    std::vector<unsigned char> px(static_cast<std::size_t>(r) * r);
    // Image columns/rows follow the two remaining axes in (x, y, z) order.
    for (int row = 0; row < r; ++row)
        for (int col = 0; col < r; ++col) {
            double v;
            switch (axis) {
                case 'x': v = grid.values()[grid.linear(index, col, row)]; break;
                case 'y': v = grid.values()[grid.linear(col, index, row)]; break;
                case 'z': v = grid.values()[grid.linear(col, row, index)]; break;
                default: throw ConfigError("render: axis must be x, y or z");
            }
            const double t = std::clamp(v / peak, 0.0, 1.0);
            px[static_cast<std::size_t>(row) * r + col] =
                static_cast<unsigned char>(std::lround(t * 255.0));
        }
    return px;
}

void render_slice(const VoxelGrid& grid, char axis, int index, double peak,
                  const std::string& path) {
    const std::vector<unsigned char> px = slice_pixels(grid, axis, index, peak);
    const int r = grid.resolution();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open image for writing: " + path);
    os << "P5\n" << r << " " << r << "\n255\n";
    os.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (!os) throw ConfigError("failed writing image: " + path);
}

}  // namespace mutomo
