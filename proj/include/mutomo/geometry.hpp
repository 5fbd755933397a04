#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "mutomo/core.hpp"

namespace mutomo {

struct Ray {
    Vec3 origin = Vec3::Zero();
    Vec3 direction = Vec3::UnitZ();

    Vec3 at(double t) const { return origin + t * direction; }
};

// Object cube centered at the origin, square detector planes above and below.
// Each detector side carries two parallel measurement planes `plane_spacing`
// apart so finite pixel pitch corrupts directions as well as positions.
struct Geometry {
    double object_side = 100.0;
    double detector_half_side = 100.0;
    double detector_gap = 50.0;
    double plane_spacing = 10.0;

    double half_side() const { return 0.5 * object_side; }
    double upper_z() const { return half_side() + detector_gap; }
    double lower_z() const { return -upper_z(); }
    double upper_aux_z() const { return upper_z() + plane_spacing; }
    double lower_aux_z() const { return lower_z() - plane_spacing; }

    void validate() const {
        if (object_side <= 0.0 || detector_half_side <= 0.0 || detector_gap <= 0.0 ||
            plane_spacing <= 0.0)
            throw ConfigError("geometry lengths must be positive");
    }
};

// Parameter interval of a ray inside the axis-aligned cube [-half, half]^3
// (slab method). Empty when the line misses the cube.
inline std::optional<std::pair<double, double>> clip_to_cube(const Ray& ray, double half) {
    double t0 = -std::numeric_limits<double>::infinity();
    double t1 = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        const double o = ray.origin[a];
        const double d = ray.direction[a];
        if (std::abs(d) < 1e-15) {
            if (std::abs(o) > half) return std::nullopt;
            continue;
        }
        double ta = (-half - o) / d;
        double tb = (half - o) / d;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
    }
    if (!(t0 < t1)) return std::nullopt;
    return std::make_pair(t0, t1);
}

// Deterministic orthonormal frame (e1, e2) spanning the plane normal to d.
inline void transverse_basis(const Vec3& d, Vec3& e1, Vec3& e2) {
    const Vec3 a = std::abs(d.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
    e1 = d.cross(a).normalized();
    e2 = d.cross(e1);
}

}  // namespace mutomo
