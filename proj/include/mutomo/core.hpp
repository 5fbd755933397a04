#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace mutomo {

using Vec3 = Eigen::Vector3d;

// Scattering theory constants, MeV.
inline constexpr double kEs = 21.0;        // Gaussian multiple-scattering energy scale
inline constexpr double kNominalP = 15.0;  // nominal momentum p0; lambda = 1/X0 at p = p0

// Variance of one transverse-plane scattering angle for a path of
// `thickness` cm through material of scattering density `lambda` cm^-1,
// ultra-relativistic muon of momentum p MeV (v = c).
inline double plane_angle_variance(double p, double thickness, double lambda) {
    const double a = kEs / p;
    return 0.5 * a * a * thickness * lambda;
}

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mutomo
