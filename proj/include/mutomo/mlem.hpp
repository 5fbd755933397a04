#pragma once

#include <vector>

#include "mutomo/event.hpp"
#include "mutomo/geometry.hpp"
#include "mutomo/grid.hpp"

namespace mutomo {

struct MlemConfig {
    int resolution = 8;
    int max_iterations = 50;
    double tolerance = 1e-6;       // relative log-likelihood change
    double lambda_floor = 1e-6;    // cm^-1
    double initial_lambda = 1.0 / 36.08;  // water
    double p0 = kNominalP;         // MeV
};

// Gaussian angle-only log-likelihood: for each event crossing the cube and
// each transverse component, -1/2 log sigma^2 - theta^2 / (2 sigma^2) with
// sigma^2 = p_r^2 sum_j L_ij lambda_j and p_r = p0 / momentum estimate.
double log_likelihood(const VoxelGrid& grid, const std::vector<MuonEvent>& events,
                      const Geometry& geom, double p0 = kNominalP);

// dLL/dlambda_j = sum_i p_r^2 L_ij (D_i / (2 sigma_i^4) - 1 / sigma_i^2).
Eigen::ArrayXd log_likelihood_gradient(const VoxelGrid& grid,
                                       const std::vector<MuonEvent>& events, const Geometry& geom,
                                       double p0 = kNominalP);

// EM-style iteration with a step-halving safeguard; the likelihood sequence
// is non-decreasing and every iterate stays at or above lambda_floor.
// ll_trace, when given, receives the likelihood of the initial guess followed
// by the likelihood of each accepted iterate.
VoxelGrid mlem_reconstruct(const std::vector<MuonEvent>& events, const MlemConfig& config,
                           const Geometry& geom, std::vector<double>* ll_trace = nullptr);

}  // namespace mutomo
