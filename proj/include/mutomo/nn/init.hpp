#pragma once

#include "mutomo/nn/tensor.hpp"
#include "mutomo/rng.hpp"

namespace mutomo::nn {

// Truncated normal: resample outside two standard deviations, then scale.
inline double truncated_normal(RngStream& rng, double std_dev) {
    double z;
    do {
        z = rng.normal();
    } while (std::abs(z) > 2.0);
    return z * std_dev;
}

// Weights are keyed by parameter name so initialization is independent of
// registration order.
template <typename T>
void init_weight(Param<T>& p, std::uint64_t seed, double std_dev = 0.02) {
    RngStream rng(seed, stream_id(tag_of("param-init"), tag_of(p.name.c_str())));
    for (T& w : p.w) w = static_cast<T>(truncated_normal(rng, std_dev));
}

template <typename T>
void init_constant(Param<T>& p, double value) {
    for (T& w : p.w) w = static_cast<T>(value);
}

}  // namespace mutomo::nn
