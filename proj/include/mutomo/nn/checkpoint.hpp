#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "mutomo/binio.hpp"
#include "mutomo/core.hpp"
#include "mutomo/nn/adamw.hpp"
#include "mutomo/nn/tensor.hpp"

// Checkpoint container: named parameter tensors (float32, little endian),
// optional optimizer moments, and the model fingerprint that produced them.
// Loading refuses a fingerprint mismatch so weights never silently attach to
// a differently shaped model.
namespace mutomo::nn {

inline constexpr char kCheckpointMagic[5] = "MUCK";
inline constexpr std::uint16_t kCheckpointVersion = 1;

template <typename T>
void save_checkpoint(const std::string& path, const std::string& fingerprint,
                     const std::vector<Param<T>*>& params, const AdamW<T>* opt = nullptr) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open checkpoint for writing: " + path);
    binio::put_bytes(os, kCheckpointMagic, 4);
    binio::put_le<std::uint16_t>(os, kCheckpointVersion);
    binio::put_string(os, fingerprint);
    binio::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(params.size()));
    for (const Param<T>* p : params) {
        binio::put_string(os, p->name);
        binio::put_le<std::uint8_t>(os, static_cast<std::uint8_t>(p->shape.size()));
        for (int d : p->shape) binio::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(d));
        for (T w : p->w) binio::put_f32(os, static_cast<float>(w));
    }
    binio::put_le<std::uint8_t>(os, opt ? 1 : 0);
    if (opt) {
        binio::put_le<std::uint64_t>(os, opt->step_count());
        for (std::size_t i = 0; i < params.size(); ++i) {
            for (double m : opt->first_moments()[i]) binio::put_f64(os, m);
            for (double v : opt->second_moments()[i]) binio::put_f64(os, v);
        }
    }
    if (!os) throw ConfigError("failed writing checkpoint: " + path);
}

// Loads weights (and moments, when present and requested) into an existing
// registry.  Parameter names and shapes must match exactly, in order.
template <typename T>
void load_checkpoint(const std::string& path, const std::string& fingerprint,
                     const std::vector<Param<T>*>& params, AdamW<T>* opt = nullptr) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open checkpoint: " + path);
    binio::expect_magic(is, kCheckpointMagic, "checkpoint");
    const auto version = binio::get_le<std::uint16_t>(is);
    if (version != kCheckpointVersion)
        throw FormatError("checkpoint: unsupported version " + std::to_string(version));
    const std::string stored = binio::get_string(is);
    if (stored != fingerprint)
        throw ConfigError("checkpoint fingerprint mismatch: file has \"" + stored +
                          "\", model is \"" + fingerprint + "\"");
    const auto count = binio::get_le<std::uint32_t>(is);
    if (count != params.size())
        throw FormatError("checkpoint: expected " + std::to_string(params.size()) +
                          " tensors, file has " + std::to_string(count));
    for (Param<T>* p : params) {
        const std::string name = binio::get_string(is);
        if (name != p->name)
            throw FormatError("checkpoint: tensor \"" + name + "\" where \"" + p->name +
                              "\" was expected");
        const auto ndims = binio::get_le<std::uint8_t>(is);
        if (ndims != p->shape.size())
            throw FormatError("checkpoint: rank mismatch for " + p->name);
        for (int d : p->shape) {
            const auto file_d = binio::get_le<std::uint32_t>(is);
            if (file_d != static_cast<std::uint32_t>(d))
                throw FormatError("checkpoint: shape mismatch for " + p->name);
        }
        for (T& w : p->w) w = static_cast<T>(binio::get_f32(is));
    }
    const auto has_opt = binio::get_le<std::uint8_t>(is);
    if (opt) {
        if (!has_opt) throw FormatError("checkpoint: no optimizer state in " + path);
        opt->attach(params);
        opt->set_step_count(binio::get_le<std::uint64_t>(is));
        for (std::size_t i = 0; i < params.size(); ++i) {
            for (double& m : opt->first_moments()[i]) m = binio::get_f64(is);
            for (double& v : opt->second_moments()[i]) v = binio::get_f64(is);
        }
    }
}

// Fingerprint stored alongside weights; any config change that alters shapes
// or semantics must change this string.
inline std::string model_fingerprint(const std::string& scatter_part, const std::string& unet_part) {
    return scatter_part + "|" + unet_part;
}

}  // namespace mutomo::nn
