#include "mutomo/dataset.hpp"

#include <array>
#include <cmath>
#include <fstream>

#include "mutomo/binio.hpp"

namespace mutomo {
namespace {

constexpr char kMagic[5] = "MUTM";
constexpr std::uint16_t kVersion = 1;

// The stored chord is recomputed from the float32 directions, in float32
// arithmetic, so a written file is a fixed point of read-then-write.
std::array<float, 15> event_record(const MuonEvent& ev) {
    std::array<float, 15> f{};
    const std::array<double, 14> r = ev.raw();
    for (int i = 0; i < 13; ++i) f[i] = static_cast<float>(r[i]);
    const float dx = f[9] - f[6];
    const float dy = f[10] - f[7];
    const float dz = f[11] - f[8];
    f[13] = std::sqrt(dx * dx + dy * dy + dz * dz);
    f[14] = static_cast<float>(ev.true_momentum);
    return f;
}

}  // namespace

void write_dataset(const std::string& path, const std::vector<Sample>& samples) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open dataset for writing: " + path);
    binio::put_bytes(os, kMagic, 4);
    binio::put_le<std::uint16_t>(os, kVersion);
    binio::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(samples.size()));
    for (const Sample& sample : samples) {
        const int r = sample.truth.resolution();
        binio::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(r));
        for (Eigen::Index i = 0; i < sample.truth.values().size(); ++i)
            binio::put_f32(os, static_cast<float>(sample.truth.values()[i]));
        binio::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(sample.events.size()));
        for (const MuonEvent& ev : sample.events)
            for (const float v : event_record(ev)) binio::put_f32(os, v);
    }
    if (!os) throw ConfigError("failed writing dataset: " + path);
}

std::vector<Sample> read_dataset(const std::string& path, double extent) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open dataset: " + path);
    binio::expect_magic(is, kMagic, "dataset");
    const auto version = binio::get_le<std::uint16_t>(is);
    if (version != kVersion)
        throw FormatError("dataset: unsupported version " + std::to_string(version));
    const auto count = binio::get_le<std::uint32_t>(is);
    std::vector<Sample> samples;
    samples.reserve(count);
    for (std::uint32_t si = 0; si < count; ++si) {
        const auto r = binio::get_le<std::uint32_t>(is);
        if (r < 1 || r > 4096) throw FormatError("dataset: implausible resolution");
        Sample sample{VoxelGrid(static_cast<int>(r), extent), {}};
        for (Eigen::Index i = 0; i < sample.truth.values().size(); ++i)
            sample.truth.values()[i] = static_cast<double>(binio::get_f32(is));
        const auto n_events = binio::get_le<std::uint32_t>(is);
        sample.events.reserve(n_events);
        for (std::uint32_t ei = 0; ei < n_events; ++ei) {
            float f[15];
            for (float& v : f) v = binio::get_f32(is);
            MuonEvent ev;
            ev.entry_position = Vec3(f[0], f[1], f[2]);
            ev.exit_position = Vec3(f[3], f[4], f[5]);
            ev.entry_direction = Vec3(f[6], f[7], f[8]);
            ev.exit_direction = Vec3(f[9], f[10], f[11]);
            ev.momentum = f[12];
            // f[13] is the chord, derived from the directions on demand.
            ev.true_momentum = f[14];
            sample.events.push_back(ev);
        }
        samples.push_back(std::move(sample));
    }
    return samples;
}

}  // namespace mutomo
