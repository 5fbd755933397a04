#include "mutomo/pipeline.hpp"

#include <chrono>

#include "mutomo/phantom.hpp"
#include "mutomo/rng.hpp"

namespace mutomo {

std::uint64_t derived_seed(std::uint64_t master, const std::string& what, std::uint64_t index) {
    return detail::mix64(master ^ stream_id(tag_of(what.c_str()), index));
}

VoxelGrid phantom_for(const RunConfig& cfg, const std::string& split, int index) {
    return generate_phantom(derived_seed(cfg.seed, "phantom-" + split, index), cfg.phantom,
                            default_library());
}

Sample sample_for(const RunConfig& cfg, const std::string& split, int index) {
    Sample s{phantom_for(cfg, split, index), {}};
    s.events = simulate_event_set(s.truth, cfg.dosage, cfg.sim_config(),
                                  derived_seed(cfg.seed, "events-" + split, index));
    return s;
}

std::vector<Sample> build_split(const RunConfig& cfg, const std::string& split, int count) {
    std::vector<Sample> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.push_back(sample_for(cfg, split, i));
    return out;
}

VoxelGrid reconstruct_poca(const RunConfig& cfg, const std::vector<MuonEvent>& events) {
    return poca_reconstruct(events, cfg.poca, cfg.geometry);
}

VoxelGrid reconstruct_mlem(const RunConfig& cfg, const std::vector<MuonEvent>& events) {
    return mlem_reconstruct(events, cfg.mlem, cfg.geometry);
}

VoxelGrid upsample_nearest(const VoxelGrid& coarse, int target_resolution) {
    const int rc = coarse.resolution();
    if (target_resolution == rc) return coarse;
    if (target_resolution < rc || target_resolution % rc != 0)
        throw ConfigError("upsample: target resolution " + std::to_string(target_resolution) +
                          " is not a multiple of " + std::to_string(rc));
    const int f = target_resolution / rc;
    VoxelGrid fine(target_resolution, coarse.extent());
    for (int iz = 0; iz < target_resolution; ++iz)
        for (int iy = 0; iy < target_resolution; ++iy)
            for (int ix = 0; ix < target_resolution; ++ix)
                fine(ix, iy, iz) = coarse(ix / f, iy / f, iz / f);
    return fine;
}

EvalReport evaluate(const std::vector<Sample>& test_set, const Reconstructor& recon, double peak) {
    if (test_set.empty()) throw ConfigError("evaluate: empty test set");
    EvalReport report;
    report.count = static_cast<int>(test_set.size());
    const auto t0 = std::chrono::steady_clock::now();
    for (const Sample& s : test_set) {
        VoxelGrid pred = recon(s);
        if (pred.resolution() != s.truth.resolution())
            pred = upsample_nearest(pred, s.truth.resolution());
        const auto [mse, mae] = voxel_metrics(pred, s.truth);
        report.mse += mse;
        report.mae += mae;
        report.psnr_mean += psnr(mse, peak);
    }
    report.mse /= report.count;
    report.mae /= report.count;
    report.psnr_mean /= report.count;
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace mutomo
