#pragma once

#include <cstdint>
#include <string>

#include "mutomo/mlem.hpp"
#include "mutomo/phantom.hpp"
#include "mutomo/poca.hpp"
#include "mutomo/scatter_op.hpp"
#include "mutomo/simulator.hpp"
#include "mutomo/train.hpp"

namespace mutomo {

// Every knob of a run, parsed from a key=value file.  Unknown keys are
// rejected; the resolved configuration can be echoed for the run log.
struct RunConfig {
    std::uint64_t seed = 1;

    Geometry geometry;
    BeamConfig beam;
    DetectorConfig detector;
    int dosage = 1024;

    PhantomConfig phantom;
    PocaReconConfig poca;
    MlemConfig mlem;
    ScatterConfig scatter;
    std::string unet_variant = "nano";
    int unet_kernel = 3;
    TrainConfig train;

    double metrics_peak = 3.45;
    int train_samples = 512;
    int val_samples = 64;
    int test_samples = 64;

    // Couples dependent fields (phantom extent follows the object cube, the
    // scatter grid follows the phantom grid, derived seeds follow the master
    // seed) and validates everything.
    void finalize();

    SimConfig sim_config() const;
    nn::UNetConfig unet_config() const;

    std::string resolved() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);

}  // namespace mutomo
