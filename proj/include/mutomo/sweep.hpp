#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "mutomo/pipeline.hpp"

namespace mutomo {

enum class SweepAxis { dosage, momentum_error, detector_resolution };

SweepAxis parse_axis(const std::string& name);
std::string axis_name(SweepAxis axis);

struct SweepOptions {
    SweepAxis axis = SweepAxis::dosage;
    std::vector<double> values;
    std::vector<std::string> methods;  // poca | mlem | munet
    std::string checkpoint;            // trained model, required for munet
    bool finetune = false;             // fine-tune munet per condition
    int finetune_epochs = 10;
};

// For each axis value: regenerate the test set under that condition, run
// each method, one CSV row per (method, condition) in input order.
std::string run_sweep(const RunConfig& cfg, const SweepOptions& opt, std::ostream* log = nullptr);

}  // namespace mutomo
