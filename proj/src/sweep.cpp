#include "mutomo/sweep.hpp"

#include <cmath>
#include <iomanip>
#include <memory>
#include <sstream>

#include "mutomo/train.hpp"

namespace mutomo {
namespace {

RunConfig apply_axis(RunConfig cfg, SweepAxis axis, double value) {
    switch (axis) {
        case SweepAxis::dosage:
            if (value < 1 || value != std::floor(value))
                throw ConfigError("sweep: dosage values must be positive integers");
            cfg.dosage = static_cast<int>(value);
            break;
        case SweepAxis::momentum_error:
            cfg.detector.momentum_error = value;
            break;
        case SweepAxis::detector_resolution:
            if (value < 0 || value != std::floor(value))
                throw ConfigError("sweep: detector resolutions must be non-negative integers");
            cfg.detector.pixels_per_side = static_cast<int>(value);
            break;
    }
    cfg.finalize();
    return cfg;
}

Reconstructor make_runner(const RunConfig& cond, const std::string& method,
                          const SweepOptions& opt, std::ostream* log) {
    if (method == "poca")
        return [cond](const Sample& s) { return reconstruct_poca(cond, s.events); };
    if (method == "mlem")
        return [cond](const Sample& s) { return reconstruct_mlem(cond, s.events); };
    if (method == "munet") {
        if (opt.checkpoint.empty())
            throw ConfigError(
                "sweep: method munet needs a trained model; pass its checkpoint path");
        auto model = std::make_shared<MunetModel<float>>();
        model->build(cond.scatter, cond.unet_config());
        nn::load_checkpoint<float>(opt.checkpoint, model->fingerprint(), model->params());
        if (opt.finetune) {
            if (log) (*log) << "fine-tuning " << opt.finetune_epochs << " epochs\n";
            const std::vector<Sample> ft_train = build_split(cond, "train", cond.train_samples);
            const std::vector<Sample> ft_val = build_split(cond, "val", cond.val_samples);
            TrainConfig tc = cond.train;
            tc.epochs = opt.finetune_epochs;
            train_munet(*model, ft_train, ft_val, cond.geometry, tc, log);
        }
        return [model, geom = cond.geometry](const Sample& s) {
            return munet_predict(*model, s.events, geom);
        };
    }
    throw ConfigError("sweep: unknown method \"" + method + "\"");
}

std::string method_label(const std::string& method, const SweepOptions& opt) {
    return (method == "munet" && opt.finetune) ? "munet-ft" : method;
}

}  // namespace

SweepAxis parse_axis(const std::string& name) {
    if (name == "dosage") return SweepAxis::dosage;
    if (name == "momentum_error") return SweepAxis::momentum_error;
    if (name == "detector_resolution") return SweepAxis::detector_resolution;
    throw ConfigError("sweep: unknown axis \"" + name +
                      "\" (expected dosage, momentum_error or detector_resolution)");
}

std::string axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::dosage: return "dosage";
        case SweepAxis::momentum_error: return "momentum_error";
        case SweepAxis::detector_resolution: return "detector_resolution";
    }
    return "?";
}

std::string run_sweep(const RunConfig& cfg, const SweepOptions& opt, std::ostream* log) {
    if (opt.values.empty()) throw ConfigError("sweep: no axis values");
    if (opt.methods.empty()) throw ConfigError("sweep: no methods");

    std::ostringstream csv;
    csv << "method,axis,axis_value,dosage,mse,mae,psnr,seconds\n";
    for (const double value : opt.values) {
        const RunConfig cond = apply_axis(cfg, opt.axis, value);
        if (log)
            (*log) << "condition " << axis_name(opt.axis) << " = " << value << ": building "
                   << cond.test_samples << " test samples\n";
        const std::vector<Sample> test_set = build_split(cond, "test", cond.test_samples);
        for (const std::string& method : opt.methods) {
            const Reconstructor recon = make_runner(cond, method, opt, log);
            const EvalReport report = evaluate(test_set, recon, cond.metrics_peak);
            csv << method_label(method, opt) << "," << axis_name(opt.axis) << ","
                << std::setprecision(10) << value << "," << cond.dosage << ","
                << std::setprecision(10) << report.mse << "," << std::setprecision(10)
                << report.mae << "," << std::setprecision(10) << report.psnr_mean << ","
                << std::setprecision(3) << std::fixed << report.seconds << "\n";
            csv.unsetf(std::ios::floatfield);
            if (log)
                (*log) << "  " << method_label(method, opt) << ": mse " << report.mse << ", psnr "
                       << report.psnr_mean << " dB (" << report.seconds << " s)\n";
        }
    }
    return csv.str();
}

}  // namespace mutomo
