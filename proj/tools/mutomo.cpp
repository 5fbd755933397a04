#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "mutomo/parallel.hpp"
#include "mutomo/pipeline.hpp"
#include "mutomo/render.hpp"
#include "mutomo/sweep.hpp"
#include "mutomo/train.hpp"

namespace {

struct Common {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    bool quiet = false;
};

mutomo::RunConfig load_config(const Common& common) {
    mutomo::RunConfig cfg;
    if (!common.config_path.empty()) cfg = mutomo::parse_config(common.config_path);
    if (common.seed_set) cfg.seed = common.seed;
    cfg.finalize();
    mutomo::thread_count_override() = common.threads;
    if (!common.quiet) std::cerr << "# resolved config\n" << cfg.resolved();
    return cfg;
}

void add_common(CLI::App* cmd, Common& common) {
    cmd->add_option("--config", common.config_path, "run configuration file (key = value)");
    cmd->add_option("--seed", common.seed, "override the master seed")
        ->each([&common](const std::string&) { common.seed_set = true; });
    cmd->add_option("--threads", common.threads, "worker threads (0 = hardware)");
    cmd->add_flag("--quiet", common.quiet, "suppress the resolved-config echo");
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream os(path);
    if (!os) throw mutomo::ConfigError("cannot open output file: " + path);
    os << text;
    if (!os) throw mutomo::ConfigError("failed writing output file: " + path);
}

std::string report_csv(const std::string& method, const mutomo::EvalReport& r) {
    std::ostringstream os;
    os << "method,count,mse,mae,psnr,seconds\n"
       << method << "," << r.count << "," << std::setprecision(10) << r.mse << ","
       << std::setprecision(10) << r.mae << "," << std::setprecision(10) << r.psnr_mean << ","
       << std::setprecision(3) << std::fixed << r.seconds << "\n";
    return os.str();
}

std::vector<mutomo::Sample> load_or_build(const mutomo::RunConfig& cfg, const std::string& file,
                                          const std::string& split, int count) {
    if (!file.empty()) return mutomo::read_dataset(file, cfg.geometry.object_side);
    return mutomo::build_split(cfg, split, count);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mutomo: muon scattering tomography toolkit"};
    app.require_subcommand(1);

    Common common;

    // phantom: ground-truth grids only, written in the dataset format.
    auto* cmd_phantom = app.add_subcommand("phantom", "generate ground-truth phantoms");
    std::string phantom_out = "phantoms.mutm";
    int phantom_count = 1;
    std::string phantom_split = "test";
    add_common(cmd_phantom, common);
    cmd_phantom->add_option("--out", phantom_out, "output dataset file");
    cmd_phantom->add_option("--count", phantom_count, "number of phantoms");
    cmd_phantom->add_option("--split", phantom_split, "seed namespace (train/val/test)");

    // simulate: phantoms plus detector events.
    auto* cmd_sim = app.add_subcommand("simulate", "generate phantoms and simulate events");
    std::string sim_out = "dataset.mutm";
    int sim_count = 1;
    std::string sim_split = "test";
    add_common(cmd_sim, common);
    cmd_sim->add_option("--out", sim_out, "output dataset file");
    cmd_sim->add_option("--count", sim_count, "number of samples");
    cmd_sim->add_option("--split", sim_split, "seed namespace (train/val/test)");

    // reconstruct: classical or learned methods over a dataset.
    auto* cmd_rec = app.add_subcommand("reconstruct", "reconstruct a dataset");
    std::string rec_method = "poca";
    std::string rec_in, rec_out = "recon.mutm", rec_checkpoint;
    int rec_iters = -1, rec_res = -1;
    add_common(cmd_rec, common);
    cmd_rec->add_option("--method", rec_method, "poca | mlem | munet");
    cmd_rec->add_option("--in", rec_in, "input dataset")->required();
    cmd_rec->add_option("--out", rec_out, "output dataset of reconstructed grids");
    cmd_rec->add_option("--checkpoint", rec_checkpoint, "trained model (munet)");
    cmd_rec->add_option("--iters", rec_iters, "mlem iteration override");
    cmd_rec->add_option("--res", rec_res, "mlem grid resolution override");

    // train: fit the two-stage model.
    auto* cmd_train = app.add_subcommand("train", "train the scatter + U-Net model");
    std::string train_out = "model.muck";
    std::string train_data, val_data, train_init;
    int train_epochs = -1;
    add_common(cmd_train, common);
    cmd_train->add_option("--out", train_out, "checkpoint output path");
    cmd_train->add_option("--train-data", train_data, "training dataset (generated if absent)");
    cmd_train->add_option("--val-data", val_data, "validation dataset (generated if absent)");
    cmd_train->add_option("--init", train_init, "checkpoint to fine-tune from");
    cmd_train->add_option("--epochs", train_epochs, "epoch override");

    // eval: aggregate metrics of one method on the test split.
    auto* cmd_eval = app.add_subcommand("eval", "evaluate a method on the test set");
    std::string eval_method = "poca";
    std::string eval_data, eval_checkpoint, eval_out;
    add_common(cmd_eval, common);
    cmd_eval->add_option("--method", eval_method, "poca | mlem | munet");
    cmd_eval->add_option("--data", eval_data, "test dataset (generated if absent)");
    cmd_eval->add_option("--checkpoint", eval_checkpoint, "trained model (munet)");
    cmd_eval->add_option("--out", eval_out, "CSV output path (default stdout)");

    // sweep: the experiment harness.
    auto* cmd_sweep = app.add_subcommand("sweep", "run an experiment axis");
    std::string sweep_axis = "dosage";
    std::vector<double> sweep_values;
    std::vector<std::string> sweep_methods;
    std::string sweep_out, sweep_checkpoint;
    bool sweep_finetune = false;
    int sweep_ft_epochs = 10;
    add_common(cmd_sweep, common);
    cmd_sweep->add_option("--axis", sweep_axis, "dosage | momentum_error | detector_resolution");
    cmd_sweep->add_option("--values", sweep_values, "axis values")->required()->delimiter(',');
    cmd_sweep->add_option("--methods", sweep_methods, "methods to run")
        ->required()
        ->delimiter(',');
    cmd_sweep->add_option("--checkpoint", sweep_checkpoint, "trained model (munet)");
    cmd_sweep->add_flag("--finetune", sweep_finetune, "fine-tune munet per condition");
    cmd_sweep->add_option("--finetune-epochs", sweep_ft_epochs, "fine-tune epoch count");
    cmd_sweep->add_option("--out", sweep_out, "CSV output path (default stdout)");

    // render: one grid slice to a portable graymap.
    auto* cmd_render = app.add_subcommand("render", "render a grid slice to PGM");
    std::string render_in, render_out = "slice.pgm";
    int render_sample = 0, render_index = 0;
    std::string render_axis = "z";
    double render_peak = -1.0;
    add_common(cmd_render, common);
    cmd_render->add_option("--in", render_in, "dataset holding the grid")->required();
    cmd_render->add_option("--sample", render_sample, "sample index within the dataset");
    cmd_render->add_option("--axis", render_axis, "slice axis: x | y | z");
    cmd_render->add_option("--index", render_index, "voxel index along the axis");
    cmd_render->add_option("--peak", render_peak, "white level (default metrics.peak)");
    cmd_render->add_option("--out", render_out, "output PGM path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_phantom->parsed()) {
            const mutomo::RunConfig cfg = load_config(common);
            std::vector<mutomo::Sample> samples;
            samples.reserve(phantom_count);
            for (int i = 0; i < phantom_count; ++i)
                samples.push_back({mutomo::phantom_for(cfg, phantom_split, i), {}});
            mutomo::write_dataset(phantom_out, samples);
            if (!common.quiet)
                std::cerr << "wrote " << samples.size() << " phantoms to " << phantom_out << "\n";
        } else if (cmd_sim->parsed()) {
            const mutomo::RunConfig cfg = load_config(common);
            const auto samples = mutomo::build_split(cfg, sim_split, sim_count);
            mutomo::write_dataset(sim_out, samples);
            if (!common.quiet)
                std::cerr << "wrote " << samples.size() << " samples (" << cfg.dosage
                          << " events each) to " << sim_out << "\n";
        } else if (cmd_rec->parsed()) {
            mutomo::RunConfig cfg = load_config(common);
            if (rec_iters > 0) cfg.mlem.max_iterations = rec_iters;
            if (rec_res > 0) cfg.mlem.resolution = rec_res;
            const auto samples = mutomo::read_dataset(rec_in, cfg.geometry.object_side);
            mutomo::Reconstructor recon;
            if (rec_method == "poca")
                recon = [&cfg](const mutomo::Sample& s) {
                    return mutomo::reconstruct_poca(cfg, s.events);
                };
            else if (rec_method == "mlem")
                recon = [&cfg](const mutomo::Sample& s) {
                    return mutomo::reconstruct_mlem(cfg, s.events);
                };
            else if (rec_method == "munet") {
                if (rec_checkpoint.empty())
                    throw mutomo::ConfigError(
                        "reconstruct: method munet needs a trained model; pass --checkpoint");
                auto model = std::make_shared<mutomo::MunetModel<float>>();
                model->build(cfg.scatter, cfg.unet_config());
                mutomo::nn::load_checkpoint<float>(rec_checkpoint, model->fingerprint(),
                                                   model->params());
                recon = [model, &cfg](const mutomo::Sample& s) {
                    return mutomo::munet_predict(*model, s.events, cfg.geometry);
                };
            } else {
                throw mutomo::ConfigError("reconstruct: unknown method \"" + rec_method + "\"");
            }
            std::vector<mutomo::Sample> out;
            out.reserve(samples.size());
            for (const auto& s : samples) out.push_back({recon(s), {}});
            mutomo::write_dataset(rec_out, out);
            if (!common.quiet)
                std::cerr << "reconstructed " << out.size() << " samples to " << rec_out << "\n";
        } else if (cmd_train->parsed()) {
            mutomo::RunConfig cfg = load_config(common);
            if (train_epochs >= 0) cfg.train.epochs = train_epochs;
            const auto train_set = load_or_build(cfg, train_data, "train", cfg.train_samples);
            const auto val_set = load_or_build(cfg, val_data, "val", cfg.val_samples);
            mutomo::MunetModel<float> model;
            model.build(cfg.scatter, cfg.unet_config());
            mutomo::nn::AdamW<float> opt;
            auto params = model.params();
            if (!train_init.empty()) {
                mutomo::nn::load_checkpoint<float>(train_init, model.fingerprint(), params,
                                                   &opt);
            } else {
                model.init(cfg.seed);
                opt.attach(params);
            }
            try {
                mutomo::train_munet(model, train_set, val_set, cfg.geometry, cfg.train,
                                    common.quiet ? nullptr : &std::cerr, &opt);
            } catch (const mutomo::TrainDiverged& e) {
                mutomo::nn::save_checkpoint<float>(train_out, model.fingerprint(), params, &opt);
                throw mutomo::ConfigError(std::string(e.what()) + "; rolled-back checkpoint at " +
                                          train_out);
            }
            mutomo::nn::save_checkpoint<float>(train_out, model.fingerprint(), params, &opt);
            if (!common.quiet) std::cerr << "saved checkpoint to " << train_out << "\n";
        } else if (cmd_eval->parsed()) {
            const mutomo::RunConfig cfg = load_config(common);
            const auto test_set = load_or_build(cfg, eval_data, "test", cfg.test_samples);
            mutomo::SweepOptions opt;
            opt.checkpoint = eval_checkpoint;
            mutomo::Reconstructor recon;
            if (eval_method == "poca")
                recon = [&cfg](const mutomo::Sample& s) {
                    return mutomo::reconstruct_poca(cfg, s.events);
                };
            else if (eval_method == "mlem")
                recon = [&cfg](const mutomo::Sample& s) {
                    return mutomo::reconstruct_mlem(cfg, s.events);
                };
            else if (eval_method == "munet") {
                if (eval_checkpoint.empty())
                    throw mutomo::ConfigError(
                        "eval: method munet needs a trained model; pass --checkpoint");
                auto model = std::make_shared<mutomo::MunetModel<float>>();
                model->build(cfg.scatter, cfg.unet_config());
                mutomo::nn::load_checkpoint<float>(eval_checkpoint, model->fingerprint(),
                                                   model->params());
                recon = [model, &cfg](const mutomo::Sample& s) {
                    return mutomo::munet_predict(*model, s.events, cfg.geometry);
                };
            } else {
                throw mutomo::ConfigError("eval: unknown method \"" + eval_method + "\"");
            }
            const mutomo::EvalReport report =
                mutomo::evaluate(test_set, recon, cfg.metrics_peak);
            write_text(eval_out, report_csv(eval_method, report));
        } else if (cmd_sweep->parsed()) {
            const mutomo::RunConfig cfg = load_config(common);
            mutomo::SweepOptions opt;
            opt.axis = mutomo::parse_axis(sweep_axis);
            opt.values = sweep_values;
            opt.methods = sweep_methods;
            opt.checkpoint = sweep_checkpoint;
            opt.finetune = sweep_finetune;
            opt.finetune_epochs = sweep_ft_epochs;
            const std::string csv =
                mutomo::run_sweep(cfg, opt, common.quiet ? nullptr : &std::cerr);
            write_text(sweep_out, csv);
        } else if (cmd_render->parsed()) {
            const mutomo::RunConfig cfg = load_config(common);
            const auto samples = mutomo::read_dataset(render_in, cfg.geometry.object_side);
            if (render_sample < 0 || render_sample >= static_cast<int>(samples.size()))
                throw mutomo::ConfigError("render: sample index out of range");
            if (render_axis.size() != 1)
                throw mutomo::ConfigError("render: axis must be x, y or z");
            const double peak = render_peak > 0.0 ? render_peak : cfg.metrics_peak;
            mutomo::render_slice(samples[render_sample].truth, render_axis[0], render_index,
                                 peak, render_out);
            if (!common.quiet) std::cerr << "wrote " << render_out << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
