#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "mutomo/dataset.hpp"
#include "mutomo/nn/adamw.hpp"
#include "mutomo/nn/checkpoint.hpp"
#include "mutomo/nn/unet.hpp"
#include "mutomo/scatter_op.hpp"

namespace mutomo {

struct TrainConfig {
    int epochs = 15;
    int batch_size = 8;
    double lr = 2e-3;
    double weight_decay = 4e-3;
    std::uint64_t seed = 1;

    void validate() const {
        if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
        if (batch_size < 1) throw ConfigError("train: batch size must be >= 1");
        if (!(lr > 0)) throw ConfigError("train: learning rate must be > 0");
        if (weight_decay < 0) throw ConfigError("train: weight decay must be >= 0");
    }
};

// The two-stage model: scatter operation feeding the U-Net.
template <typename T>
struct MunetModel {
    ScatterConfig scatter_cfg;
    nn::UNetConfig unet_cfg;
    ScatterModel<T> scatter;
    nn::UNet<T> unet;

    void build(const ScatterConfig& sc, nn::UNetConfig uc) {
        uc.in_channels = sc.channels;
        uc.validate();
        if (sc.resolution % uc.resolution_divisor() != 0)
            throw ConfigError("munet: resolution " + std::to_string(sc.resolution) +
                              " is not divisible by the U-Net downsampling factor " +
                              std::to_string(uc.resolution_divisor()));
        scatter_cfg = sc;
        unet_cfg = uc;
        scatter.build(sc);
        unet.build(uc);
    }

    void init(std::uint64_t seed) {
        scatter.init(seed);
        unet.init(seed);
    }

    std::vector<nn::Param<T>*> params() {
        auto out = scatter.params();
        for (auto* p : unet.params()) out.push_back(p);
        return out;
    }

    std::string fingerprint() const {
        return nn::model_fingerprint(scatter_cfg.fingerprint(), unet_cfg.fingerprint());
    }
};

template <typename T>
VoxelGrid munet_predict(MunetModel<T>& model, const std::vector<MuonEvent>& events,
                        const Geometry& geom) {
    ScatterForward<T> fwd = scatter_forward(events, model.scatter, geom, false);
    const nn::Tensor4<T> pred = model.unet.forward(fwd.fused, nullptr);
    VoxelGrid grid(model.scatter_cfg.resolution, geom.object_side);
    for (std::size_t i = 0; i < pred.size(); ++i)
        grid.values()[static_cast<Eigen::Index>(i)] = static_cast<double>(pred.v[i]);
    return grid;
}

template <typename T>
nn::Tensor4<T> truth_tensor(const VoxelGrid& truth) {
    const int r = truth.resolution();
    nn::Tensor4<T> t(r, r, r, 1);
    for (std::size_t i = 0; i < t.size(); ++i)
        t.v[i] = static_cast<T>(truth.values()[static_cast<Eigen::Index>(i)]);
    return t;
}

struct EpochLog {
    int epoch = 0;
    double train_mse = 0.0;
    double val_mse = 0.0;
    double seconds = 0.0;
};

// Thrown when a non-finite loss appears; parameters have already been rolled
// back to the end of the previous epoch by then.
struct TrainDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Minibatch AdamW training on the voxelwise MSE.  Deterministic for a fixed
// seed: shuffling is keyed by (seed, epoch) and every reduction runs in a
// fixed order.
template <typename T>
std::vector<EpochLog> train_munet(MunetModel<T>& model, const std::vector<Sample>& train_set,
                                  const std::vector<Sample>& val_set, const Geometry& geom,
                                  const TrainConfig& cfg, std::ostream* log = nullptr,
                                  nn::AdamW<T>* opt_in = nullptr) {
    cfg.validate();
    if (train_set.empty()) throw ConfigError("train: empty training set");
    for (const Sample& s : train_set)
        if (s.truth.resolution() != model.scatter_cfg.resolution)
            throw ConfigError("train: sample resolution does not match the model");

    std::vector<nn::Param<T>*> params = model.params();
    nn::AdamW<T> local_opt(typename nn::AdamW<T>::Options{cfg.lr, cfg.weight_decay, 0.9, 0.999,
                                                          1e-8});
    nn::AdamW<T>* opt = opt_in ? opt_in : &local_opt;
    if (!opt_in) opt->attach(params);
    opt->options().lr = cfg.lr;
    opt->options().weight_decay = cfg.weight_decay;

    auto snapshot = [&] {
        std::vector<std::vector<T>> w(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) w[i] = params[i]->w;
        return w;
    };
    auto restore = [&](const std::vector<std::vector<T>>& w) {
        for (std::size_t i = 0; i < params.size(); ++i) params[i]->w = w[i];
    };
    std::vector<std::vector<T>> last_good = snapshot();

    auto val_mse = [&]() -> double {
        if (val_set.empty()) return std::numeric_limits<double>::quiet_NaN();
        double acc = 0.0;
        for (const Sample& s : val_set) {
            const VoxelGrid pred = munet_predict(model, s.events, geom);
            acc += (pred.values() - s.truth.values()).square().mean();
        }
        return acc / static_cast<double>(val_set.size());
    };

    std::vector<EpochLog> logs;
    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        RngStream shuffle(cfg.seed, stream_id(tag_of("train-shuffle"), static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle.below(i)]);

        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            const T inv_batch = T(1) / static_cast<T>(end - start);
            for (nn::Param<T>* p : params) p->zero_grad();
            double batch_loss = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                const Sample& s = train_set[order[k]];
                ScatterForward<T> fwd = scatter_forward(s.events, model.scatter, geom, true);
                typename nn::UNet<T>::Cache ucache;
                const nn::Tensor4<T> pred = model.unet.forward(fwd.fused, &ucache);
                nn::Tensor4<T> grad;
                const T loss = nn::mse_loss(pred, truth_tensor<T>(s.truth), grad);
                batch_loss += static_cast<double>(loss);
                for (T& g : grad.v) g *= inv_batch;
                const nn::Tensor4<T> g_fused = model.unet.backward(ucache, grad);
                scatter_backward(fwd, model.scatter, g_fused);
            }
            batch_loss /= static_cast<double>(end - start);
            if (!std::isfinite(batch_loss)) {
                restore(last_good);
                throw TrainDiverged("train: non-finite loss in epoch " + std::to_string(epoch + 1) +
                                    "; parameters rolled back to the last finished epoch");
            }
            try {
                opt->step();
            } catch (const std::runtime_error& e) {
                restore(last_good);
                throw TrainDiverged(std::string(e.what()) + "; parameters rolled back");
            }
            epoch_loss += batch_loss;
            ++batches;
        }

        EpochLog entry;
        entry.epoch = epoch + 1;
        entry.train_mse = epoch_loss / static_cast<double>(batches);
        entry.val_mse = val_mse();
        entry.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        logs.push_back(entry);
        last_good = snapshot();
        if (log) {
            (*log) << "epoch " << entry.epoch << "/" << cfg.epochs << "  train_mse "
                   << entry.train_mse << "  val_mse " << entry.val_mse << "  (" << entry.seconds
                   << " s)\n";
            log->flush();
        }
    }
    return logs;
}

}  // namespace mutomo
