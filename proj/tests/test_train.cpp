#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mutomo/phantom.hpp"
#include "mutomo/simulator.hpp"
#include "mutomo/train.hpp"

using namespace mutomo;

namespace {

ScatterConfig small_scatter() {
    ScatterConfig sc;
    sc.resolution = 8;
    sc.channels = 4;
    return sc;
}

MunetModel<float> small_model(std::uint64_t seed) {
    MunetModel<float> model;
    model.build(small_scatter(), nn::UNetConfig::named("nano", 4));
    model.init(seed);
    return model;
}

Sample small_sample(std::uint64_t seed, int dosage = 128) {
    PhantomConfig pc;
    pc.resolution = 8;
    Sample s{generate_phantom(seed, pc, default_library()), {}};
    s.events = simulate_event_set(s.truth, dosage, SimConfig{}, seed);
    return s;
}

bool same_weights(MunetModel<float>& a, MunetModel<float>& b) {
    const auto pa = a.params();
    const auto pb = b.params();
    if (pa.size() != pb.size()) return false;
    for (std::size_t i = 0; i < pa.size(); ++i)
        if (pa[i]->w != pb[i]->w) return false;
    return true;
}

}  // namespace

TEST_CASE("training overfits a single sample") {
    MunetModel<float> model = small_model(3);
    const std::vector<Sample> train_set{small_sample(5)};

    TrainConfig cfg;
    cfg.epochs = 600;
    cfg.batch_size = 1;
    cfg.lr = 3e-3;
    cfg.weight_decay = 0.0;  // decay fights memorization
    cfg.seed = 3;
    const std::vector<EpochLog> logs = train_munet(model, train_set, {}, Geometry{}, cfg);

    REQUIRE(logs.size() == 600);
    CHECK(logs.front().epoch == 1);
    CHECK(logs.back().epoch == 600);
    // no validation set: val_mse is reported as NaN
    CHECK(std::isnan(logs.front().val_mse));
    // memorizing one sample must shrink the loss by well over an order of magnitude
    double best = logs.front().train_mse;
    for (const EpochLog& e : logs) {
        CHECK(std::isfinite(e.train_mse));
        best = std::min(best, e.train_mse);
    }
    CHECK(logs.front().train_mse > 1.0);
    CHECK(best < 0.04 * logs.front().train_mse);
    CHECK(logs.back().train_mse < 0.08 * logs.front().train_mse);

    const VoxelGrid pred = munet_predict(model, train_set[0].events, Geometry{});
    const double mse = (pred.values() - train_set[0].truth.values()).square().mean();
    CHECK(mse < 0.12 * logs.front().train_mse);
}

TEST_CASE("training is deterministic for a fixed seed") {
    const std::vector<Sample> train_set{small_sample(11), small_sample(12), small_sample(14),
                                        small_sample(15)};
    const std::vector<Sample> val_set{small_sample(13, 64)};
    // batch size 1 so the epoch-keyed shuffle changes the update sequence
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 1;
    cfg.seed = 9;

    MunetModel<float> a = small_model(9);
    MunetModel<float> b = small_model(9);
    CHECK(same_weights(a, b));
    const auto la = train_munet(a, train_set, val_set, Geometry{}, cfg);
    const auto lb = train_munet(b, train_set, val_set, Geometry{}, cfg);

    REQUIRE(la.size() == lb.size());
    for (std::size_t i = 0; i < la.size(); ++i) {
        CHECK(la[i].train_mse == lb[i].train_mse);
        CHECK(la[i].val_mse == lb[i].val_mse);
    }
    CHECK(same_weights(a, b));
    CHECK(std::isfinite(la.back().val_mse));

    // a different seed shuffles and trains differently
    MunetModel<float> c = small_model(9);
    TrainConfig cfg2 = cfg;
    cfg2.seed = 10;
    train_munet(c, train_set, val_set, Geometry{}, cfg2);
    CHECK(!same_weights(a, c));
}

TEST_CASE("divergence rolls parameters back to the last finished epoch") {
    const std::vector<Sample> train_set{small_sample(21), small_sample(22)};
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.batch_size = 2;
    cfg.lr = 1e8;  // guarantees a blow-up
    cfg.seed = 4;

    MunetModel<float> a = small_model(4);
    std::ostringstream log;
    CHECK_THROWS_AS(train_munet(a, train_set, {}, Geometry{}, cfg, &log), TrainDiverged);

    // count the epochs that finished before the throw, then replay exactly those
    int finished = 0;
    {
        std::istringstream is(log.str());
        std::string line;
        while (std::getline(is, line))
            if (line.rfind("epoch ", 0) == 0) ++finished;
    }
    CHECK(finished < cfg.epochs);
    MunetModel<float> b = small_model(4);
    TrainConfig replay = cfg;
    replay.epochs = finished;
    train_munet(b, train_set, {}, Geometry{}, replay);
    CHECK(same_weights(a, b));
}

TEST_CASE("zero epochs is a no-op") {
    MunetModel<float> a = small_model(6);
    MunetModel<float> b = small_model(6);
    TrainConfig cfg;
    cfg.epochs = 0;
    const auto logs = train_munet(a, {small_sample(7)}, {}, Geometry{}, cfg);
    CHECK(logs.empty());
    CHECK(same_weights(a, b));
}

TEST_CASE("training validates inputs") {
    MunetModel<float> model = small_model(1);
    const Geometry geom;
    TrainConfig cfg;
    cfg.epochs = 1;

    CHECK_THROWS_WITH_AS(train_munet(model, {}, {}, geom, cfg), "train: empty training set",
                         ConfigError);

    PhantomConfig pc;
    pc.resolution = 4;  // model expects 8
    const Sample bad{generate_phantom(1, pc, default_library()), {}};
    CHECK_THROWS_WITH_AS(train_munet(model, {bad}, {}, geom, cfg),
                         "train: sample resolution does not match the model", ConfigError);

    TrainConfig c1;
    c1.epochs = -1;
    CHECK_THROWS_WITH_AS(train_munet(model, {bad}, {}, geom, c1), "train: epochs must be >= 0",
                         ConfigError);
    TrainConfig c2;
    c2.batch_size = 0;
    CHECK_THROWS_WITH_AS(train_munet(model, {bad}, {}, geom, c2), "train: batch size must be >= 1",
                         ConfigError);
    TrainConfig c3;
    c3.lr = 0.0;
    CHECK_THROWS_WITH_AS(train_munet(model, {bad}, {}, geom, c3),
                         "train: learning rate must be > 0", ConfigError);
    TrainConfig c4;
    c4.weight_decay = -0.1;
    CHECK_THROWS_WITH_AS(train_munet(model, {bad}, {}, geom, c4),
                         "train: weight decay must be >= 0", ConfigError);
}

TEST_CASE("an external optimizer carries state across calls") {
    MunetModel<float> model = small_model(2);
    const std::vector<Sample> train_set{small_sample(31)};
    nn::AdamW<float> opt(nn::AdamW<float>::Options{1.0, 0.0, 0.9, 0.999, 1e-8});
    opt.attach(model.params());

    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 1;
    cfg.lr = 1e-3;
    train_munet(model, train_set, {}, Geometry{}, cfg, nullptr, &opt);
    CHECK(opt.step_count() == 2);  // one batch per epoch
    // cfg overrides the optimizer's own hyperparameters
    CHECK(opt.options().lr == 1e-3);

    cfg.epochs = 1;
    train_munet(model, train_set, {}, Geometry{}, cfg, nullptr, &opt);
    CHECK(opt.step_count() == 3);
}
