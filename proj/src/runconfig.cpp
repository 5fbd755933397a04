#include "mutomo/runconfig.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace mutomo {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for " + key + ": \"" + v + "\"");
    }
}

long long parse_int(const std::string& key, const std::string& v) {
    long long x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size())
        throw ConfigError("config: bad integer value for " + key + ": \"" + v + "\"");
    return x;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError("config: empty element in list for " + key);
        out.push_back(static_cast<int>(parse_int(key, item)));
    }
    if (out.empty()) throw ConfigError("config: empty list for " + key);
    return out;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::string fmt(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"seed",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.seed = static_cast<std::uint64_t>(parse_int(k, v));
         }},
        {"geometry.object_side",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.geometry.object_side = parse_double(k, v);
         }},
        {"geometry.detector_half_side",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.geometry.detector_half_side = parse_double(k, v);
         }},
        {"geometry.detector_gap",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.geometry.detector_gap = parse_double(k, v);
         }},
        {"geometry.plane_spacing",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.geometry.plane_spacing = parse_double(k, v);
         }},
        {"beam.gamma",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.beam.gamma = parse_double(k, v);
         }},
        {"beam.p_min",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.beam.p_min = parse_double(k, v);
         }},
        {"beam.p_max",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.beam.p_max = parse_double(k, v);
         }},
        {"detector.pixels",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.detector.pixels_per_side = static_cast<int>(parse_int(k, v));
         }},
        {"detector.momentum_error",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.detector.momentum_error = parse_double(k, v);
         }},
        {"sim.dosage",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.dosage = static_cast<int>(parse_int(k, v));
         }},
        {"phantom.resolution",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.phantom.resolution = static_cast<int>(parse_int(k, v));
         }},
        {"phantom.octaves",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.phantom.octaves = static_cast<int>(parse_int(k, v));
         }},
        {"phantom.persistence",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.phantom.persistence = parse_double(k, v);
         }},
        {"phantom.base_cells",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.phantom.base_cells = static_cast<int>(parse_int(k, v));
         }},
        {"phantom.threshold",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.phantom.occupancy_threshold = parse_double(k, v);
         }},
        {"poca.resolution",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.poca.resolution = static_cast<int>(parse_int(k, v));
         }},
        {"poca.tau",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.poca.tau = parse_double(k, v);
         }},
        {"mlem.resolution",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.mlem.resolution = static_cast<int>(parse_int(k, v));
         }},
        {"mlem.max_iterations",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.mlem.max_iterations = static_cast<int>(parse_int(k, v));
         }},
        {"mlem.tolerance",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.mlem.tolerance = parse_double(k, v);
         }},
        {"mlem.floor",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.mlem.lambda_floor = parse_double(k, v);
         }},
        {"mlem.initial_lambda",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.mlem.initial_lambda = parse_double(k, v);
         }},
        {"scatter.point_size",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.scatter.point_size = static_cast<int>(parse_int(k, v));
         }},
        {"scatter.channels",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.scatter.channels = static_cast<int>(parse_int(k, v));
         }},
        {"scatter.tau",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.scatter.tau = parse_double(k, v);
         }},
        {"scatter.projector_hidden",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.scatter.projector_hidden = parse_int_list(k, v);
         }},
        {"scatter.fuse_hidden",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.scatter.fuse_hidden = parse_int_list(k, v);
         }},
        {"unet.variant",
         [](RunConfig& c, const std::string&, const std::string& v) { c.unet_variant = v; }},
        {"unet.kernel",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.unet_kernel = static_cast<int>(parse_int(k, v));
         }},
        {"train.epochs",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.train.epochs = static_cast<int>(parse_int(k, v));
         }},
        {"train.batch",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.train.batch_size = static_cast<int>(parse_int(k, v));
         }},
        {"train.lr",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.train.lr = parse_double(k, v);
         }},
        {"train.weight_decay",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.train.weight_decay = parse_double(k, v);
         }},
        {"metrics.peak",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.metrics_peak = parse_double(k, v);
         }},
        {"data.train_samples",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.train_samples = static_cast<int>(parse_int(k, v));
         }},
        {"data.val_samples",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.val_samples = static_cast<int>(parse_int(k, v));
         }},
        {"data.test_samples",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.test_samples = static_cast<int>(parse_int(k, v));
         }},
    };
    return table;
}

}  // namespace

void RunConfig::finalize() {
    phantom.extent = geometry.object_side;
    scatter.resolution = phantom.resolution;
    scatter.placement_seed = seed;
    train.seed = seed;

    geometry.validate();
    beam.validate();
    detector.validate();
    scatter.validate();
    train.validate();
    unet_config();  // validates the variant name and kernel
    if (dosage < 1) throw ConfigError("config: sim.dosage must be >= 1");
    if (metrics_peak <= 0.0) throw ConfigError("config: metrics.peak must be > 0");
    if (train_samples < 0 || val_samples < 0 || test_samples < 0)
        throw ConfigError("config: dataset split sizes must be >= 0");
    if (poca.resolution < 1) throw ConfigError("config: poca.resolution must be >= 1");
}

SimConfig RunConfig::sim_config() const { return SimConfig{geometry, beam, detector}; }

nn::UNetConfig RunConfig::unet_config() const {
    nn::UNetConfig uc = nn::UNetConfig::named(unet_variant, scatter.channels);
    uc.kernel = unet_kernel;
    uc.validate();
    return uc;
}

std::string RunConfig::resolved() const {
    std::ostringstream os;
    os << "seed = " << seed << "\n"
       << "geometry.object_side = " << fmt(geometry.object_side) << "\n"
       << "geometry.detector_half_side = " << fmt(geometry.detector_half_side) << "\n"
       << "geometry.detector_gap = " << fmt(geometry.detector_gap) << "\n"
       << "geometry.plane_spacing = " << fmt(geometry.plane_spacing) << "\n"
       << "beam.gamma = " << fmt(beam.gamma) << "\n"
       << "beam.p_min = " << fmt(beam.p_min) << "\n"
       << "beam.p_max = " << fmt(beam.p_max) << "\n"
       << "detector.pixels = " << detector.pixels_per_side << "\n"
       << "detector.momentum_error = " << fmt(detector.momentum_error) << "\n"
       << "sim.dosage = " << dosage << "\n"
       << "phantom.resolution = " << phantom.resolution << "\n"
       << "phantom.octaves = " << phantom.octaves << "\n"
       << "phantom.persistence = " << fmt(phantom.persistence) << "\n"
       << "phantom.base_cells = " << phantom.base_cells << "\n"
       << "phantom.threshold = " << fmt(phantom.occupancy_threshold) << "\n"
       << "poca.resolution = " << poca.resolution << "\n"
       << "poca.tau = " << fmt(poca.tau) << "\n"
       << "mlem.resolution = " << mlem.resolution << "\n"
       << "mlem.max_iterations = " << mlem.max_iterations << "\n"
       << "mlem.tolerance = " << fmt(mlem.tolerance) << "\n"
       << "mlem.floor = " << fmt(mlem.lambda_floor) << "\n"
       << "mlem.initial_lambda = " << fmt(mlem.initial_lambda) << "\n"
       << "scatter.point_size = " << scatter.point_size << "\n"
       << "scatter.channels = " << scatter.channels << "\n"
       << "scatter.tau = " << fmt(scatter.tau) << "\n"
       << "scatter.projector_hidden = " << fmt(scatter.projector_hidden) << "\n"
       << "scatter.fuse_hidden = " << fmt(scatter.fuse_hidden) << "\n"
       << "unet.variant = " << unet_variant << "\n"
       << "unet.kernel = " << unet_kernel << "\n"
       << "train.epochs = " << train.epochs << "\n"
       << "train.batch = " << train.batch_size << "\n"
       << "train.lr = " << fmt(train.lr) << "\n"
       << "train.weight_decay = " << fmt(train.weight_decay) << "\n"
       << "metrics.peak = " << fmt(metrics_peak) << "\n"
       << "data.train_samples = " << train_samples << "\n"
       << "data.val_samples = " << val_samples << "\n"
       << "data.test_samples = " << test_samples << "\n"
       << "# scatter.resolution = " << scatter.resolution << " (follows phantom.resolution)\n"
       << "# paper scale: data.train_samples = 20000, data.val_samples = 1600, "
          "data.test_samples = 1600, phantom.resolution = 64\n";
    return os.str();
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " is not key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) throw ConfigError("config: unknown key \"" + key + "\"");
        it->second(cfg, key, value);
    }
    cfg.finalize();
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace mutomo
