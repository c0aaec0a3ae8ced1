#include "specmatch/config.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "specmatch/error.hpp"

namespace specmatch {

namespace {

std::string trim(const std::string& s) {
    const std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& why) {
    throw ConfigError("config: key '" + key + "' " + why);
}

double parse_double(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0') bad_value(key, "has non-numeric value '" + value + "'");
    return v;
}

long parse_long(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const long v = std::strtol(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0') bad_value(key, "has non-integer value '" + value + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0' || value.find('-') != std::string::npos) {
        bad_value(key, "has non-integer value '" + value + "'");
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true") return true;
    if (value == "0" || value == "false") return false;
    bad_value(key, "must be true/false or 1/0, got '" + value + "'");
}

int checked_int(const std::string& key, const std::string& value, long lo, long hi) {
    const long v = parse_long(key, value);
    if (v < lo || v > hi) {
        bad_value(key, "out of range: must lie in [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "], got " + value);
    }
    return static_cast<int>(v);
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

void config_set(PipelineConfig& config, const std::string& key, const std::string& value) {
    if (key == "normalize") {
        if (value == "none") {
            config.normalize = NormalizeMode::None;
        } else if (value == "per_band_minmax") {
            config.normalize = NormalizeMode::PerBandMinMax;
        } else {
            bad_value(key, "must be 'none' or 'per_band_minmax', got '" + value + "'");
        }
    } else if (key == "fraction") {
        const double v = parse_double(key, value);
        if (!(v > 0.0 && v < 1.0)) bad_value(key, "out of range: must lie in (0,1), got " + value);
        config.fraction = v;
    } else if (key == "k_target") {
        config.k_target = checked_int(key, value, 1, 1 << 20);
    } else if (key == "k_background") {
        config.k_background = checked_int(key, value, 1, 1 << 20);
    } else if (key == "temperature") {
        const double v = parse_double(key, value);
        if (!(v > 0.0)) bad_value(key, "out of range: must be > 0, got " + value);
        config.temperature = v;
    } else if (key == "mix_noise_sigma") {
        const double v = parse_double(key, value);
        if (v < 0.0) bad_value(key, "out of range: must be >= 0, got " + value);
        config.mix_noise_sigma = v;
    } else if (key == "learning_rate") {
        const double v = parse_double(key, value);
        if (!(v > 0.0)) bad_value(key, "out of range: must be > 0, got " + value);
        config.learning_rate = v;
    } else if (key == "batch_size") {
        config.batch_size = checked_int(key, value, 2, 1 << 20);
    } else if (key == "pretext_epochs") {
        config.pretext_epochs = checked_int(key, value, 0, 1 << 20);
    } else if (key == "pretext_batches") {
        config.pretext_batches = checked_int(key, value, 1, 1 << 20);
    } else if (key == "npair_epochs") {
        config.npair_epochs = checked_int(key, value, 0, 1 << 20);
    } else if (key == "npair_batches") {
        config.npair_batches = checked_int(key, value, 1, 1 << 20);
    } else if (key == "npair_classes") {
        const int v = checked_int(key, value, 0, 1 << 20);
        if (v == 1) bad_value(key, "out of range: must be 0 (all) or >= 2, got " + value);
        config.npair_classes = v;
    } else if (key == "hard_mining") {
        config.hard_mining = parse_bool(key, value);
    } else if (key == "conv_channels") {
        config.conv_channels = checked_int(key, value, 1, 1 << 16);
    } else if (key == "kernel") {
        const int v = checked_int(key, value, 1, 1 << 16);
        if (v % 2 == 0) bad_value(key, "must be odd, got " + value);
        config.kernel = v;
    } else if (key == "hidden") {
        config.hidden = checked_int(key, value, 1, 1 << 20);
    } else if (key == "embed") {
        config.embed = checked_int(key, value, 1, 1 << 20);
    } else if (key == "ridge") {
        if (value == "auto") {
            config.ridge = -1.0;
        } else {
            const double v = parse_double(key, value);
            if (v < 0.0) bad_value(key, "must be 'auto' or >= 0, got " + value);
            config.ridge = v;
        }
    } else if (key == "seed") {
        config.seed = parse_u64(key, value);
    } else if (key == "threads") {
        config.threads = checked_int(key, value, 1, 4096);
    } else if (key == "kmeans_restarts") {
        config.kmeans_restarts = checked_int(key, value, 1, 1 << 16);
    } else if (key == "kmeans_max_iter") {
        config.kmeans_max_iter = checked_int(key, value, 1, 1 << 24);
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);

    PipelineConfig config;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string::size_type hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const std::string::size_type eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config: line " + std::to_string(lineno) + " of " + path +
                              " is not key=value: '" + t + "'");
        }
        config_set(config, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    config.validate();
    return config;
}

void PipelineConfig::validate() const {
    if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("config: key 'fraction' out of range");
    if (k_target < 1) throw ConfigError("config: key 'k_target' out of range");
    if (k_background < 1) throw ConfigError("config: key 'k_background' out of range");
    if (!(temperature > 0.0)) throw ConfigError("config: key 'temperature' out of range");
    if (mix_noise_sigma < 0.0) throw ConfigError("config: key 'mix_noise_sigma' out of range");
    if (!(learning_rate > 0.0)) throw ConfigError("config: key 'learning_rate' out of range");
    if (batch_size < 2) throw ConfigError("config: key 'batch_size' out of range");
    if (pretext_epochs < 0) throw ConfigError("config: key 'pretext_epochs' out of range");
    if (pretext_batches < 1) throw ConfigError("config: key 'pretext_batches' out of range");
    if (npair_epochs < 0) throw ConfigError("config: key 'npair_epochs' out of range");
    if (npair_batches < 1) throw ConfigError("config: key 'npair_batches' out of range");
    if (npair_classes == 1 || npair_classes < 0) throw ConfigError("config: key 'npair_classes' out of range");
    if (conv_channels < 1) throw ConfigError("config: key 'conv_channels' out of range");
    if (kernel < 1 || kernel % 2 == 0) throw ConfigError("config: key 'kernel' must be odd");
    if (hidden < 1) throw ConfigError("config: key 'hidden' out of range");
    if (embed < 1) throw ConfigError("config: key 'embed' out of range");
    if (threads < 1) throw ConfigError("config: key 'threads' out of range");
    if (kmeans_restarts < 1) throw ConfigError("config: key 'kmeans_restarts' out of range");
    if (kmeans_max_iter < 1) throw ConfigError("config: key 'kmeans_max_iter' out of range");
}

std::map<std::string, std::string> config_snapshot(const PipelineConfig& config) {
    std::map<std::string, std::string> snap;
    snap["normalize"] = config.normalize == NormalizeMode::None ? "none" : "per_band_minmax";
    snap["fraction"] = fmt(config.fraction);
    snap["k_target"] = std::to_string(config.k_target);
    snap["k_background"] = std::to_string(config.k_background);
    snap["temperature"] = fmt(config.temperature);
    snap["mix_noise_sigma"] = fmt(config.mix_noise_sigma);
    snap["learning_rate"] = fmt(config.learning_rate);
    snap["batch_size"] = std::to_string(config.batch_size);
    snap["pretext_epochs"] = std::to_string(config.pretext_epochs);
    snap["pretext_batches"] = std::to_string(config.pretext_batches);
    snap["npair_epochs"] = std::to_string(config.npair_epochs);
    snap["npair_batches"] = std::to_string(config.npair_batches);
    snap["npair_classes"] = std::to_string(config.npair_classes);
    snap["hard_mining"] = config.hard_mining ? "true" : "false";
    snap["conv_channels"] = std::to_string(config.conv_channels);
    snap["kernel"] = std::to_string(config.kernel);
    snap["hidden"] = std::to_string(config.hidden);
    snap["embed"] = std::to_string(config.embed);
    snap["ridge"] = config.ridge < 0.0 ? "auto" : fmt(config.ridge);
    snap["seed"] = std::to_string(config.seed);
    snap["threads"] = std::to_string(config.threads);
    snap["kmeans_restarts"] = std::to_string(config.kmeans_restarts);
    snap["kmeans_max_iter"] = std::to_string(config.kmeans_max_iter);
    return snap;
}

}  // namespace specmatch
