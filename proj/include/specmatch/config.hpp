#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "specmatch/types.hpp"

namespace specmatch {

// Flat key=value run configuration. Unknown keys and out-of-range values are
// fatal and name the offending key.
struct PipelineConfig {
    NormalizeMode normalize = NormalizeMode::PerBandMinMax;
    double fraction = 0.01;  // pre-detector quantile
    int k_target = 2;
    int k_background = 5;
    double temperature = 0.5;
    double mix_noise_sigma = 0.0;
    double learning_rate = 1e-4;
    int batch_size = 128;
    int pretext_epochs = 20;
    int pretext_batches = 40;
    int npair_epochs = 80;
    int npair_batches = 40;
    int npair_classes = 0;  // classes per N-pair batch; 0 = all eligible
    bool hard_mining = true;
    int conv_channels = 8;
    int kernel = 3;
    int hidden = 128;
    int embed = 64;
    double ridge = -1.0;  // negative = automatic (1e-6 * trace(R) / B)
    std::uint64_t seed = 1;
    int threads = 1;
    int kmeans_restarts = 5;
    int kmeans_max_iter = 100;

    void validate() const;
};

PipelineConfig load_config(const std::string& path);

// Shared by the file parser and CLI overrides.
void config_set(PipelineConfig& config, const std::string& key, const std::string& value);

// Deterministic string snapshot of every key, for the run manifest.
std::map<std::string, std::string> config_snapshot(const PipelineConfig& config);

}  // namespace specmatch
