#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "specmatch/classical.hpp"
#include "specmatch/config.hpp"
#include "specmatch/embednet.hpp"
#include "specmatch/partition.hpp"
#include "specmatch/types.hpp"

namespace specmatch {

enum class DetectorKind { Cem, Ace, Learned };

const char* detector_name(DetectorKind kind);

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct DetectResult {
    ScoreMap scores;
    std::optional<EncoderParams> params;  // learned detector only
    std::vector<double> pretext_trace;
    std::vector<double> npair_trace;
    std::vector<StageTiming> timings;
};

// Full detection chain on raw inputs; the priors are normalized with the same
// band scaling as the cube. Failures carry a "[stage <name>]" tag.
DetectResult run_detect(const PipelineConfig& config, const SpectralCube& raw_cube,
                        const TargetPriorSet& raw_priors, DetectorKind kind);

struct RunManifest {
    std::map<std::string, std::string> config;
    std::uint64_t seed = 0;
    std::string detector;
    std::vector<StageTiming> timings;
    std::vector<std::string> outputs;
    std::map<std::string, double> aucs;
};

// Written after every listed output exists; refuses otherwise. Timings live
// under a single top-level key so determinism comparisons can drop them.
void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace specmatch
