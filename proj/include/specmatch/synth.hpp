#pragma once

#include <cstdint>

#include "specmatch/types.hpp"

namespace specmatch {

// Desk-scale linear-mixture scene: smooth positive endmember curves, sparse
// convex background mixtures, implanted sub-pixel targets, one confuser
// endmember shaped to a chosen correlation with the target, relative noise.
struct SceneSpec {
    int width = 64;
    int height = 64;
    int bands = 50;
    int endmembers = 8;
    std::uint64_t endmember_seed = 1;
    int target_index = 0;
    int target_pixels = 40;
    double abundance_lo = 0.6;
    double abundance_hi = 1.0;
    double confuser_correlation = 0.95;  // Pearson correlation with the target curve
    double noise_sigma = 0.02;           // relative to the mean |clean| value
    std::uint64_t seed = 1;

    void validate() const;
};

struct SceneData {
    SpectralCube cube;
    GroundTruth truth;
    TargetPriorSet priors;  // 10 pure-target spectra with independent noise
    Matrix endmembers;      // rows; row spec.target_index is the target
};

SceneData generate_scene(const SceneSpec& spec);

}  // namespace specmatch
