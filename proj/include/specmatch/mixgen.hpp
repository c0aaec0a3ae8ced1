#pragma once

#include <cstdint>
#include <vector>

#include "specmatch/rng.hpp"
#include "specmatch/types.hpp"

namespace specmatch {

// One synthetic training sample: a convex mixture of subcategory centers
// labeled by the dominant component.
struct MixedSample {
    Spectrum spectrum;
    Vector weights;  // convex: nonnegative, sums to 1
    int label = 0;   // argmax of weights, lowest index on ties
};

struct MixGenOptions {
    double temperature = 0.5;
    double noise_sigma = 0.0;  // stddev of additive Gaussian noise per band
};

// Softmax over z / temperature, computed with max subtraction.
Vector mix_weights_from_logits(const Vector& z, double temperature);

// Draws z ~ U[0,1]^K from rng and mixes the rows of `centers`.
MixedSample draw_mixed_sample(const Matrix& centers, const MixGenOptions& options, Rng& rng);

// Batch of samples in draw order.
std::vector<MixedSample> draw_mixed_batch(const Matrix& centers, int count,
                                          const MixGenOptions& options, Rng& rng);

}  // namespace specmatch
