#pragma once

#include "specmatch/embednet.hpp"
#include "specmatch/types.hpp"

namespace specmatch {

struct EmbeddingField {
    int width = 0;
    int height = 0;
    Matrix embeddings;  // pixels x embed, unit-norm rows

    int pixels() const { return width * height; }
    void validate() const;
};

// Row i = encoder_forward of pixel i. Pure in params; parallel over pixels.
EmbeddingField embed_cube(const EncoderParams& params, const SpectralCube& cube, int threads = 1);

// Score = negated mean Euclidean distance to the prior embeddings, so larger
// is more target-like; a pixel matching the single prior scores 0, the map
// maximum.
ScoreMap ensemble_similarity(const EmbeddingField& field, const TargetPriorSet& priors,
                             const EncoderParams& params, int threads = 1);

}  // namespace specmatch
