#include "specmatch/matchdet.hpp"

#include <cmath>

namespace specmatch {

void EmbeddingField::validate() const {
    if (width < 1 || height < 1) throw InvalidArgument("embedding field: empty dimensions");
    if (embeddings.rows() != static_cast<Eigen::Index>(width) * height) {
        throw InvalidArgument("embedding field: row count does not match dimensions");
    }
    for (Eigen::Index i = 0; i < embeddings.rows(); ++i) {
        if (std::abs(embeddings.row(i).norm() - 1.0) > 1e-9) {
            throw InvalidArgument("embedding field: row is not unit norm");
        }
    }
}

EmbeddingField embed_cube(const EncoderParams& params, const SpectralCube& cube, int threads) {
    cube.validate();
    if (cube.bands() != params.cfg.bands) {
        throw InvalidArgument("embed_cube: cube bands do not match encoder");
    }

    EmbeddingField field;
    field.width = cube.width;
    field.height = cube.height;
    field.embeddings.resize(cube.pixels(), params.cfg.embed);
    parallel_for(cube.pixels(), threads, [&](int begin, int end) {
        ForwardTrace trace;
        for (int i = begin; i < end; ++i) {
            encoder_forward(params, cube.data.row(i).transpose(), trace);
            field.embeddings.row(i) = trace.embedding.transpose();
        }
    });
    return field;
}

ScoreMap ensemble_similarity(const EmbeddingField& field, const TargetPriorSet& priors,
                             const EncoderParams& params, int threads) {
    priors.validate();
    if (priors.spectra.cols() != params.cfg.bands) {
        throw InvalidArgument("ensemble_similarity: prior bands do not match encoder");
    }
    if (field.embeddings.cols() != params.cfg.embed) {
        throw InvalidArgument("ensemble_similarity: field embedding width does not match encoder");
    }

    // Each prior is embedded exactly once.
    Matrix prior_emb(priors.count(), params.cfg.embed);
    for (int t = 0; t < priors.count(); ++t) {
        prior_emb.row(t) = encoder_forward(params, priors.prior(t)).transpose();
    }

    ScoreMap map;
    map.width = field.width;
    map.height = field.height;
    map.scores = Vector::Zero(field.embeddings.rows());
    const double inv_count = 1.0 / priors.count();
    parallel_for(static_cast<int>(field.embeddings.rows()), threads, [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            double mean_dist = 0.0;
            for (int t = 0; t < priors.count(); ++t) {
                mean_dist += (field.embeddings.row(i) - prior_emb.row(t)).norm();
            }
            map.scores[i] = -mean_dist * inv_count;
        }
    });
    return map;
}

}  // namespace specmatch
