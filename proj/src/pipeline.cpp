#include "specmatch/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <utility>

#include "json.hpp"

#include "specmatch/matchdet.hpp"

namespace specmatch {

namespace {

// Runs one pipeline stage: timed, and any failure is rethrown with the stage
// name attached so the CLI can report where the run broke.
template <typename Fn>
auto run_stage(const char* name, std::vector<StageTiming>& timings, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
            timings.push_back({name, dt.count()});
        } else {
            auto result = fn();
            const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
            timings.push_back({name, dt.count()});
            return result;
        }
    } catch (const std::exception& e) {
        throw Error(std::string("[stage ") + name + "] " + e.what());
    }
}

}  // namespace

const char* detector_name(DetectorKind kind) {
    switch (kind) {
        case DetectorKind::Cem: return "cem";
        case DetectorKind::Ace: return "ace";
        default: return "learned";
    }
}

DetectResult run_detect(const PipelineConfig& config, const SpectralCube& raw_cube,
                        const TargetPriorSet& raw_priors, DetectorKind kind) {
    config.validate();
    raw_cube.validate();
    raw_priors.validate();
    if (raw_priors.spectra.cols() != raw_cube.bands()) {
        throw InvalidArgument("detect: priors and cube band counts differ");
    }

    DetectResult result;

    SpectralCube cube;
    TargetPriorSet priors;
    run_stage("normalize", result.timings, [&] {
        const BandScaling scaling = compute_band_scaling(raw_cube, config.normalize);
        cube = apply_band_scaling(raw_cube, scaling);
        priors = raw_priors;
        for (int t = 0; t < priors.count(); ++t) {
            priors.spectra.row(t) = scaling.apply(priors.spectra.row(t).transpose()).transpose();
        }
    });

    const double ridge = config.ridge < 0.0 ? default_ridge(cube) : config.ridge;
    ScoreMap cem_scores = run_stage("cem_ensemble", result.timings, [&] {
        return cem_ensemble(cube, priors, ridge, config.threads);
    });
    if (kind == DetectorKind::Cem) {
        result.scores = std::move(cem_scores);
        return result;
    }
    if (kind == DetectorKind::Ace) {
        result.scores = run_stage("ace_ensemble", result.timings, [&] {
            return ace_ensemble(cube, priors, ridge, config.threads);
        });
        return result;
    }

    const PartitionResult partition = run_stage("quantile_split", result.timings, [&] {
        return quantile_split(cem_scores, config.fraction);
    });

    KmeansOptions kmeans_options;
    kmeans_options.max_iter = config.kmeans_max_iter;
    kmeans_options.restarts = config.kmeans_restarts;
    const Subcategories subcats = run_stage("subcategory_centers", result.timings, [&] {
        return subcategory_centers(cube, partition, config.k_target, config.k_background,
                                   config.seed, kmeans_options);
    });

    EncoderConfig enc;
    enc.bands = cube.bands();
    enc.conv_channels = config.conv_channels;
    enc.kernel = config.kernel;
    enc.hidden = config.hidden;
    enc.embed = config.embed;
    enc.classes = config.k_target + config.k_background;
    EncoderParams params = init_params(enc, config.seed);

    run_stage("pretext_train", result.timings, [&] {
        PretextOptions options;
        options.mix.temperature = config.temperature;
        options.mix.noise_sigma = config.mix_noise_sigma;
        options.batches_per_epoch = config.pretext_batches;
        SgdConfig sgd{config.learning_rate, config.batch_size, config.pretext_epochs, config.seed};
        result.pretext_trace = pretext_train(params, subcats.centers, options, sgd);
    });

    run_stage("npair_train", result.timings, [&] {
        NPairOptions options;
        options.classes_per_batch = config.npair_classes;
        options.batches_per_epoch = config.npair_batches;
        options.hard_mining = config.hard_mining;
        SgdConfig sgd{config.learning_rate, config.batch_size, config.npair_epochs, config.seed};
        result.npair_trace = npair_train(params, cube.data, subcats.labels,
                                         enc.classes, options, sgd);
    });

    const EmbeddingField field = run_stage("embed_cube", result.timings, [&] {
        return embed_cube(params, cube, config.threads);
    });
    result.scores = run_stage("ensemble_similarity", result.timings, [&] {
        return ensemble_similarity(field, priors, params, config.threads);
    });
    result.params = std::move(params);
    return result;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    for (const std::string& output : manifest.outputs) {
        if (!std::filesystem::exists(output)) {
            throw IoError("manifest: listed output does not exist: " + output);
        }
    }

    nlohmann::json j;
    j["config"] = manifest.config;
    j["seed"] = manifest.seed;
    j["detector"] = manifest.detector;
    j["outputs"] = manifest.outputs;
    j["aucs"] = manifest.aucs.empty() ? nlohmann::json::object() : nlohmann::json(manifest.aucs);
    nlohmann::json timings = nlohmann::json::array();
    for (const StageTiming& t : manifest.timings) {
        timings.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
    }
    j["timings"] = std::move(timings);

    std::ofstream os(path);
    if (!os) throw IoError("manifest: cannot open " + path + " for writing");
    os << j.dump(2) << '\n';
    os.flush();
    if (!os) throw IoError("manifest: write failed for " + path);
}

}  // namespace specmatch
