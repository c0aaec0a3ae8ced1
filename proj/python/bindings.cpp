#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "specmatch/classical.hpp"
#include "specmatch/config.hpp"
#include "specmatch/embednet.hpp"
#include "specmatch/envi.hpp"
#include "specmatch/eval.hpp"
#include "specmatch/matchdet.hpp"
#include "specmatch/mixgen.hpp"
#include "specmatch/partition.hpp"
#include "specmatch/pipeline.hpp"
#include "specmatch/synth.hpp"
#include "specmatch/types.hpp"

namespace py = pybind11;
using namespace specmatch;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

SpectralCube cube_from_array(const DoubleArray& arr) {
    if (arr.ndim() != 3) throw py::value_error("cube must be a (height, width, bands) array");
    SpectralCube cube;
    cube.height = static_cast<int>(arr.shape(0));
    cube.width = static_cast<int>(arr.shape(1));
    const int bands = static_cast<int>(arr.shape(2));
    cube.data = Eigen::Map<const Matrix>(arr.data(), cube.pixels(), bands);
    cube.validate();
    return cube;
}

py::array_t<double> cube_to_array(const SpectralCube& cube) {
    py::array_t<double> out({cube.height, cube.width, cube.bands()});
    Eigen::Map<Matrix>(out.mutable_data(), cube.pixels(), cube.bands()) = cube.data;
    return out;
}

Matrix matrix_from_array(const DoubleArray& arr, const char* what) {
    if (arr.ndim() != 2) throw py::value_error(std::string(what) + " must be a 2-d array");
    return Eigen::Map<const Matrix>(arr.data(), arr.shape(0), arr.shape(1));
}

py::array_t<double> matrix_to_array(const Matrix& m) {
    py::array_t<double> out({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())});
    Eigen::Map<Matrix>(out.mutable_data(), m.rows(), m.cols()) = m;
    return out;
}

Vector vector_from_array(const DoubleArray& arr, const char* what) {
    if (arr.ndim() != 1) throw py::value_error(std::string(what) + " must be a 1-d array");
    return Eigen::Map<const Vector>(arr.data(), arr.shape(0));
}

py::array_t<double> vector_to_array(const Vector& v) {
    // Shape-container ctor: strides come from sizeof(double), not the runtime
    // dtype, which older pybind11 headers mis-read against newer numpy.
    py::array_t<double> out({static_cast<py::ssize_t>(v.size())});
    Eigen::Map<Vector>(out.mutable_data(), v.size()) = v;
    return out;
}

ScoreMap scores_from_array(const DoubleArray& arr) {
    if (arr.ndim() != 2) throw py::value_error("scores must be a (height, width) array");
    ScoreMap map;
    map.height = static_cast<int>(arr.shape(0));
    map.width = static_cast<int>(arr.shape(1));
    map.scores = Eigen::Map<const Vector>(arr.data(), map.pixels());
    return map;
}

py::array_t<double> scores_to_array(const ScoreMap& map) {
    py::array_t<double> out({map.height, map.width});
    Eigen::Map<Vector>(out.mutable_data(), map.pixels()) = map.scores;
    return out;
}

GroundTruth truth_from_array(const DoubleArray& arr) {
    if (arr.ndim() != 2) throw py::value_error("truth must be a (height, width) array");
    GroundTruth truth;
    truth.height = static_cast<int>(arr.shape(0));
    truth.width = static_cast<int>(arr.shape(1));
    truth.labels.resize(static_cast<std::size_t>(truth.pixels()));
    const double* p = arr.data();
    for (int i = 0; i < truth.pixels(); ++i) truth.labels[static_cast<std::size_t>(i)] = p[i] != 0.0 ? 1 : 0;
    return truth;
}

py::array_t<std::uint8_t> truth_to_array(const GroundTruth& truth) {
    py::array_t<std::uint8_t> out({truth.height, truth.width});
    std::uint8_t* p = out.mutable_data();
    for (int i = 0; i < truth.pixels(); ++i) p[i] = truth.labels[static_cast<std::size_t>(i)];
    return out;
}

TargetPriorSet priors_from_array(const DoubleArray& arr) {
    TargetPriorSet priors;
    priors.spectra = matrix_from_array(arr, "priors");
    priors.validate();
    return priors;
}

NormalizeMode mode_from_string(const std::string& mode) {
    if (mode == "none") return NormalizeMode::None;
    if (mode == "per_band_minmax") return NormalizeMode::PerBandMinMax;
    throw py::value_error("unknown normalize mode: " + mode);
}

PipelineConfig config_from_dict(const py::dict& overrides) {
    PipelineConfig config;
    for (auto item : overrides) {
        const std::string key = py::str(item.first);
        const std::string value = py::str(item.second);
        config_set(config, key, value);
    }
    config.validate();
    return config;
}

DetectorKind detector_from_string(const std::string& name) {
    if (name == "cem") return DetectorKind::Cem;
    if (name == "ace") return DetectorKind::Ace;
    if (name == "learned") return DetectorKind::Learned;
    throw py::value_error("unknown detector: " + name);
}

Interleave interleave_from_string(const std::string& name) {
    if (name == "bsq") return Interleave::BSQ;
    if (name == "bil") return Interleave::BIL;
    if (name == "bip") return Interleave::BIP;
    throw py::value_error("unknown interleave: " + name);
}

struct Encoder {
    EncoderParams params;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Self-supervised spectral-matching target detection";

    py::register_exception<Error>(m, "SpecmatchError", PyExc_RuntimeError);

    m.def(
        "normalize",
        [](const DoubleArray& cube, const std::string& mode) {
            return cube_to_array(normalize_cube(cube_from_array(cube), mode_from_string(mode)));
        },
        py::arg("cube"), py::arg("mode") = "per_band_minmax",
        "Per-band rescaling of a (height, width, bands) cube.");

    m.def(
        "cem",
        [](const DoubleArray& cube, const DoubleArray& priors, double ridge, int threads) {
            const SpectralCube c = cube_from_array(cube);
            const TargetPriorSet p = priors_from_array(priors);
            const double r = ridge < 0.0 ? default_ridge(c) : ridge;
            return scores_to_array(cem_ensemble(c, p, r, threads));
        },
        py::arg("cube"), py::arg("priors"), py::arg("ridge") = -1.0, py::arg("threads") = 1,
        "Ensemble CEM score map; priors is a (count, bands) array.");

    m.def(
        "ace",
        [](const DoubleArray& cube, const DoubleArray& priors, double ridge, int threads) {
            const SpectralCube c = cube_from_array(cube);
            const TargetPriorSet p = priors_from_array(priors);
            const double r = ridge < 0.0 ? default_ridge(c) : ridge;
            return scores_to_array(ace_ensemble(c, p, r, threads));
        },
        py::arg("cube"), py::arg("priors"), py::arg("ridge") = -1.0, py::arg("threads") = 1,
        "Ensemble ACE score map; priors is a (count, bands) array.");

    m.def(
        "quantile_split",
        [](const DoubleArray& scores, double fraction) {
            const PartitionResult part = quantile_split(scores_from_array(scores), fraction);
            return py::make_tuple(part.target_indices, part.background_indices, part.threshold);
        },
        py::arg("scores"), py::arg("fraction") = 0.01,
        "Highest-scoring ceil(fraction*N) pixel indices, the rest, and the threshold.");

    m.def(
        "kmeans",
        [](const DoubleArray& points, int k, std::uint64_t seed, int restarts, int max_iter) {
            KmeansOptions options;
            options.restarts = restarts;
            options.max_iter = max_iter;
            const Clustering result = kmeans(matrix_from_array(points, "points"), k, seed, options);
            return py::make_tuple(matrix_to_array(result.centers), result.assignments, result.objective);
        },
        py::arg("points"), py::arg("k"), py::arg("seed") = 1, py::arg("restarts") = 5,
        py::arg("max_iter") = 100, "(centers, assignments, objective) for seeded k-means.");

    m.def(
        "mix_weights",
        [](const DoubleArray& logits, double temperature) {
            return vector_to_array(mix_weights_from_logits(vector_from_array(logits, "logits"), temperature));
        },
        py::arg("logits"), py::arg("temperature") = 0.5,
        "Softmax mixing weights for one logit vector.");

    m.def(
        "mix_batch",
        [](const DoubleArray& centers, int count, std::uint64_t seed, double temperature,
           double noise_sigma) {
            MixGenOptions options;
            options.temperature = temperature;
            options.noise_sigma = noise_sigma;
            Rng rng(seed);
            const auto batch = draw_mixed_batch(matrix_from_array(centers, "centers"), count, options, rng);
            Matrix spectra(count, centers.shape(1));
            Matrix weights(count, centers.shape(0));
            std::vector<int> labels(static_cast<std::size_t>(count));
            for (int i = 0; i < count; ++i) {
                spectra.row(i) = batch[static_cast<std::size_t>(i)].spectrum.transpose();
                weights.row(i) = batch[static_cast<std::size_t>(i)].weights.transpose();
                labels[static_cast<std::size_t>(i)] = batch[static_cast<std::size_t>(i)].label;
            }
            return py::make_tuple(matrix_to_array(spectra), matrix_to_array(weights), labels);
        },
        py::arg("centers"), py::arg("count"), py::arg("seed") = 1, py::arg("temperature") = 0.5,
        py::arg("noise_sigma") = 0.0,
        "(spectra, weights, labels) drawn from the spectral-mixing generator.");

    m.def(
        "npair_loss",
        [](const DoubleArray& anchor, const DoubleArray& positive, const DoubleArray& negatives) {
            const NPairResult result =
                npair_loss(vector_from_array(anchor, "anchor"), vector_from_array(positive, "positive"),
                           matrix_from_array(negatives, "negatives"));
            py::dict out;
            out["loss"] = result.loss;
            out["d_anchor"] = vector_to_array(result.d_anchor);
            out["d_positive"] = vector_to_array(result.d_positive);
            out["d_negatives"] = matrix_to_array(result.d_negatives);
            return out;
        },
        py::arg("anchor"), py::arg("positive"), py::arg("negatives"),
        "N-pair metric loss and its gradients for one tuple.");

    m.def(
        "roc",
        [](const DoubleArray& scores, const DoubleArray& truth) {
            const RocCurve curve = roc_curve(scores_from_array(scores), truth_from_array(truth));
            Matrix points(static_cast<Eigen::Index>(curve.points.size()), 2);
            for (Eigen::Index i = 0; i < points.rows(); ++i) {
                points(i, 0) = curve.points[static_cast<std::size_t>(i)].pfa;
                points(i, 1) = curve.points[static_cast<std::size_t>(i)].pd;
            }
            return py::make_tuple(matrix_to_array(points), curve.auc);
        },
        py::arg("scores"), py::arg("truth"),
        "((pfa, pd) operating points, trapezoidal AUC).");

    m.def(
        "auc_pairwise",
        [](const DoubleArray& scores, const DoubleArray& truth) {
            return auc_pairwise(scores_from_array(scores), truth_from_array(truth));
        },
        py::arg("scores"), py::arg("truth"),
        "Rank-based Mann-Whitney AUC, independent of roc().");

    m.def(
        "generate_scene",
        [](int width, int height, int bands, int endmembers, int target_pixels, double abundance_lo,
           double abundance_hi, double confuser_correlation, double noise_sigma, std::uint64_t seed) {
            SceneSpec spec;
            spec.width = width;
            spec.height = height;
            spec.bands = bands;
            spec.endmembers = endmembers;
            spec.target_pixels = target_pixels;
            spec.abundance_lo = abundance_lo;
            spec.abundance_hi = abundance_hi;
            spec.confuser_correlation = confuser_correlation;
            spec.noise_sigma = noise_sigma;
            spec.seed = seed;
            spec.endmember_seed = seed;
            const SceneData scene = generate_scene(spec);
            py::dict out;
            out["cube"] = cube_to_array(scene.cube);
            out["truth"] = truth_to_array(scene.truth);
            out["priors"] = matrix_to_array(scene.priors.spectra);
            out["endmembers"] = matrix_to_array(scene.endmembers);
            return out;
        },
        py::arg("width") = 64, py::arg("height") = 64, py::arg("bands") = 50,
        py::arg("endmembers") = 8, py::arg("target_pixels") = 40, py::arg("abundance_lo") = 0.6,
        py::arg("abundance_hi") = 1.0, py::arg("confuser_correlation") = 0.95,
        py::arg("noise_sigma") = 0.02, py::arg("seed") = 1,
        "Synthetic linear-mixture scene with implanted sub-pixel targets.");

    m.def(
        "detect",
        [](const DoubleArray& cube, const DoubleArray& priors, const std::string& detector,
           const py::dict& config) {
            const PipelineConfig cfg = config_from_dict(config);
            const DetectResult result = run_detect(cfg, cube_from_array(cube), priors_from_array(priors),
                                                   detector_from_string(detector));
            py::dict out;
            out["scores"] = scores_to_array(result.scores);
            out["pretext_trace"] = result.pretext_trace;
            out["npair_trace"] = result.npair_trace;
            return out;
        },
        py::arg("cube"), py::arg("priors"), py::arg("detector") = "learned",
        py::arg("config") = py::dict(),
        "Full detection chain on a raw cube; config holds key=value overrides.");

    m.def(
        "load_envi",
        [](const std::string& header_path, const std::string& data_path) {
            return cube_to_array(load_envi(header_path, data_path));
        },
        py::arg("header_path"), py::arg("data_path"),
        "Load an ENVI cube as a (height, width, bands) array.");

    m.def(
        "write_envi",
        [](const DoubleArray& cube, const std::string& header_path, const std::string& data_path,
           const std::string& interleave, int data_type, int byte_order) {
            write_envi(cube_from_array(cube), header_path, data_path,
                       interleave_from_string(interleave), data_type, byte_order);
        },
        py::arg("cube"), py::arg("header_path"), py::arg("data_path"),
        py::arg("interleave") = "bsq", py::arg("data_type") = 5, py::arg("byte_order") = 0,
        "Write a cube as an ENVI header/data pair.");

    py::class_<Encoder>(m, "Encoder", "Spectral embedding network.")
        .def(py::init([](int bands, int conv_channels, int kernel, int hidden, int embed, int classes,
                         std::uint64_t seed) {
                 EncoderConfig cfg;
                 cfg.bands = bands;
                 cfg.conv_channels = conv_channels;
                 cfg.kernel = kernel;
                 cfg.hidden = hidden;
                 cfg.embed = embed;
                 cfg.classes = classes;
                 cfg.validate();
                 return Encoder{init_params(cfg, seed)};
             }),
             py::arg("bands"), py::arg("conv_channels") = 8, py::arg("kernel") = 3,
             py::arg("hidden") = 128, py::arg("embed") = 64, py::arg("classes") = 2,
             py::arg("seed") = 1)
        .def_property_readonly("bands", [](const Encoder& e) { return e.params.cfg.bands; })
        .def_property_readonly("embed_dim", [](const Encoder& e) { return e.params.cfg.embed; })
        .def_property_readonly("param_count",
                               [](const Encoder& e) { return e.params.cfg.param_count(); })
        .def(
            "embed",
            [](const Encoder& e, const DoubleArray& spectra) {
                if (spectra.ndim() == 1) {
                    return py::object(
                        vector_to_array(encoder_forward(e.params, vector_from_array(spectra, "spectrum"))));
                }
                const Matrix points = matrix_from_array(spectra, "spectra");
                Matrix out(points.rows(), e.params.cfg.embed);
                for (Eigen::Index i = 0; i < points.rows(); ++i)
                    out.row(i) = encoder_forward(e.params, points.row(i).transpose()).transpose();
                return py::object(matrix_to_array(out));
            },
            py::arg("spectra"), "Unit-norm embedding of one spectrum or a (count, bands) batch.")
        .def(
            "save", [](const Encoder& e, const std::string& path) { save_checkpoint(e.params, path); },
            py::arg("path"))
        .def_static(
            "load", [](const std::string& path) { return Encoder{load_checkpoint(path)}; },
            py::arg("path"));
}
