#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "specmatch/config.hpp"
#include "specmatch/embednet.hpp"
#include "specmatch/envi.hpp"
#include "specmatch/eval.hpp"
#include "specmatch/io.hpp"
#include "specmatch/pipeline.hpp"
#include "specmatch/synth.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_file(const std::string& path, const std::string& what) {
    if (!std::filesystem::exists(path)) {
        throw UsageError(what + " not found: " + path);
    }
}

int run_synth(const specmatch::SceneSpec& spec, const std::string& prefix) {
    const specmatch::SceneData scene = specmatch::generate_scene(spec);
    const std::string header = prefix + ".hdr";
    const std::string data = prefix + ".raw";
    const std::string mask = prefix + ".mask.txt";
    const std::string priors = prefix + ".priors.csv";
    specmatch::write_envi(scene.cube, header, data);
    specmatch::write_mask(scene.truth, mask);
    specmatch::write_priors_csv(scene.priors, priors);
    std::cout << "wrote " << header << ' ' << data << ' ' << mask << ' ' << priors << '\n';
    return 0;
}

struct DetectArgs {
    std::string header;
    std::string data;
    std::string priors;
    std::string config_path;
    std::string truth_path;
    std::string out_prefix = "run";
    std::string detector = "learned";
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

int run_detect_cmd(const DetectArgs& args) {
    require_file(args.header, "cube header");
    require_file(args.data, "cube data file");
    require_file(args.priors, "priors file");
    if (!args.config_path.empty()) require_file(args.config_path, "config file");
    if (!args.truth_path.empty()) require_file(args.truth_path, "ground truth");

    specmatch::PipelineConfig config;
    if (!args.config_path.empty()) config = specmatch::load_config(args.config_path);
    for (const std::string& kv : args.overrides) {
        const std::string::size_type eq = kv.find('=');
        if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
        specmatch::config_set(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (args.seed) config.seed = *args.seed;
    if (args.threads) config.threads = *args.threads;
    config.validate();

    specmatch::DetectorKind kind = specmatch::DetectorKind::Learned;
    if (args.detector == "cem") {
        kind = specmatch::DetectorKind::Cem;
    } else if (args.detector == "ace") {
        kind = specmatch::DetectorKind::Ace;
    } else if (args.detector != "learned") {
        throw UsageError("--detector must be one of cem, ace, learned");
    }

    const specmatch::SpectralCube cube = specmatch::load_envi(args.header, args.data);
    const specmatch::PriorsFile priors_file = specmatch::load_priors_file(args.priors);
    const specmatch::TargetPriorSet priors = specmatch::resolve_priors(priors_file, cube);

    specmatch::DetectResult result = specmatch::run_detect(config, cube, priors, kind);

    specmatch::RunManifest manifest;
    manifest.config = specmatch::config_snapshot(config);
    manifest.seed = config.seed;
    manifest.detector = args.detector;
    manifest.timings = result.timings;

    const std::string scores_csv = args.out_prefix + ".scores.csv";
    const std::string scores_pgm = args.out_prefix + ".scores.pgm";
    specmatch::write_score_map(result.scores, scores_csv, specmatch::ScoreMapFormat::Csv);
    specmatch::write_score_map(result.scores, scores_pgm, specmatch::ScoreMapFormat::Pgm16);
    manifest.outputs.push_back(scores_csv);
    manifest.outputs.push_back(scores_pgm);

    if (result.params) {
        const std::string checkpoint = args.out_prefix + ".checkpoint";
        specmatch::save_checkpoint(*result.params, checkpoint);
        manifest.outputs.push_back(checkpoint);
        const std::string pretext_csv = args.out_prefix + ".pretext_loss.csv";
        const std::string npair_csv = args.out_prefix + ".npair_loss.csv";
        specmatch::write_loss_trace(result.pretext_trace, pretext_csv);
        specmatch::write_loss_trace(result.npair_trace, npair_csv);
        manifest.outputs.push_back(pretext_csv);
        manifest.outputs.push_back(npair_csv);
    }

    if (!args.truth_path.empty()) {
        const specmatch::GroundTruth truth =
            specmatch::load_mask(args.truth_path, cube.width, cube.height);
        const specmatch::RocCurve roc = specmatch::roc_curve(result.scores, truth);
        const std::string roc_csv = args.out_prefix + ".roc.csv";
        specmatch::write_roc_csv(roc, roc_csv);
        manifest.outputs.push_back(roc_csv);
        manifest.aucs[args.detector] = roc.auc;
        std::cout << "auc " << std::setprecision(6) << std::fixed << roc.auc << '\n';
    }

    const std::string manifest_path = args.out_prefix + ".manifest.json";
    specmatch::write_manifest(manifest, manifest_path);
    std::cout << "wrote " << manifest_path << '\n';
    return 0;
}

struct EvalArgs {
    std::vector<std::string> scores;
    std::string truth_path;
    std::string out_prefix = "eval";
};

int run_eval_cmd(const EvalArgs& args) {
    for (const std::string& path : args.scores) require_file(path, "score map");
    require_file(args.truth_path, "ground truth");

    std::vector<std::string> names;
    std::vector<double> aucs;
    std::optional<specmatch::GroundTruth> truth;
    for (const std::string& path : args.scores) {
        const specmatch::ScoreMap map = specmatch::load_score_csv(path);
        if (!truth) {
            truth = specmatch::load_mask(args.truth_path, map.width, map.height);
        }
        const specmatch::RocCurve roc = specmatch::roc_curve(map, *truth);
        const std::string name = std::filesystem::path(path).stem().string();
        specmatch::write_roc_csv(roc, args.out_prefix + ".roc." + name + ".csv");
        names.push_back(name);
        aucs.push_back(roc.auc);
    }
    std::cout << specmatch::auc_table(names, aucs);
    return 0;
}

struct GradcheckArgs {
    int bands = 16;
    int channels = 4;
    int kernel = 3;
    int hidden = 48;
    int embed = 24;
    int classes = 4;
    double step = 1e-4;
    double tolerance = 1e-4;
    std::uint64_t seed = 1;
};

int run_gradcheck_cmd(const GradcheckArgs& args) {
    specmatch::EncoderConfig enc;
    enc.bands = args.bands;
    enc.conv_channels = args.channels;
    enc.kernel = args.kernel;
    enc.hidden = args.hidden;
    enc.embed = args.embed;
    enc.classes = args.classes;
    const specmatch::EncoderParams params = specmatch::init_params(enc, args.seed);

    specmatch::Rng rng(specmatch::Rng::derive(args.seed, specmatch::seed_stream::kGradCheck));
    specmatch::Vector ce_input(enc.bands);
    for (int b = 0; b < enc.bands; ++b) ce_input[b] = rng.uniform(-1.0, 1.0);
    const int ce_label = static_cast<int>(rng.index(enc.classes));

    const specmatch::LossFn ce_loss = [&](const specmatch::EncoderParams& p,
                                          specmatch::Vector* grad) {
        specmatch::ForwardTrace trace;
        specmatch::encoder_forward(p, ce_input, trace);
        const specmatch::Vector logits = specmatch::head_logits(p, trace.embedding);
        const specmatch::CeResult ce = specmatch::softmax_cross_entropy(logits, ce_label);
        if (grad) {
            grad->setZero(p.cfg.param_count());
            const specmatch::Vector dy = specmatch::head_backward(p, trace.embedding, ce.d_logits, *grad);
            specmatch::encoder_backward(p, trace, dy, *grad);
        }
        return ce.loss;
    };

    const int tuple = enc.classes + 1;  // anchor + positive + (classes - 1) negatives
    specmatch::Matrix np_inputs(tuple, enc.bands);
    for (int i = 0; i < tuple; ++i) {
        for (int b = 0; b < enc.bands; ++b) np_inputs(i, b) = rng.uniform(-1.0, 1.0);
    }
    const specmatch::LossFn npair = [&](const specmatch::EncoderParams& p,
                                        specmatch::Vector* grad) {
        std::vector<specmatch::ForwardTrace> traces(tuple);
        for (int i = 0; i < tuple; ++i) {
            specmatch::encoder_forward(p, np_inputs.row(i).transpose(), traces[i]);
        }
        specmatch::Matrix negs(tuple - 2, p.cfg.embed);
        for (int i = 2; i < tuple; ++i) negs.row(i - 2) = traces[i].embedding.transpose();
        const specmatch::NPairResult res =
            specmatch::npair_loss(traces[0].embedding, traces[1].embedding, negs);
        if (grad) {
            grad->setZero(p.cfg.param_count());
            specmatch::encoder_backward(p, traces[0], res.d_anchor, *grad);
            specmatch::encoder_backward(p, traces[1], res.d_positive, *grad);
            for (int i = 2; i < tuple; ++i) {
                specmatch::encoder_backward(p, traces[i], res.d_negatives.row(i - 2).transpose(), *grad);
            }
        }
        return res.loss;
    };

    const double ce_err = specmatch::grad_check(params, ce_loss, args.step, args.seed);
    const double np_err = specmatch::grad_check(params, npair, args.step, args.seed);
    std::cout << std::setprecision(3) << std::scientific;
    std::cout << "cross-entropy  max relative error " << ce_err << '\n';
    std::cout << "n-pair         max relative error " << np_err << '\n';
    return (ce_err < args.tolerance && np_err < args.tolerance) ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"self-supervised hyperspectral target detection"};
    app.require_subcommand(1);

    specmatch::SceneSpec spec;
    std::string synth_prefix = "scene";
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic scene (ENVI cube, mask, priors)");
    synth->add_option("--out-prefix", synth_prefix, "output path prefix")->capture_default_str();
    synth->add_option("--width", spec.width)->check(CLI::PositiveNumber)->capture_default_str();
    synth->add_option("--height", spec.height)->check(CLI::PositiveNumber)->capture_default_str();
    synth->add_option("--bands", spec.bands)->check(CLI::PositiveNumber)->capture_default_str();
    synth->add_option("--endmembers", spec.endmembers)->check(CLI::PositiveNumber)->capture_default_str();
    synth->add_option("--targets", spec.target_pixels, "number of implanted target pixels")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    synth->add_option("--abundance-lo", spec.abundance_lo)->capture_default_str();
    synth->add_option("--abundance-hi", spec.abundance_hi)->capture_default_str();
    synth->add_option("--confuser", spec.confuser_correlation,
                      "confuser correlation with the target")
        ->capture_default_str();
    synth->add_option("--noise", spec.noise_sigma, "noise sigma relative to mean signal")
        ->capture_default_str();
    synth->add_option("--seed", spec.seed)->capture_default_str();
    synth->add_option("--endmember-seed", spec.endmember_seed)->capture_default_str();

    DetectArgs detect_args;
    std::uint64_t detect_seed = 0;
    int detect_threads = 0;
    CLI::App* detect = app.add_subcommand("detect", "run a detector over a cube");
    detect->add_option("--header", detect_args.header, "ENVI header path")->required();
    detect->add_option("--data", detect_args.data, "ENVI data path")->required();
    detect->add_option("--priors", detect_args.priors,
                       "priors file: 'col row' lines or spectra CSV")
        ->required();
    detect->add_option("--config", detect_args.config_path, "key=value config file");
    detect->add_option("--truth", detect_args.truth_path, "ground-truth mask (adds AUC to the manifest)");
    detect->add_option("--out-prefix", detect_args.out_prefix)->capture_default_str();
    detect->add_option("--detector", detect_args.detector, "cem, ace or learned")->capture_default_str();
    detect->add_option("--set", detect_args.overrides, "config override key=value (repeatable)");
    CLI::Option* seed_opt = detect->add_option("--seed", detect_seed, "override the config seed");
    CLI::Option* threads_opt = detect->add_option("--threads", detect_threads, "worker threads")
                                   ->check(CLI::PositiveNumber);

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "score maps vs ground truth: ROC CSVs and an AUC table");
    eval->add_option("--scores", eval_args.scores, "score map CSV (repeatable)")->required();
    eval->add_option("--truth", eval_args.truth_path, "ground-truth mask")->required();
    eval->add_option("--out-prefix", eval_args.out_prefix)->capture_default_str();

    GradcheckArgs grad_args;
    CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the hand-rolled gradients");
    gradcheck->add_option("--bands", grad_args.bands)->check(CLI::PositiveNumber)->capture_default_str();
    gradcheck->add_option("--channels", grad_args.channels)->check(CLI::PositiveNumber)->capture_default_str();
    gradcheck->add_option("--kernel", grad_args.kernel)->check(CLI::PositiveNumber)->capture_default_str();
    gradcheck->add_option("--hidden", grad_args.hidden)->check(CLI::PositiveNumber)->capture_default_str();
    gradcheck->add_option("--embed", grad_args.embed)->check(CLI::PositiveNumber)->capture_default_str();
    gradcheck->add_option("--classes", grad_args.classes)->check(CLI::Range(2, 1 << 16))->capture_default_str();
    gradcheck->add_option("--step", grad_args.step)->capture_default_str();
    gradcheck->add_option("--tol", grad_args.tolerance)->capture_default_str();
    gradcheck->add_option("--seed", grad_args.seed)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (synth->parsed()) return run_synth(spec, synth_prefix);
        if (detect->parsed()) {
            if (seed_opt->count()) detect_args.seed = detect_seed;
            if (threads_opt->count()) detect_args.threads = detect_threads;
            return run_detect_cmd(detect_args);
        }
        if (eval->parsed()) return run_eval_cmd(eval_args);
        if (gradcheck->parsed()) return run_gradcheck_cmd(grad_args);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
