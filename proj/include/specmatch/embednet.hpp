#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "specmatch/error.hpp"
#include "specmatch/mixgen.hpp"
#include "specmatch/rng.hpp"
#include "specmatch/types.hpp"

namespace specmatch {

// Architecture: conv1d (stride 1, zero padding, odd kernel) -> ReLU ->
// flatten -> linear(hidden) -> ReLU -> linear(embed) -> L2 normalize,
// plus a K-way linear head used only during pretext training.
struct EncoderConfig {
    int bands = 0;
    int conv_channels = 8;
    int kernel = 3;
    int hidden = 128;
    int embed = 64;
    int classes = 2;

    int flat_size() const { return conv_channels * bands; }

    // Flat parameter layout, in storage order.
    int conv_w_offset() const { return 0; }
    int conv_b_offset() const { return conv_channels * kernel; }
    int lin1_w_offset() const { return conv_b_offset() + conv_channels; }
    int lin1_b_offset() const { return lin1_w_offset() + hidden * flat_size(); }
    int lin2_w_offset() const { return lin1_b_offset() + hidden; }
    int lin2_b_offset() const { return lin2_w_offset() + embed * hidden; }
    int head_w_offset() const { return lin2_b_offset() + embed; }
    int head_b_offset() const { return head_w_offset() + classes * embed; }
    int param_count() const { return head_b_offset() + classes; }

    void validate() const;
};

struct EncoderParams {
    EncoderConfig cfg;
    Vector values;  // flat storage, layout per EncoderConfig offsets

    Eigen::Map<Matrix> conv_w() { return {values.data() + cfg.conv_w_offset(), cfg.conv_channels, cfg.kernel}; }
    Eigen::Map<Vector> conv_b() { return {values.data() + cfg.conv_b_offset(), cfg.conv_channels}; }
    Eigen::Map<Matrix> lin1_w() { return {values.data() + cfg.lin1_w_offset(), cfg.hidden, cfg.flat_size()}; }
    Eigen::Map<Vector> lin1_b() { return {values.data() + cfg.lin1_b_offset(), cfg.hidden}; }
    Eigen::Map<Matrix> lin2_w() { return {values.data() + cfg.lin2_w_offset(), cfg.embed, cfg.hidden}; }
    Eigen::Map<Vector> lin2_b() { return {values.data() + cfg.lin2_b_offset(), cfg.embed}; }
    Eigen::Map<Matrix> head_w() { return {values.data() + cfg.head_w_offset(), cfg.classes, cfg.embed}; }
    Eigen::Map<Vector> head_b() { return {values.data() + cfg.head_b_offset(), cfg.classes}; }

    Eigen::Map<const Matrix> conv_w() const { return {values.data() + cfg.conv_w_offset(), cfg.conv_channels, cfg.kernel}; }
    Eigen::Map<const Vector> conv_b() const { return {values.data() + cfg.conv_b_offset(), cfg.conv_channels}; }
    Eigen::Map<const Matrix> lin1_w() const { return {values.data() + cfg.lin1_w_offset(), cfg.hidden, cfg.flat_size()}; }
    Eigen::Map<const Vector> lin1_b() const { return {values.data() + cfg.lin1_b_offset(), cfg.hidden}; }
    Eigen::Map<const Matrix> lin2_w() const { return {values.data() + cfg.lin2_w_offset(), cfg.embed, cfg.hidden}; }
    Eigen::Map<const Vector> lin2_b() const { return {values.data() + cfg.lin2_b_offset(), cfg.embed}; }
    Eigen::Map<const Matrix> head_w() const { return {values.data() + cfg.head_w_offset(), cfg.classes, cfg.embed}; }
    Eigen::Map<const Vector> head_b() const { return {values.data() + cfg.head_b_offset(), cfg.classes}; }
};

// Seeded uniform init in [-a, a] with a = sqrt(6 / (fan_in + fan_out)) per
// weight block; biases zero. Draw order follows the storage layout.
EncoderParams init_params(const EncoderConfig& cfg, std::uint64_t seed);

struct ForwardTrace {
    Vector input;
    Matrix conv_pre;   // channels x bands, pre-activation
    Vector flat;       // rectified conv output, index c*bands + i
    Vector h1_pre;
    Vector h1;
    Vector embed_pre;  // pre-normalization embedding
    double prenorm = 0.0;
    bool guarded = false;  // prenorm under the zero guard; gradient is zero
    Vector embedding;      // unit norm, or the first basis vector when guarded
};

void encoder_forward(const EncoderParams& params, const Spectrum& spectrum, ForwardTrace& trace);
Vector encoder_forward(const EncoderParams& params, const Spectrum& spectrum);

// Accumulates d(loss)/d(theta) into grad (size param_count, caller-zeroed).
// Head parameters are untouched; use head_backward for those.
void encoder_backward(const EncoderParams& params, const ForwardTrace& trace,
                      const Vector& d_embedding, Vector& grad);

Vector head_logits(const EncoderParams& params, const Vector& embedding);

struct CeResult {
    double loss = 0.0;
    Vector d_logits;  // softmax(u) - onehot(label)
};
CeResult softmax_cross_entropy(const Vector& logits, int label);

// Accumulates head gradients into grad and returns d(loss)/d(embedding).
Vector head_backward(const EncoderParams& params, const Vector& embedding,
                     const Vector& d_logits, Vector& grad);

struct NPairResult {
    double loss = 0.0;
    Vector d_anchor;
    Vector d_positive;
    Matrix d_negatives;  // one row per negative
};
// Eq. 4: log(1 + sum_i exp(f.f_i - f.f+)), stable log-sum-exp form.
NPairResult npair_loss(const Vector& anchor, const Vector& positive, const Matrix& negatives);

struct SgdConfig {
    double learning_rate = 1e-4;
    int batch_size = 128;
    int epochs = 1;
    std::uint64_t seed = 0;
};

// theta -= lr * grad, element by element. Kept scalar so a one-sample step is
// bit-comparable with a plain reference loop.
void sgd_step(EncoderParams& params, const Vector& grad, double learning_rate);

struct PretextOptions {
    MixGenOptions mix;
    int batches_per_epoch = 40;
};

// Softmax cross-entropy on the normalized embedding through the K-way head,
// streaming mixed samples. Batch gradients are summed, not averaged. Returns
// the mean per-sample loss for each epoch.
std::vector<double> pretext_train(EncoderParams& params, const Matrix& centers,
                                  const PretextOptions& options, const SgdConfig& sgd);

struct NPairBatch {
    std::vector<int> classes;    // sampled class ids, in draw order
    std::vector<int> anchors;    // point index per class
    std::vector<int> positives;  // point index per class; negatives for anchor
                                 // i are the positives of the other classes
};

struct MiningState {
    Vector confusion;  // EMA of per-class loss share
    bool ready = false;
};

// Groups points by label once; reused across batches.
struct LabeledPoints {
    const Matrix* points = nullptr;
    std::vector<std::vector<int>> by_class;  // point indices per class id

    LabeledPoints(const Matrix& pts, const std::vector<int>& labels, int num_classes);
    int eligible_classes() const;  // classes holding at least 2 points
};

NPairBatch build_npair_batch(const LabeledPoints& data, int n_classes,
                             const EncoderParams& params, bool hard_mining,
                             const MiningState& mining, Rng& rng);

struct NPairOptions {
    int classes_per_batch = 0;  // 0 selects every eligible class
    int batches_per_epoch = 50;
    bool hard_mining = true;
};

// Metric-learning phase over pseudo-labeled pixels. Returns the mean
// per-anchor loss for each epoch.
std::vector<double> npair_train(EncoderParams& params, const Matrix& points,
                                const std::vector<int>& labels, int num_classes,
                                const NPairOptions& options, const SgdConfig& sgd);

// Loss evaluator contract: returns the loss; when grad_out is non-null it is
// resized and filled with the analytic gradient in flat layout.
using LossFn = std::function<double(const EncoderParams&, Vector* grad_out)>;

// Central finite differences on every parameter, or a seeded subsample of
// 10^4 once the parameter count exceeds that. Returns the max relative error
// |ga - gfd| / max(|ga|, |gfd|, 1e-8).
double grad_check(const EncoderParams& params, const LossFn& loss, double step,
                  std::uint64_t seed = 0);

// Flat binary checkpoint: magic, version, architecture, little-endian f64
// parameter array.
void save_checkpoint(const EncoderParams& params, const std::string& path);
EncoderParams load_checkpoint(const std::string& path);

}  // namespace specmatch
