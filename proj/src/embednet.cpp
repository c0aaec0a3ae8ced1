#include "specmatch/embednet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>

namespace specmatch {

void EncoderConfig::validate() const {
    if (bands < 1) throw InvalidArgument("encoder: bands must be >= 1");
    if (conv_channels < 1) throw InvalidArgument("encoder: conv_channels must be >= 1");
    if (kernel < 1 || kernel % 2 == 0) throw InvalidArgument("encoder: kernel width must be odd and >= 1");
    if (hidden < 1) throw InvalidArgument("encoder: hidden width must be >= 1");
    if (embed < 1) throw InvalidArgument("encoder: embedding width must be >= 1");
    if (classes < 1) throw InvalidArgument("encoder: head width must be >= 1");
}

EncoderParams init_params(const EncoderConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    EncoderParams p;
    p.cfg = cfg;
    p.values = Vector::Zero(cfg.param_count());

    Rng rng(Rng::derive(seed, seed_stream::kParamInit));
    const auto fill = [&rng](double* base, int count, double fan_in, double fan_out) {
        const double a = std::sqrt(6.0 / (fan_in + fan_out));
        for (int i = 0; i < count; ++i) base[i] = rng.uniform(-a, a);
    };
    fill(p.values.data() + cfg.conv_w_offset(), cfg.conv_channels * cfg.kernel,
         cfg.kernel, static_cast<double>(cfg.kernel) * cfg.conv_channels);
    fill(p.values.data() + cfg.lin1_w_offset(), cfg.hidden * cfg.flat_size(),
         cfg.flat_size(), cfg.hidden);
    fill(p.values.data() + cfg.lin2_w_offset(), cfg.embed * cfg.hidden,
         cfg.hidden, cfg.embed);
    fill(p.values.data() + cfg.head_w_offset(), cfg.classes * cfg.embed,
         cfg.embed, cfg.classes);
    return p;
}

void encoder_forward(const EncoderParams& params, const Spectrum& spectrum, ForwardTrace& trace) {
    const EncoderConfig& cfg = params.cfg;
    if (spectrum.size() != cfg.bands) {
        throw InvalidArgument("encoder_forward: spectrum length does not match encoder bands");
    }
    if (params.values.size() != cfg.param_count()) {
        throw InvalidArgument("encoder_forward: parameter vector size mismatch");
    }

    const int B = cfg.bands;
    const int C = cfg.conv_channels;
    const int K = cfg.kernel;
    const int pad = (K - 1) / 2;

    trace.input = spectrum;
    trace.conv_pre.resize(C, B);
    const auto w = params.conv_w();
    const auto cb = params.conv_b();
    for (int c = 0; c < C; ++c) {
        for (int i = 0; i < B; ++i) {
            double acc = cb[c];
            const int j0 = std::max(0, pad - i);
            const int j1 = std::min(K, B + pad - i);
            for (int j = j0; j < j1; ++j) acc += w(c, j) * spectrum[i + j - pad];
            trace.conv_pre(c, i) = acc;
        }
    }
    // Row-major conv_pre flattens to index c*B + i.
    trace.flat = Eigen::Map<const Vector>(trace.conv_pre.data(), C * B).cwiseMax(0.0);

    trace.h1_pre = params.lin1_w() * trace.flat + params.lin1_b();
    trace.h1 = trace.h1_pre.cwiseMax(0.0);
    trace.embed_pre = params.lin2_w() * trace.h1 + params.lin2_b();

    trace.prenorm = trace.embed_pre.norm();
    if (trace.prenorm < 1e-12) {
        trace.guarded = true;
        trace.embedding = Vector::Zero(cfg.embed);
        trace.embedding[0] = 1.0;
    } else {
        trace.guarded = false;
        trace.embedding = trace.embed_pre / trace.prenorm;
    }
}

Vector encoder_forward(const EncoderParams& params, const Spectrum& spectrum) {
    ForwardTrace trace;
    encoder_forward(params, spectrum, trace);
    return trace.embedding;
}

void encoder_backward(const EncoderParams& params, const ForwardTrace& trace,
                      const Vector& d_embedding, Vector& grad) {
    const EncoderConfig& cfg = params.cfg;
    if (d_embedding.size() != cfg.embed) {
        throw InvalidArgument("encoder_backward: gradient dimension mismatch");
    }
    if (grad.size() != cfg.param_count()) {
        throw InvalidArgument("encoder_backward: accumulator size mismatch");
    }

    Vector dv;
    if (trace.guarded) {
        dv = Vector::Zero(cfg.embed);
    } else {
        const double along = d_embedding.dot(trace.embedding);
        dv = (d_embedding - along * trace.embedding) / trace.prenorm;
    }

    Eigen::Map<Matrix> g_lin2_w(grad.data() + cfg.lin2_w_offset(), cfg.embed, cfg.hidden);
    Eigen::Map<Vector> g_lin2_b(grad.data() + cfg.lin2_b_offset(), cfg.embed);
    g_lin2_w += dv * trace.h1.transpose();
    g_lin2_b += dv;

    const Vector dh1 = params.lin2_w().transpose() * dv;
    const Vector dh1_pre = dh1.array() * (trace.h1_pre.array() > 0.0).cast<double>();

    Eigen::Map<Matrix> g_lin1_w(grad.data() + cfg.lin1_w_offset(), cfg.hidden, cfg.flat_size());
    Eigen::Map<Vector> g_lin1_b(grad.data() + cfg.lin1_b_offset(), cfg.hidden);
    g_lin1_w += dh1_pre * trace.flat.transpose();
    g_lin1_b += dh1_pre;

    const Vector dflat = params.lin1_w().transpose() * dh1_pre;

    const int B = cfg.bands;
    const int C = cfg.conv_channels;
    const int K = cfg.kernel;
    const int pad = (K - 1) / 2;
    Eigen::Map<Matrix> g_conv_w(grad.data() + cfg.conv_w_offset(), C, K);
    Eigen::Map<Vector> g_conv_b(grad.data() + cfg.conv_b_offset(), C);
    for (int c = 0; c < C; ++c) {
        for (int i = 0; i < B; ++i) {
            if (!(trace.conv_pre(c, i) > 0.0)) continue;
            const double d = dflat[c * B + i];
            g_conv_b[c] += d;
            const int j0 = std::max(0, pad - i);
            const int j1 = std::min(K, B + pad - i);
            for (int j = j0; j < j1; ++j) g_conv_w(c, j) += d * trace.input[i + j - pad];
        }
    }
}

Vector head_logits(const EncoderParams& params, const Vector& embedding) {
    if (embedding.size() != params.cfg.embed) {
        throw InvalidArgument("head_logits: embedding dimension mismatch");
    }
    return params.head_w() * embedding + params.head_b();
}

CeResult softmax_cross_entropy(const Vector& logits, int label) {
    if (logits.size() < 1) throw InvalidArgument("cross_entropy: empty logits");
    if (label < 0 || label >= logits.size()) throw InvalidArgument("cross_entropy: label out of range");
    const double m = logits.maxCoeff();
    Vector p = (logits.array() - m).exp();
    const double z = p.sum();
    p /= z;
    CeResult r;
    r.loss = -(logits[label] - m - std::log(z));
    r.d_logits = std::move(p);
    r.d_logits[label] -= 1.0;
    return r;
}

Vector head_backward(const EncoderParams& params, const Vector& embedding,
                     const Vector& d_logits, Vector& grad) {
    const EncoderConfig& cfg = params.cfg;
    if (d_logits.size() != cfg.classes || embedding.size() != cfg.embed) {
        throw InvalidArgument("head_backward: dimension mismatch");
    }
    if (grad.size() != cfg.param_count()) {
        throw InvalidArgument("head_backward: accumulator size mismatch");
    }
    Eigen::Map<Matrix> g_w(grad.data() + cfg.head_w_offset(), cfg.classes, cfg.embed);
    Eigen::Map<Vector> g_b(grad.data() + cfg.head_b_offset(), cfg.classes);
    g_w += d_logits * embedding.transpose();
    g_b += d_logits;
    return params.head_w().transpose() * d_logits;
}

NPairResult npair_loss(const Vector& anchor, const Vector& positive, const Matrix& negatives) {
    const Eigen::Index n = negatives.rows();
    if (n < 1) throw InvalidArgument("npair_loss: need at least one negative");
    if (positive.size() != anchor.size() || negatives.cols() != anchor.size()) {
        throw InvalidArgument("npair_loss: embedding dimension mismatch");
    }

    const double pos_ip = anchor.dot(positive);
    Vector t = negatives * anchor;
    t.array() -= pos_ip;

    // Log-sum-exp over {0, t_1, ..., t_n}; the implicit 0 logit is the "1 +"
    // term of Eq. 4.
    const double m = std::max(0.0, t.maxCoeff());
    const Vector e = (t.array() - m).exp();
    const double denom = std::exp(-m) + e.sum();

    NPairResult r;
    r.loss = m + std::log(denom);
    const Vector p = e / denom;
    const double ptot = p.sum();
    r.d_anchor = negatives.transpose() * p - ptot * positive;
    r.d_positive = -ptot * anchor;
    r.d_negatives = p * anchor.transpose();
    return r;
}

void sgd_step(EncoderParams& params, const Vector& grad, double learning_rate) {
    if (grad.size() != params.values.size()) {
        throw InvalidArgument("sgd_step: gradient size mismatch");
    }
    if (learning_rate < 0.0) throw InvalidArgument("sgd_step: negative learning rate");
    double* v = params.values.data();
    const double* g = grad.data();
    const Eigen::Index count = params.values.size();
    for (Eigen::Index i = 0; i < count; ++i) v[i] -= learning_rate * g[i];
}

std::vector<double> pretext_train(EncoderParams& params, const Matrix& centers,
                                  const PretextOptions& options, const SgdConfig& sgd) {
    params.cfg.validate();
    if (centers.rows() < 2) throw InvalidArgument("pretext_train: need at least 2 centers");
    if (centers.rows() != params.cfg.classes) {
        throw InvalidArgument("pretext_train: head width does not match center count");
    }
    if (centers.cols() != params.cfg.bands) {
        throw InvalidArgument("pretext_train: center band count does not match encoder");
    }
    if (sgd.learning_rate < 0.0) throw InvalidArgument("pretext_train: negative learning rate");
    if (sgd.batch_size < 1) throw InvalidArgument("pretext_train: batch size must be >= 1");
    if (sgd.epochs < 0) throw InvalidArgument("pretext_train: negative epoch count");
    if (options.batches_per_epoch < 1) {
        throw InvalidArgument("pretext_train: batches_per_epoch must be >= 1");
    }

    Rng rng(Rng::derive(sgd.seed, seed_stream::kPretext));
    std::vector<double> trace;
    trace.reserve(sgd.epochs);
    Vector grad(params.cfg.param_count());
    ForwardTrace fwd;
    for (int epoch = 0; epoch < sgd.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (int b = 0; b < options.batches_per_epoch; ++b) {
            grad.setZero();
            for (int s = 0; s < sgd.batch_size; ++s) {
                const MixedSample sample = draw_mixed_sample(centers, options.mix, rng);
                encoder_forward(params, sample.spectrum, fwd);
                const Vector logits = head_logits(params, fwd.embedding);
                CeResult ce = softmax_cross_entropy(logits, sample.label);
                if (!std::isfinite(ce.loss)) {
                    throw NumericError("pretext_train: loss diverged at epoch " + std::to_string(epoch));
                }
                epoch_loss += ce.loss;
                const Vector dy = head_backward(params, fwd.embedding, ce.d_logits, grad);
                encoder_backward(params, fwd, dy, grad);
            }
            sgd_step(params, grad, sgd.learning_rate);
        }
        trace.push_back(epoch_loss / (static_cast<double>(options.batches_per_epoch) * sgd.batch_size));
    }
    return trace;
}

LabeledPoints::LabeledPoints(const Matrix& pts, const std::vector<int>& labels, int num_classes)
    : points(&pts) {
    if (num_classes < 1) throw InvalidArgument("labeled points: num_classes must be >= 1");
    if (static_cast<Eigen::Index>(labels.size()) != pts.rows()) {
        throw InvalidArgument("labeled points: label count does not match point count");
    }
    by_class.resize(num_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int c = labels[i];
        if (c == -1) continue;  // unlabeled points are skipped
        if (c < -1 || c >= num_classes) throw InvalidArgument("labeled points: label out of range");
        by_class[c].push_back(static_cast<int>(i));
    }
}

int LabeledPoints::eligible_classes() const {
    int n = 0;
    for (const auto& members : by_class) n += members.size() >= 2;
    return n;
}

NPairBatch build_npair_batch(const LabeledPoints& data, int n_classes,
                             const EncoderParams& params, bool hard_mining,
                             const MiningState& mining, Rng& rng) {
    std::vector<int> ids;
    for (int c = 0; c < static_cast<int>(data.by_class.size()); ++c) {
        if (data.by_class[c].size() >= 2) ids.push_back(c);
    }
    if (n_classes < 2) throw InvalidArgument("npair batch: need at least 2 classes per batch");
    if (static_cast<int>(ids.size()) < n_classes) {
        throw InvalidArgument("npair batch: fewer than N classes with at least 2 samples");
    }

    std::vector<double> w(ids.size(), 1.0);
    const bool weighted = hard_mining && mining.ready &&
                          mining.confusion.size() == static_cast<Eigen::Index>(data.by_class.size());
    if (weighted) {
        // Floor keeps every class reachable once its loss share decays to 0.
        for (std::size_t i = 0; i < ids.size(); ++i) w[i] = std::max(mining.confusion[ids[i]], 1e-9);
    }

    NPairBatch batch;
    for (int pick = 0; pick < n_classes; ++pick) {
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        double u = rng.uniform01() * total;
        std::size_t chosen = ids.size() - 1;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            u -= w[i];
            if (u <= 0.0) {
                chosen = i;
                break;
            }
        }
        const int cls = ids[chosen];
        ids.erase(ids.begin() + chosen);
        w.erase(w.begin() + chosen);
        batch.classes.push_back(cls);

        const std::vector<int>& members = data.by_class[cls];
        const int m = static_cast<int>(members.size());
        const int anchor_at = static_cast<int>(rng.index(m));
        batch.anchors.push_back(members[anchor_at]);

        std::vector<int> others;
        others.reserve(m - 1);
        for (int i = 0; i < m; ++i) {
            if (i != anchor_at) others.push_back(members[i]);
        }
        if (!hard_mining || others.size() == 1) {
            batch.positives.push_back(others[rng.index(others.size())]);
            continue;
        }

        // Hard positive: of 4 uniformly drawn distinct candidates, keep the
        // one embedded farthest from the anchor.
        const int cand = static_cast<int>(std::min<std::size_t>(4, others.size()));
        for (int j = 0; j < cand; ++j) {
            const int swap_at = j + static_cast<int>(rng.index(others.size() - j));
            std::swap(others[j], others[swap_at]);
        }
        const Vector anchor_emb = encoder_forward(params, data.points->row(members[anchor_at]).transpose());
        int best = others[0];
        double best_d = -1.0;
        for (int j = 0; j < cand; ++j) {
            const Vector emb = encoder_forward(params, data.points->row(others[j]).transpose());
            const double d = (emb - anchor_emb).squaredNorm();
            if (d > best_d) {
                best_d = d;
                best = others[j];
            }
        }
        batch.positives.push_back(best);
    }
    return batch;
}

std::vector<double> npair_train(EncoderParams& params, const Matrix& points,
                                const std::vector<int>& labels, int num_classes,
                                const NPairOptions& options, const SgdConfig& sgd) {
    params.cfg.validate();
    if (points.cols() != params.cfg.bands) {
        throw InvalidArgument("npair_train: point band count does not match encoder");
    }
    if (sgd.learning_rate < 0.0) throw InvalidArgument("npair_train: negative learning rate");
    if (sgd.epochs < 0) throw InvalidArgument("npair_train: negative epoch count");
    if (options.batches_per_epoch < 1) {
        throw InvalidArgument("npair_train: batches_per_epoch must be >= 1");
    }

    const LabeledPoints data(points, labels, num_classes);
    const int eligible = data.eligible_classes();
    const int n = options.classes_per_batch > 0 ? options.classes_per_batch : eligible;
    if (n < 2 || eligible < n) {
        throw InvalidArgument("npair_train: fewer than N classes with at least 2 samples");
    }

    Rng rng(Rng::derive(sgd.seed, seed_stream::kNPair));
    MiningState mining;
    std::vector<double> trace;
    trace.reserve(sgd.epochs);
    Vector grad(params.cfg.param_count());
    std::vector<ForwardTrace> anchor_tr(n);
    std::vector<ForwardTrace> positive_tr(n);
    Matrix negs(n - 1, params.cfg.embed);

    for (int epoch = 0; epoch < sgd.epochs; ++epoch) {
        double epoch_loss = 0.0;
        Vector class_loss = Vector::Zero(num_classes);
        for (int b = 0; b < options.batches_per_epoch; ++b) {
            const NPairBatch batch =
                build_npair_batch(data, n, params, options.hard_mining, mining, rng);
            for (int i = 0; i < n; ++i) {
                encoder_forward(params, points.row(batch.anchors[i]).transpose(), anchor_tr[i]);
                encoder_forward(params, points.row(batch.positives[i]).transpose(), positive_tr[i]);
            }

            Matrix d_anchor = Matrix::Zero(n, params.cfg.embed);
            Matrix d_positive = Matrix::Zero(n, params.cfg.embed);
            for (int i = 0; i < n; ++i) {
                int r = 0;
                for (int j = 0; j < n; ++j) {
                    if (j != i) negs.row(r++) = positive_tr[j].embedding;
                }
                const NPairResult res =
                    npair_loss(anchor_tr[i].embedding, positive_tr[i].embedding, negs);
                if (!std::isfinite(res.loss)) {
                    throw NumericError("npair_train: loss diverged at epoch " + std::to_string(epoch));
                }
                epoch_loss += res.loss;
                class_loss[batch.classes[i]] += res.loss;
                d_anchor.row(i) += res.d_anchor.transpose();
                d_positive.row(i) += res.d_positive.transpose();
                r = 0;
                for (int j = 0; j < n; ++j) {
                    if (j != i) d_positive.row(j) += res.d_negatives.row(r++);
                }
            }

            grad.setZero();
            for (int i = 0; i < n; ++i) {
                encoder_backward(params, anchor_tr[i], d_anchor.row(i).transpose(), grad);
                encoder_backward(params, positive_tr[i], d_positive.row(i).transpose(), grad);
            }
            sgd_step(params, grad, sgd.learning_rate);
        }
        trace.push_back(epoch_loss / (static_cast<double>(options.batches_per_epoch) * n));

        const double total = class_loss.sum();
        if (total > 0.0) {
            const Vector share = class_loss / total;
            if (!mining.ready) {
                mining.confusion = share;
                mining.ready = true;
            } else {
                mining.confusion = 0.9 * mining.confusion + 0.1 * share;
            }
        }
    }
    return trace;
}

double grad_check(const EncoderParams& params, const LossFn& loss, double step,
                  std::uint64_t seed) {
    if (!(step > 0.0)) throw InvalidArgument("grad_check: step must be positive");
    Vector analytic;
    loss(params, &analytic);
    if (analytic.size() != params.values.size()) {
        throw InvalidArgument("grad_check: evaluator returned a gradient of the wrong size");
    }

    const Eigen::Index count = params.values.size();
    constexpr Eigen::Index kCap = 10000;
    std::vector<Eigen::Index> idx(count);
    std::iota(idx.begin(), idx.end(), 0);
    if (count > kCap) {
        Rng rng(Rng::derive(seed, seed_stream::kGradCheck));
        for (Eigen::Index j = 0; j < kCap; ++j) {
            const Eigen::Index swap_at =
                j + static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(count - j)));
            std::swap(idx[j], idx[swap_at]);
        }
        idx.resize(kCap);
    }

    EncoderParams probe = params;
    double max_rel = 0.0;
    for (const Eigen::Index i : idx) {
        const double orig = probe.values[i];
        probe.values[i] = orig + step;
        const double lp = loss(probe, nullptr);
        probe.values[i] = orig - step;
        const double lm = loss(probe, nullptr);
        probe.values[i] = orig;
        const double fd = (lp - lm) / (2.0 * step);
        const double rel =
            std::abs(analytic[i] - fd) / std::max({std::abs(analytic[i]), std::abs(fd), 1e-8});
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

namespace {

constexpr char kMagic[8] = {'S', 'M', 'E', 'M', 'B', 'D', '0', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& is, const std::string& path) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw IoError("checkpoint: truncated file " + path);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& is, const std::string& path) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw IoError("checkpoint: truncated file " + path);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

}  // namespace

void save_checkpoint(const EncoderParams& params, const std::string& path) {
    params.cfg.validate();
    if (params.values.size() != params.cfg.param_count()) {
        throw InvalidArgument("checkpoint: parameter vector size mismatch");
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("checkpoint: cannot open " + path + " for writing");
    os.write(kMagic, 8);
    put_u32(os, 1);
    put_u32(os, static_cast<std::uint32_t>(params.cfg.bands));
    put_u32(os, static_cast<std::uint32_t>(params.cfg.conv_channels));
    put_u32(os, static_cast<std::uint32_t>(params.cfg.kernel));
    put_u32(os, static_cast<std::uint32_t>(params.cfg.hidden));
    put_u32(os, static_cast<std::uint32_t>(params.cfg.embed));
    put_u32(os, static_cast<std::uint32_t>(params.cfg.classes));
    put_u64(os, static_cast<std::uint64_t>(params.values.size()));
    for (Eigen::Index i = 0; i < params.values.size(); ++i) {
        put_u64(os, std::bit_cast<std::uint64_t>(params.values[i]));
    }
    os.flush();
    if (!os) throw IoError("checkpoint: write failed for " + path);
}

EncoderParams load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("checkpoint: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0) {
        throw IoError("checkpoint: bad magic in " + path);
    }
    const std::uint32_t version = get_u32(is, path);
    if (version != 1) {
        throw IoError("checkpoint: unsupported version " + std::to_string(version) + " in " + path);
    }
    EncoderParams p;
    p.cfg.bands = static_cast<int>(get_u32(is, path));
    p.cfg.conv_channels = static_cast<int>(get_u32(is, path));
    p.cfg.kernel = static_cast<int>(get_u32(is, path));
    p.cfg.hidden = static_cast<int>(get_u32(is, path));
    p.cfg.embed = static_cast<int>(get_u32(is, path));
    p.cfg.classes = static_cast<int>(get_u32(is, path));
    p.cfg.validate();
    const std::uint64_t count = get_u64(is, path);
    if (count != static_cast<std::uint64_t>(p.cfg.param_count())) {
        throw IoError("checkpoint: parameter count does not match architecture in " + path);
    }
    p.values.resize(static_cast<Eigen::Index>(count));
    for (std::uint64_t i = 0; i < count; ++i) {
        p.values[static_cast<Eigen::Index>(i)] = std::bit_cast<double>(get_u64(is, path));
    }
    if (!p.values.allFinite()) throw IoError("checkpoint: non-finite parameter in " + path);
    return p;
}

}  // namespace specmatch
