#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "specmatch/embednet.hpp"
#include "specmatch/rng.hpp"

using namespace specmatch;

namespace {

EncoderConfig small_config() {
    EncoderConfig cfg;
    cfg.bands = 5;
    cfg.conv_channels = 2;
    cfg.kernel = 3;
    cfg.hidden = 7;
    cfg.embed = 4;
    cfg.classes = 3;
    return cfg;
}

Vector random_vector(Rng& rng, int n, double lo = -1.0, double hi = 1.0) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * rng.uniform01();
    return v;
}

// Independent central-difference gradient of a scalar function of a vector.
template <typename F>
Vector fd_gradient(const Vector& x, double step, F f) {
    Vector g(x.size());
    Vector probe = x;
    for (int i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + step;
        const double up = f(probe);
        probe[i] = x[i] - step;
        const double down = f(probe);
        probe[i] = x[i];
        g[i] = (up - down) / (2.0 * step);
    }
    return g;
}

double rel_err(const Vector& a, const Vector& b) {
    double worst = 0.0;
    for (int i = 0; i < a.size(); ++i) {
        worst = std::max(worst,
                         std::abs(a[i] - b[i]) / std::max({std::abs(a[i]), std::abs(b[i]), 1e-8}));
    }
    return worst;
}

// Unstabilized softmax cross-entropy oracle.
double ce_reference(const Vector& logits, int label) {
    const double denom = logits.array().exp().sum();
    return std::log(denom) - logits[label];
}

// Direct Eq. 4 evaluation: log(1 + sum exp(f.f_i - f.f+)).
double npair_reference(const Vector& anchor, const Vector& positive, const Matrix& negatives) {
    double acc = 0.0;
    for (int i = 0; i < negatives.rows(); ++i) {
        acc += std::exp(anchor.dot(negatives.row(i).transpose()) - anchor.dot(positive));
    }
    return std::log1p(acc);
}

}  // namespace

TEST_CASE("init draws weights inside the per-block fan bounds with zero biases") {
    const EncoderConfig cfg = small_config();
    const EncoderParams params = init_params(cfg, 5);
    CHECK(params.values.size() == cfg.param_count());
    CHECK(params.values.allFinite());

    const double conv_bound = std::sqrt(6.0 / (cfg.kernel + cfg.kernel * cfg.conv_channels));
    const double lin1_bound = std::sqrt(6.0 / (cfg.flat_size() + cfg.hidden));
    const double lin2_bound = std::sqrt(6.0 / (cfg.hidden + cfg.embed));
    const double head_bound = std::sqrt(6.0 / (cfg.embed + cfg.classes));
    CHECK(params.conv_w().cwiseAbs().maxCoeff() <= conv_bound);
    CHECK(params.lin1_w().cwiseAbs().maxCoeff() <= lin1_bound);
    CHECK(params.lin2_w().cwiseAbs().maxCoeff() <= lin2_bound);
    CHECK(params.head_w().cwiseAbs().maxCoeff() <= head_bound);
    CHECK(params.conv_b().cwiseAbs().maxCoeff() == 0.0);
    CHECK(params.lin1_b().cwiseAbs().maxCoeff() == 0.0);
    CHECK(params.lin2_b().cwiseAbs().maxCoeff() == 0.0);
    CHECK(params.head_b().cwiseAbs().maxCoeff() == 0.0);

    const EncoderParams again = init_params(cfg, 5);
    CHECK((params.values.array() == again.values.array()).all());
    const EncoderParams other = init_params(cfg, 6);
    CHECK_FALSE((params.values.array() == other.values.array()).all());
}

TEST_CASE("forward produces unit-norm embeddings of the configured width") {
    const EncoderParams params = init_params(small_config(), 2);
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector x = random_vector(rng, 5);
        const Vector f = encoder_forward(params, x);
        CHECK(f.size() == 4);
        CHECK(std::abs(f.norm() - 1.0) <= 1e-9);
    }
    Vector wrong(7);
    wrong.setOnes();
    CHECK_THROWS_AS(encoder_forward(params, wrong), InvalidArgument);
}

TEST_CASE("all-zero parameters trigger the basis-vector guard") {
    EncoderParams params = init_params(small_config(), 2);
    params.values.setZero();
    Vector x(5);
    x << 1, 2, 3, 4, 5;
    ForwardTrace trace;
    encoder_forward(params, x, trace);
    CHECK(trace.guarded);
    CHECK(trace.embedding[0] == 1.0);
    CHECK(trace.embedding.tail(3).cwiseAbs().maxCoeff() == 0.0);

    // The guarded branch backpropagates a zero gradient.
    Vector grad = Vector::Zero(params.cfg.param_count());
    Vector d_emb(4);
    d_emb.setOnes();
    encoder_backward(params, trace, d_emb, grad);
    CHECK(grad.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("doubling the input scales pre-normalization activations and fixes the embedding") {
    EncoderParams params = init_params(small_config(), 9);
    params.conv_b().setZero();
    params.lin1_b().setZero();
    params.lin2_b().setZero();
    Rng rng(4);
    const Vector x = random_vector(rng, 5, 0.1, 1.0);

    ForwardTrace once, twice;
    encoder_forward(params, x, once);
    encoder_forward(params, 2.0 * x, twice);
    REQUIRE(!once.guarded);
    REQUIRE(!twice.guarded);
    CHECK((twice.embed_pre - 2.0 * once.embed_pre).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((twice.embedding - once.embedding).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("softmax cross-entropy matches the direct formula") {
    Vector logits(3);
    logits << 0.0, 0.0, 0.0;
    const CeResult even = softmax_cross_entropy(logits, 1);
    CHECK(even.loss == doctest::Approx(std::log(3.0)).epsilon(1e-14));
    CHECK(even.d_logits[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(even.d_logits[1] == doctest::Approx(1.0 / 3.0 - 1.0).epsilon(1e-14));

    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector u = random_vector(rng, 4, -3.0, 3.0);
        const int label = static_cast<int>(rng.index(4));
        const CeResult result = softmax_cross_entropy(u, label);
        CHECK(result.loss == doctest::Approx(ce_reference(u, label)).epsilon(1e-12));
        const Vector fd = fd_gradient(u, 1e-6, [&](const Vector& v) { return ce_reference(v, label); });
        CHECK(rel_err(result.d_logits, fd) < 1e-7);
        CHECK(std::abs(result.d_logits.sum()) < 1e-12);  // softmax minus one-hot sums to 0
    }

    // Large logits stay finite through the stabilized path.
    Vector big(3);
    big << 1000.0, 0.0, -1000.0;
    CHECK(std::isfinite(softmax_cross_entropy(big, 2).loss));
}

TEST_CASE("npair loss hits the hand values") {
    // Orthogonal anchor/positive/negative give equal inner products (all 0).
    Vector anchor(3), positive(3);
    anchor << 1, 0, 0;
    positive << 0, 1, 0;
    Matrix negatives(1, 3);
    negatives << 0, 0, 1;
    const NPairResult even = npair_loss(anchor, positive, negatives);
    CHECK(even.loss == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(even.loss == doctest::Approx(0.693147).epsilon(1e-6));

    // f.f1 - f.f+ = 1 via f.f1 = 1, f.f+ = 0.
    Matrix aligned(1, 3);
    aligned << 1, 0, 0;
    const NPairResult shifted = npair_loss(anchor, positive, aligned);
    CHECK(shifted.loss == doctest::Approx(std::log(1.0 + std::exp(1.0))).epsilon(1e-14));
    CHECK(shifted.loss == doctest::Approx(1.313262).epsilon(1e-6));

    // Perfect separation drives the loss to zero.
    Vector strong_pos(3);
    strong_pos << 50, 0, 0;
    const NPairResult separated = npair_loss(anchor, strong_pos, negatives);
    CHECK(separated.loss >= 0.0);
    CHECK(separated.loss < 1e-20);
}

TEST_CASE("npair loss equals log N under uniform inner products") {
    for (int n = 2; n <= 8; ++n) {
        Vector anchor(4), positive(4);
        anchor << 0.5, -0.5, 0.5, -0.5;
        positive << 0.5, 0.5, -0.5, -0.5;  // dot(anchor, positive) = 0
        Matrix negatives(n - 1, 4);
        for (int i = 0; i < n - 1; ++i) negatives.row(i) = positive.transpose();
        const NPairResult result = npair_loss(anchor, positive, negatives);
        CHECK(result.loss == doctest::Approx(std::log(static_cast<double>(n))).epsilon(1e-12));
    }
}

TEST_CASE("npair loss is invariant to shifting all inner products") {
    Rng rng(77);
    const Vector anchor = random_vector(rng, 6);
    const Vector positive = random_vector(rng, 6);
    Matrix negatives(3, 6);
    for (int i = 0; i < 3; ++i) negatives.row(i) = random_vector(rng, 6).transpose();
    const double base = npair_loss(anchor, positive, negatives).loss;

    const double shift = 2.31;
    const Vector offset = shift * anchor / anchor.squaredNorm();
    Matrix shifted_negs = negatives;
    for (int i = 0; i < 3; ++i) shifted_negs.row(i) += offset.transpose();
    const double shifted = npair_loss(anchor, positive + offset, shifted_negs).loss;
    CHECK(std::abs(shifted - base) < 1e-12);
}

TEST_CASE("npair loss survives extreme logits") {
    Vector anchor(2), positive(2);
    anchor << 30, 0;
    positive << -30, 0;  // f.f+ = -900
    Matrix negatives(2, 2);
    negatives << 30, 0, 29, 0;  // logits 1800, 1770: naive exp overflows
    const NPairResult result = npair_loss(anchor, positive, negatives);
    CHECK(std::isfinite(result.loss));
    CHECK(result.loss == doctest::Approx(1800.0).epsilon(1e-9));
}

TEST_CASE("npair gradients match finite differences") {
    Rng rng(50);
    for (int trial = 0; trial < 10; ++trial) {
        const int dim = 5;
        const int n_neg = 1 + static_cast<int>(rng.index(4));
        const Vector anchor = random_vector(rng, dim);
        const Vector positive = random_vector(rng, dim);
        Matrix negatives(n_neg, dim);
        for (int i = 0; i < n_neg; ++i) negatives.row(i) = random_vector(rng, dim).transpose();

        const NPairResult result = npair_loss(anchor, positive, negatives);
        CHECK(result.loss == doctest::Approx(npair_reference(anchor, positive, negatives)).epsilon(1e-12));

        const Vector fd_anchor = fd_gradient(anchor, 1e-6, [&](const Vector& v) {
            return npair_reference(v, positive, negatives);
        });
        CHECK(rel_err(result.d_anchor, fd_anchor) < 1e-6);

        const Vector fd_positive = fd_gradient(positive, 1e-6, [&](const Vector& v) {
            return npair_reference(anchor, v, negatives);
        });
        CHECK(rel_err(result.d_positive, fd_positive) < 1e-6);

        for (int i = 0; i < n_neg; ++i) {
            const Vector fd_neg =
                fd_gradient(negatives.row(i).transpose(), 1e-6, [&](const Vector& v) {
                    Matrix probe = negatives;
                    probe.row(i) = v.transpose();
                    return npair_reference(anchor, positive, probe);
                });
            CHECK(rel_err(result.d_negatives.row(i).transpose(), fd_neg) < 1e-6);
        }
    }
}

TEST_CASE("encoder and head gradients match an in-test finite-difference sweep") {
    const EncoderConfig cfg = small_config();
    Rng rng(31);
    const Vector x = random_vector(rng, cfg.bands);
    const int label = 1;

    const auto loss_at = [&](const EncoderParams& p) {
        ForwardTrace trace;
        encoder_forward(p, x, trace);
        return softmax_cross_entropy(head_logits(p, trace.embedding), label).loss;
    };

    EncoderParams params = init_params(cfg, 8);
    ForwardTrace trace;
    encoder_forward(params, x, trace);
    const CeResult ce = softmax_cross_entropy(head_logits(params, trace.embedding), label);
    Vector grad = Vector::Zero(cfg.param_count());
    const Vector d_embedding = head_backward(params, trace.embedding, ce.d_logits, grad);
    encoder_backward(params, trace, d_embedding, grad);

    EncoderParams probe = params;
    Vector fd(cfg.param_count());
    const double step = 1e-5;
    for (int i = 0; i < cfg.param_count(); ++i) {
        const double keep = probe.values[i];
        probe.values[i] = keep + step;
        const double up = loss_at(probe);
        probe.values[i] = keep - step;
        const double down = loss_at(probe);
        probe.values[i] = keep;
        fd[i] = (up - down) / (2.0 * step);
    }
    CHECK(rel_err(grad, fd) < 1e-5);
}

TEST_CASE("grad_check clears the toy quadratic and the real losses") {
    const EncoderConfig cfg = small_config();
    const EncoderParams params = init_params(cfg, 77);

    const LossFn quadratic = [](const EncoderParams& p, Vector* grad_out) {
        if (grad_out) *grad_out = p.values;
        return 0.5 * p.values.squaredNorm();
    };
    // A central difference is exact on a quadratic; what remains is the
    // cancellation noise of the loss evaluations, eps * |f| / step.
    CHECK(grad_check(params, quadratic, 1e-4) < 1e-6);

    Rng rng(21);
    const Vector x = random_vector(rng, cfg.bands);
    const LossFn ce_loss = [&](const EncoderParams& p, Vector* grad_out) {
        ForwardTrace trace;
        encoder_forward(p, x, trace);
        const CeResult ce = softmax_cross_entropy(head_logits(p, trace.embedding), 2);
        if (grad_out) {
            *grad_out = Vector::Zero(p.cfg.param_count());
            const Vector d_embedding = head_backward(p, trace.embedding, ce.d_logits, *grad_out);
            encoder_backward(p, trace, d_embedding, *grad_out);
        }
        return ce.loss;
    };
    CHECK(grad_check(params, ce_loss, 1e-4) < 1e-4);

    const Vector anchor_in = random_vector(rng, cfg.bands);
    const Vector positive_in = random_vector(rng, cfg.bands);
    const Vector negative_in = random_vector(rng, cfg.bands);
    const LossFn npair_fn = [&](const EncoderParams& p, Vector* grad_out) {
        ForwardTrace ta, tp, tn;
        encoder_forward(p, anchor_in, ta);
        encoder_forward(p, positive_in, tp);
        encoder_forward(p, negative_in, tn);
        Matrix negs(1, p.cfg.embed);
        negs.row(0) = tn.embedding.transpose();
        const NPairResult result = npair_loss(ta.embedding, tp.embedding, negs);
        if (grad_out) {
            *grad_out = Vector::Zero(p.cfg.param_count());
            encoder_backward(p, ta, result.d_anchor, *grad_out);
            encoder_backward(p, tp, result.d_positive, *grad_out);
            encoder_backward(p, tn, result.d_negatives.row(0).transpose(), *grad_out);
        }
        return result.loss;
    };
    CHECK(grad_check(params, npair_fn, 1e-4) < 1e-4);
}

TEST_CASE("one sgd step is bit-identical to the scalar reference") {
    const EncoderConfig cfg = small_config();
    EncoderParams params = init_params(cfg, 14);
    Rng rng(9);
    const Vector grad = random_vector(rng, cfg.param_count(), -0.3, 0.3);
    const double lr = 0.037;

    std::vector<double> reference(params.values.data(),
                                  params.values.data() + params.values.size());
    for (std::size_t i = 0; i < reference.size(); ++i) reference[i] -= lr * grad[i];

    sgd_step(params, grad, lr);
    for (int i = 0; i < params.values.size(); ++i) {
        CHECK(params.values[i] == reference[i]);
    }
}

TEST_CASE("pretext training reaches 0.95 accuracy on well-separated centers") {
    // Three bump spectra with disjoint support; at T=0.1 the mixtures are
    // nearly pure and linearly separable.
    const int bands = 12;
    Matrix centers = Matrix::Zero(3, bands);
    for (int b = 0; b < 4; ++b) {
        centers(0, b) = 1.0;
        centers(1, b + 4) = 1.0;
        centers(2, b + 8) = 1.0;
    }
    EncoderConfig cfg;
    cfg.bands = bands;
    cfg.conv_channels = 4;
    cfg.kernel = 3;
    cfg.hidden = 24;
    cfg.embed = 8;
    cfg.classes = 3;
    EncoderParams params = init_params(cfg, 1);

    PretextOptions options;
    options.mix.temperature = 0.1;
    options.batches_per_epoch = 10;
    SgdConfig sgd;
    sgd.learning_rate = 5e-3;
    sgd.batch_size = 32;
    sgd.epochs = 40;
    sgd.seed = 3;
    const std::vector<double> trace = pretext_train(params, centers, options, sgd);
    REQUIRE(trace.size() == 40);
    CHECK(trace.back() < trace.front());

    MixGenOptions mix;
    mix.temperature = 0.1;
    Rng eval_rng(555);
    int correct = 0;
    const int trials = 300;
    for (int i = 0; i < trials; ++i) {
        const MixedSample s = draw_mixed_sample(centers, mix, eval_rng);
        const Vector logits = head_logits(params, encoder_forward(params, s.spectrum));
        int pred = 0;
        logits.maxCoeff(&pred);
        correct += pred == s.label ? 1 : 0;
    }
    CHECK(static_cast<double>(correct) / trials >= 0.95);
}

TEST_CASE("zero learning rate leaves parameters untouched") {
    Matrix centers(2, 6);
    centers.setRandom();
    EncoderConfig cfg = small_config();
    cfg.bands = 6;
    cfg.classes = 2;
    EncoderParams params = init_params(cfg, 4);
    const Vector before = params.values;

    PretextOptions options;
    options.batches_per_epoch = 3;
    SgdConfig sgd;
    sgd.learning_rate = 0.0;
    sgd.batch_size = 4;
    sgd.epochs = 2;
    pretext_train(params, centers, options, sgd);
    CHECK(params.values == before);
}

TEST_CASE("absurd learning rates abort with the epoch index") {
    Matrix centers(3, 6);
    centers.setRandom();
    EncoderConfig cfg = small_config();
    cfg.bands = 6;
    EncoderParams params = init_params(cfg, 4);

    PretextOptions options;
    options.batches_per_epoch = 5;
    SgdConfig sgd;
    sgd.learning_rate = 1e300;
    sgd.batch_size = 8;
    sgd.epochs = 4;
    try {
        pretext_train(params, centers, options, sgd);
        FAIL("expected divergence");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    }
}

TEST_CASE("pretext training is reproducible per seed") {
    Matrix centers(3, 6);
    Rng crng(2);
    for (int i = 0; i < centers.size(); ++i) centers(i / 6, i % 6) = crng.uniform01();
    EncoderConfig cfg = small_config();
    cfg.bands = 6;

    PretextOptions options;
    options.batches_per_epoch = 4;
    SgdConfig sgd;
    sgd.learning_rate = 1e-3;
    sgd.batch_size = 8;
    sgd.epochs = 3;
    sgd.seed = 11;

    EncoderParams a = init_params(cfg, 4);
    EncoderParams b = init_params(cfg, 4);
    const std::vector<double> trace_a = pretext_train(a, centers, options, sgd);
    const std::vector<double> trace_b = pretext_train(b, centers, options, sgd);
    CHECK(trace_a == trace_b);
    CHECK(a.values == b.values);
}

TEST_CASE("labeled points group indices and count eligible classes") {
    Matrix points(6, 2);
    points.setRandom();
    const std::vector<int> labels = {0, 0, 1, 2, 2, -1};
    const LabeledPoints data(points, labels, 3);
    CHECK(data.by_class[0] == std::vector<int>{0, 1});
    CHECK(data.by_class[1] == std::vector<int>{2});
    CHECK(data.by_class[2] == std::vector<int>{3, 4});
    CHECK(data.eligible_classes() == 2);  // class 1 has a single sample
}

TEST_CASE("npair batches visit every eligible class once without mining") {
    Rng prng(64);
    Matrix points(12, 4);
    points.setRandom();
    std::vector<int> labels;
    for (int i = 0; i < 12; ++i) labels.push_back(i % 4);
    const LabeledPoints data(points, labels, 4);
    EncoderConfig cfg = small_config();
    cfg.bands = 4;
    const EncoderParams params = init_params(cfg, 3);
    MiningState mining;

    Rng rng(5);
    const NPairBatch batch = build_npair_batch(data, 4, params, false, mining, rng);
    REQUIRE(batch.classes.size() == 4);
    std::vector<int> seen = batch.classes;
    std::sort(seen.begin(), seen.end());
    CHECK(seen == std::vector<int>{0, 1, 2, 3});
    for (std::size_t i = 0; i < batch.classes.size(); ++i) {
        CHECK(batch.anchors[i] != batch.positives[i]);
        CHECK(labels[batch.anchors[i]] == batch.classes[i]);
        CHECK(labels[batch.positives[i]] == batch.classes[i]);
    }
}

TEST_CASE("two tiny classes force the only possible tuple set") {
    Matrix points(4, 3);
    points << 1, 0, 0, 0.9, 0.1, 0, 0, 1, 0, 0, 0.9, 0.1;
    const LabeledPoints data(points, {0, 0, 1, 1}, 2);
    EncoderConfig cfg = small_config();
    cfg.bands = 3;
    const EncoderParams params = init_params(cfg, 3);
    MiningState mining;
    for (std::uint64_t seed : {1, 9, 77}) {
        Rng rng(seed);
        const NPairBatch batch = build_npair_batch(data, 2, params, false, mining, rng);
        for (std::size_t i = 0; i < batch.classes.size(); ++i) {
            const int cls = batch.classes[i];
            const int lo = cls == 0 ? 0 : 2;
            CHECK(batch.anchors[i] + batch.positives[i] == lo * 2 + 1);  // {lo, lo+1} in some order
        }
    }
}

TEST_CASE("mining picks the farthest candidate positive") {
    // Class 0 has exactly 5 members, so the 4 candidates are all non-anchor
    // members and the mined positive must be the farthest in embedding space.
    Rng prng(15);
    Matrix points(7, 6);
    points.setRandom();
    const std::vector<int> labels = {0, 0, 0, 0, 0, 1, 1};
    const LabeledPoints data(points, labels, 2);
    EncoderConfig cfg = small_config();
    cfg.bands = 6;
    cfg.classes = 2;
    const EncoderParams params = init_params(cfg, 19);
    MiningState mining;

    for (std::uint64_t seed : {2, 4, 8, 16}) {
        Rng rng(seed);
        const NPairBatch batch = build_npair_batch(data, 2, params, true, mining, rng);
        for (std::size_t i = 0; i < batch.classes.size(); ++i) {
            if (batch.classes[i] != 0) continue;
            const Vector anchor_emb =
                encoder_forward(params, points.row(batch.anchors[i]).transpose());
            double best = -1.0;
            int farthest = -1;
            for (int member = 0; member < 5; ++member) {
                if (member == batch.anchors[i]) continue;
                const Vector emb = encoder_forward(params, points.row(member).transpose());
                const double d = (emb - anchor_emb).squaredNorm();
                if (d > best) {
                    best = d;
                    farthest = member;
                }
            }
            CHECK(batch.positives[i] == farthest);
        }
    }
}

TEST_CASE("npair batches require two eligible classes") {
    Matrix points(3, 2);
    points.setRandom();
    const LabeledPoints data(points, {0, 0, 1}, 2);
    EncoderConfig cfg = small_config();
    cfg.bands = 2;
    const EncoderParams params = init_params(cfg, 1);
    MiningState mining;
    Rng rng(3);
    CHECK_THROWS_AS(build_npair_batch(data, 2, params, false, mining, rng), InvalidArgument);
}

TEST_CASE("npair training pulls classes apart") {
    // Two separable groups of spectra.
    Rng rng(42);
    const int bands = 8;
    Matrix points(20, bands);
    std::vector<int> labels(20);
    for (int i = 0; i < 20; ++i) {
        const bool second = i >= 10;
        labels[i] = second ? 1 : 0;
        for (int b = 0; b < bands; ++b) {
            const double base = second ? (b >= bands / 2 ? 1.0 : 0.1) : (b < bands / 2 ? 1.0 : 0.1);
            points(i, b) = base + 0.05 * (rng.uniform01() - 0.5);
        }
    }

    EncoderConfig cfg;
    cfg.bands = bands;
    cfg.conv_channels = 4;
    cfg.kernel = 3;
    cfg.hidden = 16;
    cfg.embed = 6;
    cfg.classes = 2;
    EncoderParams params = init_params(cfg, 7);

    NPairOptions options;
    options.batches_per_epoch = 10;
    SgdConfig sgd;
    sgd.learning_rate = 1e-2;
    sgd.epochs = 30;
    sgd.seed = 5;
    const std::vector<double> trace = npair_train(params, points, labels, 2, options, sgd);
    REQUIRE(trace.size() == 30);

    Matrix emb(20, cfg.embed);
    for (int i = 0; i < 20; ++i) emb.row(i) = encoder_forward(params, points.row(i).transpose()).transpose();
    double within = 0.0, between = 0.0;
    int nw = 0, nb = 0;
    for (int i = 0; i < 20; ++i) {
        for (int j = i + 1; j < 20; ++j) {
            const double d = (emb.row(i) - emb.row(j)).norm();
            if (labels[i] == labels[j]) {
                within += d;
                ++nw;
            } else {
                between += d;
                ++nb;
            }
        }
    }
    CHECK(within / nw < between / nb);
}

TEST_CASE("npair training honors zero epochs and reproduces per seed") {
    Matrix points(8, 4);
    points.setRandom();
    const std::vector<int> labels = {0, 0, 0, 0, 1, 1, 1, 1};
    EncoderConfig cfg = small_config();
    cfg.bands = 4;
    cfg.classes = 2;

    EncoderParams frozen = init_params(cfg, 2);
    const Vector before = frozen.values;
    NPairOptions options;
    options.batches_per_epoch = 3;
    SgdConfig sgd;
    sgd.learning_rate = 1e-3;
    sgd.epochs = 0;
    CHECK(npair_train(frozen, points, labels, 2, options, sgd).empty());
    CHECK(frozen.values == before);

    sgd.epochs = 4;
    sgd.seed = 31;
    EncoderParams a = init_params(cfg, 2);
    EncoderParams b = init_params(cfg, 2);
    const std::vector<double> trace_a = npair_train(a, points, labels, 2, options, sgd);
    const std::vector<double> trace_b = npair_train(b, points, labels, 2, options, sgd);
    CHECK(trace_a == trace_b);
    CHECK(a.values == b.values);
}

TEST_CASE("checkpoints round-trip bit-exactly and reject corruption") {
    const EncoderConfig cfg = small_config();
    const EncoderParams params = init_params(cfg, 123);
    const std::string path = "ckpt_test_tmp.bin";
    save_checkpoint(params, path);
    const EncoderParams loaded = load_checkpoint(path);
    CHECK(loaded.cfg.bands == cfg.bands);
    CHECK(loaded.cfg.conv_channels == cfg.conv_channels);
    CHECK(loaded.cfg.kernel == cfg.kernel);
    CHECK(loaded.cfg.hidden == cfg.hidden);
    CHECK(loaded.cfg.embed == cfg.embed);
    CHECK(loaded.cfg.classes == cfg.classes);
    CHECK(loaded.values == params.values);

    {
        std::ofstream bad(path, std::ios::binary | std::ios::trunc);
        bad << "NOTMAGIC" << std::string(64, '\0');
    }
    CHECK_THROWS_AS(load_checkpoint(path), IoError);

    save_checkpoint(params, path);
    {
        std::ifstream in(path, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<long>(bytes.size() / 2));
    }
    CHECK_THROWS_AS(load_checkpoint(path), IoError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_checkpoint(path), IoError);
}
