#include <cmath>

#include "doctest.h"
#include "specmatch/classical.hpp"
#include "specmatch/eval.hpp"
#include "specmatch/synth.hpp"

using namespace specmatch;

namespace {

SceneSpec small_spec() {
    SceneSpec spec;
    spec.width = 16;
    spec.height = 16;
    spec.bands = 24;
    spec.endmembers = 4;
    spec.target_pixels = 8;
    spec.seed = 5;
    spec.endmember_seed = 5;
    return spec;
}

// Textbook Pearson correlation, written against the raw definition.
double pearson(const Vector& a, const Vector& b) {
    const double ma = a.mean(), mb = b.mean();
    const Vector ca = a.array() - ma, cb = b.array() - mb;
    return ca.dot(cb) / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
}

}  // namespace

TEST_CASE("zero noise and unit abundance implant the pure target spectrum") {
    SceneSpec spec = small_spec();
    spec.noise_sigma = 0.0;
    spec.abundance_lo = 1.0;
    spec.abundance_hi = 1.0;
    const SceneData scene = generate_scene(spec);

    const Vector target = scene.endmembers.row(spec.target_index).transpose();
    int positives = 0;
    for (int i = 0; i < scene.cube.pixels(); ++i) {
        if (scene.truth.labels[i] != 1) continue;
        ++positives;
        CHECK((scene.cube.data.row(i).transpose() - target).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK(positives == spec.target_pixels);
}

TEST_CASE("ground truth counts the implanted targets") {
    const SceneData scene = generate_scene(small_spec());
    CHECK(scene.truth.positives() == 8);
    CHECK(scene.truth.negatives() == 16 * 16 - 8);
}

TEST_CASE("scene generation is bit-reproducible per seed") {
    const SceneData a = generate_scene(small_spec());
    const SceneData b = generate_scene(small_spec());
    CHECK(a.cube.data == b.cube.data);
    CHECK(a.truth.labels == b.truth.labels);
    CHECK(a.priors.spectra == b.priors.spectra);
    CHECK(a.endmembers == b.endmembers);

    SceneSpec other = small_spec();
    other.seed = 6;
    const SceneData c = generate_scene(other);
    CHECK(a.cube.data != c.cube.data);
}

TEST_CASE("noise-free backgrounds stay inside the non-target hull") {
    SceneSpec spec = small_spec();
    spec.noise_sigma = 0.0;
    const SceneData scene = generate_scene(spec);
    // Non-target endmembers: every row except the target's.
    for (int i = 0; i < scene.cube.pixels(); ++i) {
        if (scene.truth.labels[i] != 0) continue;
        for (int b = 0; b < spec.bands; ++b) {
            double lo = 1e300, hi = -1e300;
            for (int e = 0; e < spec.endmembers; ++e) {
                if (e == spec.target_index) continue;
                lo = std::min(lo, scene.endmembers(e, b));
                hi = std::max(hi, scene.endmembers(e, b));
            }
            CHECK(scene.cube.data(i, b) >= lo - 1e-12);
            CHECK(scene.cube.data(i, b) <= hi + 1e-12);
        }
    }
}

TEST_CASE("cem solves the clean unit-abundance scene perfectly") {
    SceneSpec spec = small_spec();
    spec.noise_sigma = 0.0;
    spec.abundance_lo = 1.0;
    spec.abundance_hi = 1.0;
    const SceneData scene = generate_scene(spec);
    const ScoreMap scores = cem_ensemble(scene.cube, scene.priors, default_ridge(scene.cube));
    CHECK(roc_curve(scores, scene.truth).auc == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("the confuser endmember hits the requested correlation") {
    for (double rho : {0.8, 0.95, 0.99}) {
        SceneSpec spec = small_spec();
        spec.confuser_correlation = rho;
        const SceneData scene = generate_scene(spec);
        const int confuser = (spec.target_index + 1) % spec.endmembers;
        const Vector t = scene.endmembers.row(spec.target_index).transpose();
        const Vector c = scene.endmembers.row(confuser).transpose();
        CHECK(pearson(t, c) == doctest::Approx(rho).epsilon(1e-9));
        CHECK(c.minCoeff() > 0.0);
    }
}

TEST_CASE("endmembers are positive and peak-normalized") {
    const SceneData scene = generate_scene(small_spec());
    for (int e = 0; e < scene.endmembers.rows(); ++e) {
        CHECK(scene.endmembers.row(e).minCoeff() > 0.0);
        CHECK(scene.endmembers.row(e).maxCoeff() <= 1.0 + 1e-12);
    }
}

TEST_CASE("priors are noisy copies of the target spectrum") {
    SceneSpec spec = small_spec();
    spec.noise_sigma = 0.02;
    const SceneData scene = generate_scene(spec);
    REQUIRE(scene.priors.count() == 10);
    const Vector target = scene.endmembers.row(spec.target_index).transpose();
    for (int t = 0; t < scene.priors.count(); ++t) {
        const Vector p = scene.priors.spectra.row(t).transpose();
        CHECK((p - target).cwiseAbs().maxCoeff() > 0.0);          // noise applied
        CHECK((p - target).cwiseAbs().maxCoeff() < 0.5);          // still close
        CHECK(pearson(p, target) > 0.9);
    }
}

TEST_CASE("invalid scene specs are rejected") {
    SceneSpec spec = small_spec();
    spec.target_pixels = spec.width * spec.height;  // over the N/10 cap
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);

    spec = small_spec();
    spec.abundance_lo = 0.0;
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);

    spec = small_spec();
    spec.abundance_hi = 1.5;
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);

    spec = small_spec();
    spec.noise_sigma = -0.1;
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);

    spec = small_spec();
    spec.endmembers = 1;
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);

    spec = small_spec();
    spec.confuser_correlation = 1.5;
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);

    spec = small_spec();
    spec.target_pixels = 0;
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);
}
