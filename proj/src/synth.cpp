#include "specmatch/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "specmatch/error.hpp"
#include "specmatch/rng.hpp"

namespace specmatch {

namespace {

constexpr int kPriorCount = 10;

void shape_confuser(Matrix& em, const SceneSpec& spec) {
    const int c = (spec.target_index + 1) % spec.endmembers;
    const int bands = spec.bands;

    const Vector target = em.row(spec.target_index).transpose();
    Vector tc = target.array() - target.mean();
    const double tnorm = tc.norm();
    if (tnorm < 1e-12) return;  // flat target curve; correlation undefined
    tc /= tnorm;

    Vector wc = em.row(c).transpose();
    wc.array() -= wc.mean();
    wc -= wc.dot(tc) * tc;
    double wnorm = wc.norm();
    if (wnorm < 1e-12) {
        Vector alt(bands);
        for (int b = 0; b < bands; ++b) alt[b] = (b % 2 == 0) ? 1.0 : -1.0;
        alt.array() -= alt.mean();
        alt -= alt.dot(tc) * tc;
        wc = alt;
        wnorm = wc.norm();
        if (wnorm < 1e-12) return;
    }
    wc /= wnorm;

    // Unit-norm, zero-mean direction with exact Pearson correlation rho to
    // the target; any positive affine placement preserves the correlation.
    const double rho = spec.confuser_correlation;
    const Vector g = rho * tc + std::sqrt(1.0 - rho * rho) * wc;
    const double extent = std::max(std::abs(g.minCoeff()), std::abs(g.maxCoeff()));
    if (extent <= 0.0) return;
    em.row(c) = (0.55 + (0.4 / extent) * g.array()).transpose();
}

Matrix make_endmembers(const SceneSpec& spec) {
    Rng rng(Rng::derive(spec.endmember_seed, seed_stream::kEndmember));
    Matrix em(spec.endmembers, spec.bands);
    Vector curve(spec.bands);
    for (int e = 0; e < spec.endmembers; ++e) {
        double level = rng.uniform(0.3, 0.9);
        for (int b = 0; b < spec.bands; ++b) {
            level += rng.normal(0.0, 0.07);
            curve[b] = level;
        }
        curve = curve.cwiseMax(0.05);
        for (int pass = 0; pass < 2; ++pass) {
            Vector smooth(spec.bands);
            for (int b = 0; b < spec.bands; ++b) {
                const int lo = std::max(0, b - 2);
                const int hi = std::min(spec.bands - 1, b + 2);
                double acc = 0.0;
                for (int j = lo; j <= hi; ++j) acc += curve[j];
                smooth[b] = acc / (hi - lo + 1);
            }
            curve = smooth;
        }
        em.row(e) = (curve / curve.maxCoeff()).transpose();
    }
    shape_confuser(em, spec);
    return em;
}

// Convex mixture over a sparse subset (1-3) of the non-target endmembers,
// Dirichlet(1) weights. Sparse support gives the background cluster
// structure the sub-categorization stage is meant to find.
Vector draw_background(const Matrix& em, int target_index, Rng& rng) {
    std::vector<int> ids;
    ids.reserve(em.rows() - 1);
    for (int e = 0; e < em.rows(); ++e) {
        if (e != target_index) ids.push_back(e);
    }
    const int pool = static_cast<int>(ids.size());
    const int active = 1 + static_cast<int>(rng.index(std::min(3, pool)));
    for (int j = 0; j < active; ++j) {
        const int swap_at = j + static_cast<int>(rng.index(ids.size() - j));
        std::swap(ids[j], ids[swap_at]);
    }

    std::vector<double> w(active);
    double total = 0.0;
    for (int j = 0; j < active; ++j) {
        w[j] = -std::log(1.0 - rng.uniform01());
        total += w[j];
    }
    Vector spectrum = Vector::Zero(em.cols());
    for (int j = 0; j < active; ++j) {
        const double share = total > 0.0 ? w[j] / total : 1.0 / active;
        spectrum += share * em.row(ids[j]).transpose();
    }
    return spectrum;
}

}  // namespace

void SceneSpec::validate() const {
    if (width < 1 || height < 1) throw InvalidArgument("scene: dimensions must be >= 1");
    if (bands < 2) throw InvalidArgument("scene: need at least 2 bands");
    if (endmembers < 2) throw InvalidArgument("scene: need at least 2 endmembers");
    if (target_index < 0 || target_index >= endmembers) {
        throw InvalidArgument("scene: target index out of range");
    }
    if (target_pixels < 1) throw InvalidArgument("scene: need at least one target pixel");
    if (static_cast<long>(target_pixels) * 10 >= static_cast<long>(width) * height) {
        throw InvalidArgument("scene: target pixels must stay under a tenth of the scene");
    }
    if (!(abundance_lo > 0.0 && abundance_lo <= abundance_hi && abundance_hi <= 1.0)) {
        throw InvalidArgument("scene: abundance range must lie within (0,1]");
    }
    if (!(confuser_correlation >= 0.0 && confuser_correlation < 1.0)) {
        throw InvalidArgument("scene: confuser correlation must lie in [0,1)");
    }
    if (noise_sigma < 0.0) throw InvalidArgument("scene: noise sigma must be >= 0");
}

SceneData generate_scene(const SceneSpec& spec) {
    spec.validate();

    SceneData out;
    out.endmembers = make_endmembers(spec);
    const int n = spec.width * spec.height;
    const int bands = spec.bands;

    Rng rng(Rng::derive(spec.seed, seed_stream::kScene));

    std::vector<int> locs(n);
    std::iota(locs.begin(), locs.end(), 0);
    for (int j = 0; j < spec.target_pixels; ++j) {
        const int swap_at = j + static_cast<int>(rng.index(locs.size() - j));
        std::swap(locs[j], locs[swap_at]);
    }
    std::vector<char> is_target(n, 0);
    for (int j = 0; j < spec.target_pixels; ++j) is_target[locs[j]] = 1;

    out.cube.width = spec.width;
    out.cube.height = spec.height;
    out.cube.data.resize(n, bands);
    const Vector target = out.endmembers.row(spec.target_index).transpose();
    for (int i = 0; i < n; ++i) {
        const Vector bg = draw_background(out.endmembers, spec.target_index, rng);
        if (is_target[i]) {
            const double a = rng.uniform(spec.abundance_lo, spec.abundance_hi);
            out.cube.data.row(i) = (a * target + (1.0 - a) * bg).transpose();
        } else {
            out.cube.data.row(i) = bg.transpose();
        }
    }

    // Noise scale is relative: sigma as a fraction of the mean |clean| value.
    const double sigma = spec.noise_sigma * out.cube.data.cwiseAbs().mean();
    if (sigma > 0.0) {
        for (int i = 0; i < n; ++i) {
            for (int b = 0; b < bands; ++b) out.cube.data(i, b) += rng.normal(0.0, sigma);
        }
    }

    out.truth.width = spec.width;
    out.truth.height = spec.height;
    out.truth.labels.assign(n, 0);
    for (int i = 0; i < n; ++i) out.truth.labels[i] = is_target[i] ? 1 : 0;

    out.priors.spectra.resize(kPriorCount, bands);
    for (int t = 0; t < kPriorCount; ++t) {
        out.priors.spectra.row(t) = target.transpose();
        if (sigma > 0.0) {
            for (int b = 0; b < bands; ++b) out.priors.spectra(t, b) += rng.normal(0.0, sigma);
        }
    }
    return out;
}

}  // namespace specmatch
