#include "specmatch/mixgen.hpp"

#include <cmath>

#include "specmatch/error.hpp"

namespace specmatch {

Vector mix_weights_from_logits(const Vector& z, double temperature) {
    if (z.size() < 1) throw InvalidArgument("mix weights: empty logit vector");
    if (!(temperature > 0.0)) throw InvalidArgument("mix weights: temperature must be positive");
    Vector scaled = z / temperature;
    const double m = scaled.maxCoeff();
    Vector w = (scaled.array() - m).exp();
    w /= w.sum();
    return w;
}

MixedSample draw_mixed_sample(const Matrix& centers, const MixGenOptions& options, Rng& rng) {
    const int k = static_cast<int>(centers.rows());
    if (k < 2) throw InvalidArgument("mixgen: mixing needs at least 2 centers");
    if (options.noise_sigma < 0.0) throw InvalidArgument("mixgen: noise_sigma must be >= 0");

    Vector z(k);
    for (int i = 0; i < k; ++i) z[i] = rng.uniform01();

    MixedSample s;
    s.weights = mix_weights_from_logits(z, options.temperature);
    s.weights.maxCoeff(&s.label);  // Eigen resolves ties toward the lowest index
    s.spectrum = centers.transpose() * s.weights;
    if (options.noise_sigma > 0.0) {
        for (int b = 0; b < s.spectrum.size(); ++b) {
            s.spectrum[b] += rng.normal(0.0, options.noise_sigma);
        }
    }
    return s;
}

std::vector<MixedSample> draw_mixed_batch(const Matrix& centers, int count,
                                          const MixGenOptions& options, Rng& rng) {
    if (count < 0) throw InvalidArgument("mixgen: negative batch count");
    std::vector<MixedSample> batch;
    batch.reserve(count);
    for (int i = 0; i < count; ++i) batch.push_back(draw_mixed_sample(centers, options, rng));
    return batch;
}

}  // namespace specmatch
