#include "specmatch/types.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace specmatch {

void SpectralCube::validate() const {
    if (width < 1 || height < 1) {
        throw InvalidArgument("SpectralCube: width and height must be >= 1");
    }
    if (data.rows() != static_cast<Eigen::Index>(pixels())) {
        throw InvalidArgument("SpectralCube: data rows != width*height");
    }
    if (data.cols() < 1) {
        throw InvalidArgument("SpectralCube: at least one band required");
    }
    if (!data.allFinite()) {
        throw InvalidArgument("SpectralCube: non-finite value in cube data");
    }
}

void TargetPriorSet::validate() const {
    if (spectra.rows() < 1) {
        throw InvalidArgument("TargetPriorSet: at least one prior required");
    }
    if (!spectra.allFinite()) {
        throw InvalidArgument("TargetPriorSet: non-finite value in prior spectra");
    }
}

void ScoreMap::validate() const {
    if (width < 1 || height < 1 || scores.size() != static_cast<Eigen::Index>(pixels())) {
        throw InvalidArgument("ScoreMap: score length != width*height");
    }
    if (!scores.allFinite()) {
        throw InvalidArgument("ScoreMap: non-finite score");
    }
}

int GroundTruth::positives() const {
    int count = 0;
    for (auto v : labels) count += (v != 0);
    return count;
}

int GroundTruth::negatives() const {
    return static_cast<int>(labels.size()) - positives();
}

Vector BandScaling::apply(const Vector& spectrum) const {
    if (spectrum.size() != offset.size()) {
        throw InvalidArgument("BandScaling: spectrum length does not match scaling");
    }
    return (spectrum - offset).cwiseProduct(scale);
}

BandScaling compute_band_scaling(const SpectralCube& cube, NormalizeMode mode) {
    cube.validate();
    const int bands = cube.bands();
    BandScaling scaling;
    scaling.offset = Vector::Zero(bands);
    scaling.scale = Vector::Ones(bands);
    if (mode == NormalizeMode::None) {
        return scaling;
    }
    for (int b = 0; b < bands; ++b) {
        const double lo = cube.data.col(b).minCoeff();
        const double hi = cube.data.col(b).maxCoeff();
        scaling.offset[b] = lo;
        const double range = hi - lo;
        scaling.scale[b] = range > 0.0 ? 1.0 / range : 0.0;
    }
    return scaling;
}

SpectralCube apply_band_scaling(const SpectralCube& cube, const BandScaling& scaling) {
    if (scaling.offset.size() != cube.bands()) {
        throw InvalidArgument("BandScaling: band count does not match cube");
    }
    SpectralCube out;
    out.width = cube.width;
    out.height = cube.height;
    out.data = (cube.data.rowwise() - scaling.offset.transpose()).array().rowwise() *
               scaling.scale.transpose().array();
    return out;
}

SpectralCube normalize_cube(const SpectralCube& cube, NormalizeMode mode) {
    if (mode == NormalizeMode::None) {
        cube.validate();
        return cube;
    }
    return apply_band_scaling(cube, compute_band_scaling(cube, mode));
}

void parallel_for(int n, int threads, const std::function<void(int, int)>& fn) {
    if (n <= 0) return;
    const int workers = std::max(1, std::min(threads, n));
    if (workers == 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const int chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int begin = w * chunk;
        const int end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(fn, begin, end);
    }
    for (auto& t : pool) t.join();
}

}  // namespace specmatch
