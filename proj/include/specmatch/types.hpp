#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

#include "specmatch/error.hpp"

namespace specmatch {

// One row per sample, row-major storage throughout the library.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// A single pixel spectrum (length = number of bands).
using Spectrum = Eigen::VectorXd;

// Hyperspectral image: N = width*height pixels by B bands, one pixel per
// row, pixels in row-major spatial order (index = y*width + x). Immutable
// after construction by convention; nothing in the library mutates a cube
// it did not create.
struct SpectralCube {
    int width = 0;
    int height = 0;
    Matrix data;  // N x B

    int pixels() const { return width * height; }
    int bands() const { return static_cast<int>(data.cols()); }
    Spectrum pixel(int i) const { return data.row(i); }

    // Throws InvalidArgument on dimension mismatch or non-finite values.
    void validate() const;
};

// The prior target spectra h_t1..h_tNt given to the detector.
struct TargetPriorSet {
    Matrix spectra;  // N_t x B, one prior per row

    int count() const { return static_cast<int>(spectra.rows()); }
    Spectrum prior(int i) const { return spectra.row(i); }
    void validate() const;
};

// Per-pixel detection scores. Orientation is fixed: larger = more
// target-like, for every detector in this library.
struct ScoreMap {
    int width = 0;
    int height = 0;
    Vector scores;  // length N, row-major spatial order

    int pixels() const { return width * height; }
    void validate() const;
};

// Binary truth mask: 0 = background, 1 = target.
struct GroundTruth {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> labels;  // length N

    int pixels() const { return width * height; }
    int positives() const;
    int negatives() const;
};

enum class NormalizeMode { None, PerBandMinMax };

// Affine per-band rescaling fitted on one cube: out = (v - offset) * scale.
// Applying the same scaling to prior spectra keeps them commensurate with
// the normalized cube.
struct BandScaling {
    Vector offset;
    Vector scale;

    Vector apply(const Vector& spectrum) const;
};

// Fits the scaling on the cube. PerBandMinMax maps each band to [0,1];
// constant bands get scale 0 so they map to 0 instead of dividing by zero.
BandScaling compute_band_scaling(const SpectralCube& cube, NormalizeMode mode);

SpectralCube apply_band_scaling(const SpectralCube& cube, const BandScaling& scaling);

SpectralCube normalize_cube(const SpectralCube& cube, NormalizeMode mode);

// Runs fn(begin, end) over [0, n) split into `threads` contiguous ranges.
// With threads <= 1 this is a plain call; callers must only use it for
// per-element work whose result is independent of the partitioning.
void parallel_for(int n, int threads, const std::function<void(int, int)>& fn);

}  // namespace specmatch
