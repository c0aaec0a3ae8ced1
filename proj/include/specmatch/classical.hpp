#pragma once

#include "specmatch/types.hpp"

namespace specmatch {

// Scene autocorrelation R = (1/N) sum_i h_i h_i^T, plus the diagonal ridge
// that was folded into it.
struct Autocorrelation {
    Eigen::MatrixXd r;  // B x B, symmetric, ridge already added
    double ridge = 0.0;
};

// Ridge used when the caller does not pick one: 1e-6 * trace(R)/B. Real
// cubes have strongly correlated bands and produce near-singular R.
double default_ridge(const SpectralCube& cube);

Autocorrelation autocorrelation(const SpectralCube& cube, double ridge);

// Solves R x = rhs through a Cholesky factorization with one step of
// iterative refinement; never forms R^-1. Throws NumericError when the
// factorization fails (suggesting a ridge) or the solve is unusable.
Vector spd_solve(const Autocorrelation& r, const Vector& rhs);

// The linear filter w = R^-1 d / (d^T R^-1 d), which satisfies w.d = 1.
struct CemFilter {
    Vector w;
    Spectrum d;
};

CemFilter cem_filter(const Autocorrelation& r, const Spectrum& d);

// Score of pixel h is h^T R^-1 d / (d^T R^-1 d); a pixel equal to the prior
// scores exactly 1.
ScoreMap cem_score(const SpectralCube& cube, const Spectrum& d, double ridge, int threads = 1);
ScoreMap cem_score(const SpectralCube& cube, const Autocorrelation& r, const Spectrum& d,
                   int threads = 1);

// Arithmetic mean of the per-prior CEM maps.
ScoreMap cem_ensemble(const SpectralCube& cube, const TargetPriorSet& priors, double ridge,
                      int threads = 1);

// Adaptive coherence estimator baseline,
//   (h^T R^-1 d)^2 / ((d^T R^-1 d)(h^T R^-1 h)),
// clamped to [0,1]; zero-norm pixels score 0. This is the standard cited
// form of the detector, not a formula reproduced from any one source.
ScoreMap ace_score(const SpectralCube& cube, const Spectrum& d, double ridge, int threads = 1);
ScoreMap ace_score(const SpectralCube& cube, const Autocorrelation& r, const Spectrum& d,
                   int threads = 1);

// Arithmetic mean of the per-prior ACE maps, mirroring cem_ensemble.
ScoreMap ace_ensemble(const SpectralCube& cube, const TargetPriorSet& priors, double ridge,
                      int threads = 1);

}  // namespace specmatch
