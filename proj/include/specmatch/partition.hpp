#pragma once

#include <cstdint>
#include <vector>

#include "specmatch/types.hpp"

namespace specmatch {

// Pseudo target / background split of the pre-detector scores.
struct PartitionResult {
    std::vector<int> target_indices;      // |H_t| = ceil(fraction * N), sorted ascending
    std::vector<int> background_indices;  // the rest, sorted ascending
    double threshold = 0.0;               // lowest score admitted into H_t
    double fraction = 0.0;
};

// The ceil(fraction*N) highest-scoring pixels become the pseudo target set.
// Ties at the threshold are broken by lower pixel index first, so the split
// is deterministic.
PartitionResult quantile_split(const ScoreMap& scores, double fraction);

struct Clustering {
    Matrix centers;               // K x B
    std::vector<int> assignments; // per point, nearest center (ties -> lowest index)
    double objective = 0.0;       // sum of squared distances to assigned centers
    int iterations_run = 0;
    std::vector<double> objective_trace;  // winning restart, one entry per accepted step
};

struct KmeansOptions {
    int max_iter = 100;
    double tol = 1e-10;  // stop when the objective improves by less than this
    int restarts = 5;    // k-means++ restarts, best objective kept
};

// Lloyd iterations from k-means++ initialization, polished by best-improvement
// exchange moves (single-point transfers, plus pair swaps on small instances)
// that escape Lloyd-stable local minima. Empty clusters are repaired by
// seizing the point farthest from its assigned center. The objective is
// non-increasing across the whole trace; the best of `restarts` seeded runs
// is returned.
Clustering kmeans(const Matrix& points, int k, std::uint64_t seed,
                  const KmeansOptions& options = {});

// Sub-categorization of the pseudo sets: independent k-means on the target
// and background pixels. Target centers come first; labels give each pixel
// its sub-category id in [0, k_target + k_background).
struct Subcategories {
    Matrix centers;  // (k_target + k_background) x B
    int num_target_centers = 0;
    std::vector<int> labels;  // per cube pixel
    double target_objective = 0.0;
    double background_objective = 0.0;
};

Subcategories subcategory_centers(const SpectralCube& cube, const PartitionResult& part,
                                  int k_target, int k_background, std::uint64_t seed,
                                  const KmeansOptions& options = {});

}  // namespace specmatch
