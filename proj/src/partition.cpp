#include "specmatch/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "specmatch/rng.hpp"

namespace specmatch {

PartitionResult quantile_split(const ScoreMap& scores, double fraction) {
    scores.validate();
    const int n = scores.pixels();
    if (n < 2) {
        throw InvalidArgument("quantile_split: need at least 2 pixels");
    }
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw InvalidArgument("quantile_split: fraction must lie in (0,1)");
    }
    // The 1e-9 guard keeps representable boundaries (0.01 * 200) from
    // rounding up to one extra pixel.
    int take = static_cast<int>(std::ceil(fraction * n - 1e-9));
    take = std::max(1, std::min(take, n));

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores.scores[a] != scores.scores[b]) return scores.scores[a] > scores.scores[b];
        return a < b;
    });

    PartitionResult part;
    part.fraction = fraction;
    part.threshold = scores.scores[order[take - 1]];
    part.target_indices.assign(order.begin(), order.begin() + take);
    part.background_indices.assign(order.begin() + take, order.end());
    std::sort(part.target_indices.begin(), part.target_indices.end());
    std::sort(part.background_indices.begin(), part.background_indices.end());
    return part;
}

namespace {

// Nearest center; ties resolved toward the lowest center index.
int nearest_center(const Matrix& centers, const Eigen::RowVectorXd& point, double* dist2_out) {
    int best = 0;
    double best_d = (centers.row(0) - point).squaredNorm();
    for (int j = 1; j < centers.rows(); ++j) {
        const double d = (centers.row(j) - point).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    if (dist2_out) *dist2_out = best_d;
    return best;
}

Matrix kmeanspp_init(const Matrix& points, int k, Rng& rng) {
    const int m = static_cast<int>(points.rows());
    Matrix centers(k, points.cols());
    std::vector<char> chosen(m, 0);

    int first = static_cast<int>(rng.index(m));
    centers.row(0) = points.row(first);
    chosen[first] = 1;

    Vector dist2(m);
    for (int i = 0; i < m; ++i) {
        dist2[i] = (points.row(i) - centers.row(0)).squaredNorm();
    }
    for (int j = 1; j < k; ++j) {
        const double total = dist2.sum();
        int pick = -1;
        if (total > 0.0) {
            double u = rng.uniform01() * total;
            for (int i = 0; i < m; ++i) {
                u -= dist2[i];
                if (u <= 0.0) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) pick = m - 1;  // numerical tail
        }
        if (pick < 0 || chosen[pick]) {
            // All remaining mass is zero (duplicate points); take the first
            // unchosen index so initialization still yields k centers.
            for (int i = 0; i < m; ++i) {
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
            }
        }
        chosen[pick] = 1;
        centers.row(j) = points.row(pick);
        for (int i = 0; i < m; ++i) {
            dist2[i] = std::min(dist2[i], (points.row(i) - centers.row(j)).squaredNorm());
        }
    }
    return centers;
}

Clustering lloyd(const Matrix& points, Matrix centers, int max_iter, double tol,
                 std::vector<double>& trace) {
    const int m = static_cast<int>(points.rows());
    const int k = static_cast<int>(centers.rows());

    Clustering out;
    out.assignments.assign(m, 0);
    double prev_obj = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < max_iter; ++iter) {
        // Assignment step.
        double obj = 0.0;
        for (int i = 0; i < m; ++i) {
            double d2 = 0.0;
            out.assignments[i] = nearest_center(centers, points.row(i), &d2);
            obj += d2;
        }

        // Repair empty clusters by seizing the point farthest from its
        // center; the objective can only drop.
        std::vector<int> counts(k, 0);
        for (int a : out.assignments) ++counts[a];
        for (int j = 0; j < k; ++j) {
            if (counts[j] > 0) continue;
            int worst = -1;
            double worst_d = -1.0;
            for (int i = 0; i < m; ++i) {
                if (counts[out.assignments[i]] <= 1) continue;
                const double d = (points.row(i) - centers.row(out.assignments[i])).squaredNorm();
                if (d > worst_d) {
                    worst_d = d;
                    worst = i;
                }
            }
            if (worst < 0) break;  // fewer distinct points than clusters
            obj -= worst_d;
            --counts[out.assignments[worst]];
            out.assignments[worst] = j;
            ++counts[j];
            centers.row(j) = points.row(worst);
        }

        out.iterations_run = iter + 1;
        trace.push_back(obj);
        const bool converged = prev_obj - obj < tol;
        prev_obj = obj;
        out.objective = obj;
        if (converged) break;

        // Update step: centers move to their cluster means.
        Matrix sums = Matrix::Zero(k, points.cols());
        for (int i = 0; i < m; ++i) {
            sums.row(out.assignments[i]) += points.row(i);
        }
        for (int j = 0; j < k; ++j) {
            if (counts[j] > 0) centers.row(j) = sums.row(j) / counts[j];
        }
    }

    // Final assignment against the final centers so the stored objective and
    // assignments match the returned centers exactly.
    double obj = 0.0;
    for (int i = 0; i < m; ++i) {
        double d2 = 0.0;
        out.assignments[i] = nearest_center(centers, points.row(i), &d2);
        obj += d2;
    }
    out.objective = obj;
    out.centers = std::move(centers);
    return out;
}

// Means, sizes and the exact objective of an assignment.
double assignment_stats(const Matrix& points, const std::vector<int>& assignments, int k,
                        Matrix& means, std::vector<int>& counts) {
    means = Matrix::Zero(k, points.cols());
    counts.assign(k, 0);
    for (int i = 0; i < points.rows(); ++i) {
        means.row(assignments[i]) += points.row(i);
        ++counts[assignments[i]];
    }
    for (int j = 0; j < k; ++j) {
        if (counts[j] > 0) means.row(j) /= counts[j];
    }
    double obj = 0.0;
    for (int i = 0; i < points.rows(); ++i) {
        obj += (points.row(i) - means.row(assignments[i])).squaredNorm();
    }
    return obj;
}

// Pair swaps are quadratic in the point count, so they are searched only on
// small instances; single transfers are always searched.
constexpr int kSwapSearchLimit = 128;
constexpr int kMaxExchangeSteps = 128;
constexpr int kMaxPolishRounds = 8;

// One best-improvement exchange move: transfer a point to another cluster, or
// swap a pair between clusters. Converged Lloyd solutions are frequently one
// such move away from a strictly lower objective. Applies the best move when
// it beats tol, refreshes means/counts/obj exactly, and records the new
// objective; returns whether a move was applied.
bool exchange_step(const Matrix& points, std::vector<int>& assignments, int k, double tol,
                   Matrix& means, std::vector<int>& counts, double& obj,
                   std::vector<double>& trace) {
    const int m = static_cast<int>(points.rows());
    double best_delta = -std::max(tol, 0.0);
    int best_point = -1, best_cluster = -1;
    int swap_x = -1, swap_y = -1;

    for (int i = 0; i < m; ++i) {
        const int a = assignments[i];
        if (counts[a] < 2) continue;
        const double leave =
            (points.row(i) - means.row(a)).squaredNorm() * counts[a] / (counts[a] - 1.0);
        for (int j = 0; j < k; ++j) {
            if (j == a) continue;
            const double join =
                (points.row(i) - means.row(j)).squaredNorm() * counts[j] / (counts[j] + 1.0);
            if (join - leave < best_delta) {
                best_delta = join - leave;
                best_point = i;
                best_cluster = j;
                swap_x = swap_y = -1;
            }
        }
    }

    if (m <= kSwapSearchLimit) {
        for (int x = 0; x < m; ++x) {
            for (int y = x + 1; y < m; ++y) {
                const int a = assignments[x];
                const int b = assignments[y];
                if (a == b) continue;
                const Eigen::RowVectorXd diff = points.row(y) - points.row(x);
                const Eigen::RowVectorXd ma = means.row(a) + diff / counts[a];
                const Eigen::RowVectorXd mb = means.row(b) - diff / counts[b];
                const double delta = counts[a] * (means.row(a).squaredNorm() - ma.squaredNorm()) +
                                     counts[b] * (means.row(b).squaredNorm() - mb.squaredNorm());
                if (delta < best_delta) {
                    best_delta = delta;
                    swap_x = x;
                    swap_y = y;
                    best_point = best_cluster = -1;
                }
            }
        }
    }

    if (best_point < 0 && swap_x < 0) return false;

    std::vector<int> previous = assignments;
    if (best_point >= 0) {
        assignments[best_point] = best_cluster;
    } else {
        std::swap(assignments[swap_x], assignments[swap_y]);
    }
    const double updated = assignment_stats(points, assignments, k, means, counts);
    if (updated >= obj) {  // numerical guard: the move must realize its gain
        assignments = std::move(previous);
        assignment_stats(points, assignments, k, means, counts);
        return false;
    }
    obj = updated;
    trace.push_back(updated);
    return true;
}

Clustering kmeans_single(const Matrix& points, int k, std::uint64_t sub_seed,
                         const KmeansOptions& options) {
    Rng rng(sub_seed);
    std::vector<double> trace;
    Clustering run =
        lloyd(points, kmeanspp_init(points, k, rng), options.max_iter, options.tol, trace);
    for (int round = 0; round < kMaxPolishRounds; ++round) {
        Matrix means;
        std::vector<int> counts;
        double obj = assignment_stats(points, run.assignments, k, means, counts);
        bool moved = false;
        for (int step = 0; step < kMaxExchangeSteps; ++step) {
            if (!exchange_step(points, run.assignments, k, options.tol, means, counts, obj,
                               trace)) {
                break;
            }
            moved = true;
        }
        if (!moved) break;
        const int iterations = run.iterations_run;
        run = lloyd(points, means, options.max_iter, options.tol, trace);
        run.iterations_run += iterations;
    }
    run.objective_trace = std::move(trace);
    return run;
}

}  // namespace

Clustering kmeans(const Matrix& points, int k, std::uint64_t seed, const KmeansOptions& options) {
    const int m = static_cast<int>(points.rows());
    if (k < 1) throw InvalidArgument("kmeans: k must be >= 1");
    if (m < k) {
        std::ostringstream msg;
        msg << "kmeans: " << m << " points cannot form " << k << " clusters";
        throw InvalidArgument(msg.str());
    }
    if (!points.allFinite()) throw InvalidArgument("kmeans: non-finite input point");

    const int restarts = std::max(1, options.restarts);
    Clustering best;
    best.objective = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        Clustering run =
            kmeans_single(points, k, Rng::derive(seed, static_cast<std::uint64_t>(r)), options);
        if (run.objective < best.objective) best = std::move(run);
    }
    return best;
}

Subcategories subcategory_centers(const SpectralCube& cube, const PartitionResult& part,
                                  int k_target, int k_background, std::uint64_t seed,
                                  const KmeansOptions& options) {
    cube.validate();
    if (k_target < 1 || k_background < 1) {
        throw InvalidArgument("subcategory_centers: cluster counts must be >= 1");
    }
    if (static_cast<int>(part.target_indices.size()) < k_target) {
        throw InvalidArgument("subcategory_centers: pseudo target set smaller than k_target");
    }
    if (static_cast<int>(part.background_indices.size()) < k_background) {
        throw InvalidArgument("subcategory_centers: pseudo background set smaller than k_background");
    }

    const auto gather = [&](const std::vector<int>& idx) {
        Matrix rows(idx.size(), cube.bands());
        for (std::size_t i = 0; i < idx.size(); ++i) rows.row(i) = cube.data.row(idx[i]);
        return rows;
    };

    const Clustering target = kmeans(gather(part.target_indices), k_target,
                                     Rng::derive(seed, seed_stream::kKmeansTarget), options);
    const Clustering background = kmeans(gather(part.background_indices), k_background,
                                         Rng::derive(seed, seed_stream::kKmeansBackground), options);

    Subcategories out;
    out.num_target_centers = k_target;
    out.centers.resize(k_target + k_background, cube.bands());
    out.centers.topRows(k_target) = target.centers;
    out.centers.bottomRows(k_background) = background.centers;
    out.target_objective = target.objective;
    out.background_objective = background.objective;

    out.labels.assign(cube.pixels(), -1);
    for (std::size_t i = 0; i < part.target_indices.size(); ++i) {
        out.labels[part.target_indices[i]] = target.assignments[i];
    }
    for (std::size_t i = 0; i < part.background_indices.size(); ++i) {
        out.labels[part.background_indices[i]] = k_target + background.assignments[i];
    }
    return out;
}

}  // namespace specmatch
