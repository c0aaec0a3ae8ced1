#include "specmatch/eval.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "specmatch/error.hpp"

namespace specmatch {

namespace {

void check_inputs(const ScoreMap& scores, const GroundTruth& truth) {
    scores.validate();
    if (scores.width != truth.width || scores.height != truth.height) {
        throw InvalidArgument("eval: score map and ground truth dimensions differ");
    }
    if (truth.labels.size() != static_cast<std::size_t>(scores.pixels())) {
        throw InvalidArgument("eval: ground truth label count mismatch");
    }
    if (truth.positives() == 0 || truth.negatives() == 0) {
        throw InvalidArgument("eval: ground truth must contain both classes");
    }
}

}  // namespace

RocCurve roc_curve(const ScoreMap& scores, const GroundTruth& truth) {
    check_inputs(scores, truth);
    const int n = scores.pixels();
    const double npos = truth.positives();
    const double nneg = truth.negatives();

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return scores.scores[a] > scores.scores[b]; });

    RocCurve curve;
    curve.points.push_back({0.0, 0.0});
    long tp = 0;
    long fp = 0;
    int i = 0;
    while (i < n) {
        const double threshold = scores.scores[order[i]];
        // All scores tied at this threshold cross together.
        while (i < n && scores.scores[order[i]] == threshold) {
            if (truth.labels[order[i]]) {
                ++tp;
            } else {
                ++fp;
            }
            ++i;
        }
        curve.points.push_back({fp / nneg, tp / npos});
    }
    if (curve.points.back().pfa != 1.0 || curve.points.back().pd != 1.0) {
        curve.points.push_back({1.0, 1.0});
    }

    double auc = 0.0;
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
        const RocPoint& a = curve.points[k - 1];
        const RocPoint& b = curve.points[k];
        auc += (b.pfa - a.pfa) * (a.pd + b.pd) * 0.5;
    }
    curve.auc = auc;
    return curve;
}

double auc_pairwise(const ScoreMap& scores, const GroundTruth& truth) {
    check_inputs(scores, truth);
    const int n = scores.pixels();

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return scores.scores[a] < scores.scores[b]; });

    // 1-based average ranks; tied scores share the mean of their rank block.
    std::vector<double> rank(n);
    int i = 0;
    while (i < n) {
        int j = i;
        while (j < n && scores.scores[order[j]] == scores.scores[order[i]]) ++j;
        const double mean_rank = 0.5 * ((i + 1) + j);
        for (int k = i; k < j; ++k) rank[order[k]] = mean_rank;
        i = j;
    }

    const double npos = truth.positives();
    const double nneg = truth.negatives();
    double rank_sum = 0.0;
    for (int k = 0; k < n; ++k) {
        if (truth.labels[k]) rank_sum += rank[k];
    }
    const double u = rank_sum - npos * (npos + 1.0) * 0.5;
    return u / (npos * nneg);
}

void write_roc_csv(const RocCurve& curve, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("roc csv: cannot open " + path + " for writing");
    os << "pfa,pd\n";
    os << std::setprecision(17);
    for (const RocPoint& p : curve.points) {
        os << p.pfa << ',' << p.pd << '\n';
    }
    os.flush();
    if (!os) throw IoError("roc csv: write failed for " + path);
}

std::string auc_table(const std::vector<std::string>& names, const std::vector<double>& aucs) {
    if (names.size() != aucs.size()) throw InvalidArgument("auc table: name/value count mismatch");
    std::size_t width = 8;
    for (const std::string& name : names) width = std::max(width, name.size());

    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(width) + 2) << "detector" << "auc\n";
    os << std::setprecision(6) << std::fixed;
    for (std::size_t i = 0; i < names.size(); ++i) {
        os << std::left << std::setw(static_cast<int>(width) + 2) << names[i] << aucs[i] << '\n';
    }
    return os.str();
}

}  // namespace specmatch
