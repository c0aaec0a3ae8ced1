#pragma once

#include <string>
#include <vector>

#include "specmatch/types.hpp"

namespace specmatch {

struct RocPoint {
    double pfa = 0.0;  // false-alarm rate
    double pd = 0.0;   // detection probability
};

struct RocCurve {
    std::vector<RocPoint> points;  // sorted by pfa, includes (0,0) and (1,1)
    double auc = 0.0;
};

// Threshold sweep over all distinct score values (score >= threshold detects);
// tied scores share a step. AUC by the trapezoidal rule.
RocCurve roc_curve(const ScoreMap& scores, const GroundTruth& truth);

// Mann-Whitney statistic: fraction of (positive, negative) pairs ordered
// correctly, half credit for ties. Computed via average ranks in O(n log n);
// independent of roc_curve.
double auc_pairwise(const ScoreMap& scores, const GroundTruth& truth);

// One "pfa,pd" row per operating point.
void write_roc_csv(const RocCurve& curve, const std::string& path);

// Plain-text comparison table, one row per detector.
std::string auc_table(const std::vector<std::string>& names, const std::vector<double>& aucs);

}  // namespace specmatch
