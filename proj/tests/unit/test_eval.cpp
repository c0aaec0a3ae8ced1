#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "specmatch/eval.hpp"
#include "specmatch/rng.hpp"

using namespace specmatch;

namespace {

// Brute-force Mann-Whitney oracle: walk every (positive, negative) pair,
// full credit for strictly greater, half for ties. Independent of both
// library routes.
double auc_bruteforce(const ScoreMap& scores, const GroundTruth& truth) {
    double credit = 0.0;
    long pairs = 0;
    for (int i = 0; i < scores.pixels(); ++i) {
        if (truth.labels[i] != 1) continue;
        for (int j = 0; j < scores.pixels(); ++j) {
            if (truth.labels[j] != 0) continue;
            ++pairs;
            if (scores.scores[i] > scores.scores[j]) credit += 1.0;
            else if (scores.scores[i] == scores.scores[j]) credit += 0.5;
        }
    }
    return credit / static_cast<double>(pairs);
}

ScoreMap map_of(std::vector<double> values) {
    ScoreMap map;
    map.width = static_cast<int>(values.size());
    map.height = 1;
    map.scores = Eigen::Map<Vector>(values.data(), values.size());
    return map;
}

GroundTruth truth_of(std::vector<std::uint8_t> labels) {
    GroundTruth truth;
    truth.width = static_cast<int>(labels.size());
    truth.height = 1;
    truth.labels = std::move(labels);
    return truth;
}

// Random instance with deliberate ties: a slice of the scores is quantized
// to a handful of levels.
void random_instance(Rng& rng, int n, ScoreMap& scores, GroundTruth& truth) {
    scores.width = n;
    scores.height = 1;
    scores.scores.resize(n);
    truth.width = n;
    truth.height = 1;
    truth.labels.resize(n);
    for (int i = 0; i < n; ++i) {
        double s = rng.uniform01();
        if (rng.uniform01() < 0.4) s = std::round(s * 4.0) / 4.0;
        scores.scores[i] = s;
        truth.labels[i] = rng.uniform01() < 0.3 ? 1 : 0;
    }
    truth.labels[0] = 1;  // both classes must appear
    truth.labels[n - 1] = 0;
}

}  // namespace

TEST_CASE("perfect and reversed separations bracket the AUC range") {
    const ScoreMap scores = map_of({0.9, 0.8, 0.3, 0.1});
    const GroundTruth truth = truth_of({1, 1, 0, 0});
    CHECK(roc_curve(scores, truth).auc == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(auc_pairwise(scores, truth) == doctest::Approx(1.0).epsilon(1e-12));

    const GroundTruth reversed = truth_of({0, 0, 1, 1});
    CHECK(auc_pairwise(scores, reversed) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("the 3-of-4-pairs instance scores 0.75 on all three routes") {
    const ScoreMap scores = map_of({0.9, 0.4, 0.5, 0.1});
    const GroundTruth truth = truth_of({1, 1, 0, 0});
    const double oracle = auc_bruteforce(scores, truth);
    CHECK(oracle == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(roc_curve(scores, truth).auc == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(auc_pairwise(scores, truth) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("all-equal scores give half credit") {
    const ScoreMap scores = map_of({0.5, 0.5, 0.5, 0.5});
    const GroundTruth truth = truth_of({1, 0, 1, 0});
    CHECK(roc_curve(scores, truth).auc == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(auc_pairwise(scores, truth) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("trapezoid, rank and brute-force AUC agree on random tied instances") {
    Rng rng(404);
    for (int trial = 0; trial < 30; ++trial) {
        ScoreMap scores;
        GroundTruth truth;
        random_instance(rng, 50 + static_cast<int>(rng.index(1500)), scores, truth);
        const double oracle = auc_bruteforce(scores, truth);
        CHECK(std::abs(roc_curve(scores, truth).auc - oracle) < 1e-9);
        CHECK(std::abs(auc_pairwise(scores, truth) - oracle) < 1e-9);
    }
}

TEST_CASE("AUC is invariant under strictly increasing transforms") {
    Rng rng(77);
    ScoreMap scores;
    GroundTruth truth;
    random_instance(rng, 800, scores, truth);
    const double base = auc_pairwise(scores, truth);

    ScoreMap affine = scores;
    affine.scores = scores.scores * 3.5;
    affine.scores.array() += 11.0;
    CHECK(std::abs(auc_pairwise(affine, truth) - base) < 1e-12);
    CHECK(std::abs(roc_curve(affine, truth).auc - roc_curve(scores, truth).auc) < 1e-12);

    ScoreMap cubic = scores;
    for (int i = 0; i < cubic.pixels(); ++i) {
        const double s = scores.scores[i];
        cubic.scores[i] = s * s * s + s;  // strictly increasing
    }
    CHECK(std::abs(auc_pairwise(cubic, truth) - base) < 1e-12);
}

TEST_CASE("curve is monotone with pinned endpoints") {
    Rng rng(15);
    ScoreMap scores;
    GroundTruth truth;
    random_instance(rng, 300, scores, truth);
    const RocCurve curve = roc_curve(scores, truth);
    REQUIRE(curve.points.size() >= 2);
    CHECK(curve.points.front().pfa == 0.0);
    CHECK(curve.points.front().pd == 0.0);
    CHECK(curve.points.back().pfa == 1.0);
    CHECK(curve.points.back().pd == 1.0);
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        CHECK(curve.points[i].pfa >= curve.points[i - 1].pfa);
        CHECK(curve.points[i].pd >= curve.points[i - 1].pd);
        CHECK(curve.points[i].pfa <= 1.0);
        CHECK(curve.points[i].pd <= 1.0);
    }
    CHECK(curve.auc >= 0.0);
    CHECK(curve.auc <= 1.0);
}

TEST_CASE("degenerate truth and size mismatches are rejected") {
    const ScoreMap scores = map_of({0.1, 0.2, 0.3});
    CHECK_THROWS_AS(roc_curve(scores, truth_of({1, 1, 1})), InvalidArgument);
    CHECK_THROWS_AS(auc_pairwise(scores, truth_of({0, 0, 0})), InvalidArgument);
    CHECK_THROWS_AS(roc_curve(scores, truth_of({1, 0})), InvalidArgument);
}

TEST_CASE("roc csv holds one pfa,pd row per point") {
    const ScoreMap scores = map_of({0.9, 0.1});
    const GroundTruth truth = truth_of({1, 0});
    const RocCurve curve = roc_curve(scores, truth);
    const std::string path = "roc_test_tmp.csv";
    write_roc_csv(curve, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "pfa,pd");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == curve.points.size());
    in.close();
    std::remove(path.c_str());
}

TEST_CASE("auc table lists one row per detector") {
    const std::string table = auc_table({"cem", "learned"}, {1.0, 0.9876543});
    CHECK(table.find("cem") != std::string::npos);
    CHECK(table.find("learned") != std::string::npos);
    CHECK(table.find("1.000000") != std::string::npos);
    CHECK(table.find("0.987654") != std::string::npos);
    CHECK_THROWS_AS(auc_table({"one"}, {0.5, 0.6}), InvalidArgument);
}
