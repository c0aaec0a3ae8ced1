#pragma once

#include <string>
#include <utility>
#include <vector>

#include "specmatch/types.hpp"

namespace specmatch {

// Accepts whitespace/comma-separated text or a raw 8-bit raster (sniffed by
// content); any nonzero value maps to label 1.
GroundTruth load_mask(const std::string& path, int width, int height);

void write_mask(const GroundTruth& truth, const std::string& path);  // text form

enum class ScoreMapFormat { Csv, Pgm16 };

// csv: one row per image row at full double precision. pgm16: binary P5,
// maxval 65535, scores affinely rescaled; a constant map writes all zeros.
void write_score_map(const ScoreMap& map, const std::string& path, ScoreMapFormat format);

ScoreMap load_score_csv(const std::string& path);

// A priors file is either "col row" coordinate pairs (one per line) or a CSV
// of spectra (one per line); integer-only two-token lines read as coordinates.
struct PriorsFile {
    bool is_coords = false;
    std::vector<std::pair<int, int>> coords;  // (col, row)
    Matrix spectra;
};

PriorsFile load_priors_file(const std::string& path);

// Resolves a priors file against a cube: coordinates index cube pixels,
// spectra must match the cube's band count.
TargetPriorSet resolve_priors(const PriorsFile& file, const SpectralCube& cube);

void write_priors_csv(const TargetPriorSet& priors, const std::string& path);

// "epoch,loss" rows.
void write_loss_trace(const std::vector<double>& trace, const std::string& path);

}  // namespace specmatch
