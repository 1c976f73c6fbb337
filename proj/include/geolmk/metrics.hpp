#pragma once

// Segmentation overlap scores, Hausdorff distance and landmark errors.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geolmk/volume.hpp"

namespace geolmk {

struct SegScores {
    double dsc = 0.0;
    double iou = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double hd_mm = 0.0;

    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

struct SegOptions {
    // 100 is the true maximum. Lower values take the nearest-rank percentile
    // of each directed distance set.
    double hd_percentile = 100.0;
};

// Ratios with a zero denominator are 1 (two empty masks agree perfectly);
// a diagnostic is emitted for each. HD is +inf when exactly one mask is
// empty. Throws ValidationError on mismatched grids.
SegScores seg_scores(const BinaryMask& pred, const BinaryMask& gt, const SegOptions& opts = {});

// Foreground voxels with a background face neighbour.
BinaryMask boundary_of(const BinaryMask& m);

// Symmetric Hausdorff distance in mm between the boundary voxel sets.
double hausdorff_distance(const BinaryMask& a, const BinaryMask& b, double percentile = 100.0);

struct LandmarkError {
    LandmarkName name = LandmarkName::Me;
    Voxel delta{};              // pred - gt, voxels
    double pixel_error = 0.0;   // Euclidean, voxel units
    double mm_error = 0.0;      // Euclidean, with spacing
    std::int64_t axis_max = 0;  // largest per-axis |delta|, voxels
    bool in_box = false;        // every per-axis |delta| <= 1
};

struct LandmarkErrors {
    std::vector<LandmarkError> entries;          // landmarks present on both sides
    std::vector<LandmarkName> false_positives;   // present only in pred
    std::vector<LandmarkName> false_negatives;   // present only in gt

    const LandmarkError* find(LandmarkName n) const noexcept;
};

// Throws ValidationError when pred and gt share no landmark name.
LandmarkErrors landmark_errors(const LandmarkSet& pred, const LandmarkSet& gt, const Spacing& spacing);

struct Stat {
    double mean = 0.0;
    double median = 0.0;  // lower middle for even counts
    std::size_t count = 0;
};

// Throws ValidationError on an empty input.
Stat summarize(std::span<const double> values);

struct CaseReport {
    std::string case_id;
    std::optional<SegScores> seg;
    std::optional<LandmarkErrors> landmarks;
};

struct LandmarkSummary {
    LandmarkName name = LandmarkName::Me;
    Stat mm_error;
    Stat pixel_error;
    double detection_rate = 0.0;  // fraction of cases in the 3x3x3 box
};

struct Summary {
    std::size_t cases = 0;
    std::optional<Stat> dsc, iou, sensitivity, specificity, hd_mm;
    std::vector<LandmarkSummary> landmarks;  // roster order, measured landmarks only
};

// Throws ValidationError on an empty list.
Summary aggregate(std::span<const CaseReport> cases);

}  // namespace geolmk
