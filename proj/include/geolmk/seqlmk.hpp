#pragma once

// Closely-spaced landmark encoding.
//
// The sagittal slice through Menton is cropped around its foreground, reduced
// to a one-voxel-thick boundary, and rescaled to a 64 x 64 image. Each image
// row y carries the anterior-most boundary column x(y) and a binary label
// that is 1 where a closely-spaced landmark sits. This is the exact
// input/output contract of the row-wise sequence classifier.
//
// Image rows run superior to inferior and columns run anterior to posterior.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "geolmk/volume.hpp"

namespace geolmk {

inline constexpr int kSeqRows = 64;
inline constexpr int kSeqCols = 64;
inline constexpr std::int16_t kEmptyRow = -1;

struct BoundarySequence {
    std::array<std::int16_t, kSeqRows> profile{};  // column per row, kEmptyRow if none
    std::array<std::uint8_t, kSeqRows> labels{};   // 1 = landmark row
    // Scaled boundary image, row-major kSeqRows x kSeqCols, values {0,1}.
    std::vector<std::uint8_t> image;

    // Sagittal index x of the source slice; -1 for synthesized sequences.
    std::int64_t source_slice = -1;
    // Inclusive crop window in original voxel coordinates.
    std::int64_t crop_y0 = 0, crop_y1 = 0, crop_z0 = 0, crop_z1 = 0;
    // Scaled pixels per source voxel along rows (z) and columns (y).
    double row_scale = 1.0;
    double col_scale = 1.0;
    AnatomicalFrame frame{};

    int flagged() const noexcept;
    // labels(y) = 1 implies a non-empty profile row, at most 5 labels,
    // columns inside [0, 64). Throws ValidationError otherwise.
    void validate() const;

    bool operator==(const BoundarySequence&) const = default;
};

// Throws ValidationError when Menton is absent, the slice is empty, a
// landmark falls outside the crop or on an empty row, or two landmarks share
// a row after rescaling.
BoundarySequence extract_boundary_sequence(const BinaryMask& m, const LandmarkSet& lm,
                                           const AnatomicalFrame& frame = {});

struct SequenceLandmark {
    LandmarkName name;
    int row = 0;
    int col = 0;
    Voxel voxel{};  // mapped back through the crop and scale
};

// Flagged rows top to bottom take the names Id, B, Pg, Gn, Me. With fewer
// than five flags Me anchors the bottom row and names fill upward.
std::vector<SequenceLandmark> decode_sequence(const BoundarySequence& s);

// Same, as a LandmarkSet with absent entries for the unassigned names.
LandmarkSet decode_sequence_landmarks(const BoundarySequence& s);

// ---------------------------------------------------------------------------
// PCA shape augmentation

// Feature layout: 64 profile columns followed by the 5 landmark rows.
inline constexpr int kShapeFeatures = kSeqRows + 5;

struct ShapeModel {
    Eigen::VectorXd mean;        // kShapeFeatures
    Eigen::MatrixXd components;  // kShapeFeatures x m, orthonormal columns
    Eigen::VectorXd sigma;       // per-component standard deviation
    // Rows empty in the majority of training sequences.
    std::array<bool, kSeqRows> empty_rows{};
    BoundarySequence meta;  // crop/frame metadata copied to synthesized outputs

    bool degenerate() const noexcept { return components.cols() == 0; }
};

// Empty rows are carried as the nearest non-empty row's column.
Eigen::VectorXd shape_features(const BoundarySequence& s);

// Needs at least 3 sequences with exactly 5 labels each.
ShapeModel build_shape_model(std::span<const BoundarySequence> training);

Eigen::VectorXd project(const ShapeModel& model, const BoundarySequence& s);

// Rounds to the grid, clamps columns to [0, 64), re-empties the model's empty
// rows, and re-derives labels from the strictly increasing landmark rows.
BoundarySequence reconstruct(const ShapeModel& model, const Eigen::VectorXd& coefficients);

// Coefficient i uniform in [-sigma_cap * sigma_i, +sigma_cap * sigma_i].
std::vector<Eigen::VectorXd> sample_coefficients(const ShapeModel& model, int count, double sigma_cap,
                                                 std::uint64_t seed);

// `count` synthesized sequences; deterministic for a given seed. Identical
// training inputs produce jittered copies and a diagnostic.
std::vector<BoundarySequence> pca_augment(std::span<const BoundarySequence> training, int count, double sigma_cap,
                                          std::uint64_t seed);

}  // namespace geolmk
