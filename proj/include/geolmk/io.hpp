#pragma once

// File formats.
//
// Volumes: raw little-endian payload at `path`, x-fastest, with a JSON header
// in the sidecar `path + ".json"`:
//
//   {"magic": "GVOL1", "dims": [nx, ny, nz], "spacing": [sx, sy, sz],
//    "dtype": "u8" | "i32" | "f32" | "f64", "byte_order": "little",
//    "layout": "x-fastest", "attributes": {...optional...}}
//
// Landmarks: JSON array of {"id", "name", "voxel": [i, j, k], "present"}.
// Names are the canonical roster abbreviations (Me, Gn, Pg, B, Id, CdL, CdR,
// CorL, CorR).

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "geolmk/geodesic.hpp"
#include "geolmk/metrics.hpp"
#include "geolmk/netspec.hpp"
#include "geolmk/phantom.hpp"
#include "geolmk/seqlmk.hpp"
#include "geolmk/volume.hpp"

namespace geolmk::io {

using json = nlohmann::json;
using AnyVolume = std::variant<Volume<std::uint8_t>, Volume<std::int32_t>, Volume<float>, Volume<double>>;

inline constexpr const char* kVolumeMagic = "GVOL1";

struct VolumeHeader {
    Dims dims;
    Spacing spacing;
    DType dtype = DType::u8;
    json attributes = json::object();

    std::uint64_t payload_bytes() const noexcept;
};

std::filesystem::path header_path(const std::filesystem::path& payload);

// Parses and checks a header document. Throws FormatError naming the field.
VolumeHeader parse_volume_header(const std::string& text);
json volume_header_json(const VolumeHeader& h);

struct LoadedVolume {
    AnyVolume volume;
    json attributes;
};

// Throws FormatError for a bad header, a payload length mismatch or an
// unreadable file.
LoadedVolume read_volume(const std::filesystem::path& path);

template <class T>
void write_volume(const Volume<T>& v, const std::filesystem::path& path, const json& attributes = json::object());

// Reads a u8 volume and checks it is a {0,1} mask.
BinaryMask read_mask(const std::filesystem::path& path);
void write_mask(const BinaryMask& m, const std::filesystem::path& path);

// Exact dtype required; throws FormatError otherwise.
template <class T>
Volume<T> read_volume_as(const std::filesystem::path& path);

void write_geodesic_map(const GeodesicMap& g, const std::filesystem::path& path);
GeodesicMap read_geodesic_map(const std::filesystem::path& path);
void write_quantized_map(const QuantizedGeodesicMap& q, const std::filesystem::path& path);
QuantizedGeodesicMap read_quantized_map(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Landmarks

json landmarks_to_json(const LandmarkSet& lm);
// Throws FormatError on schema violations, unknown names (with a suggestion
// for recognised long forms) and duplicate ids or names.
LandmarkSet landmarks_from_json(const json& j);
void write_landmarks_json(const LandmarkSet& lm, const std::filesystem::path& path);
LandmarkSet read_landmarks_json(const std::filesystem::path& path);

// Inverse of the 3x3x3 annotation convention: every non-zero label is a
// roster id, and its landmark is the labelled voxel nearest the centroid of
// that label's voxels. Clusters larger than 3x3x3 emit a diagnostic;
// disconnected clusters and unknown ids throw ValidationError.
template <class T>
LandmarkSet read_landmarks_labeled_volume(const Volume<T>& v);

// Marks the (clipped) 3x3x3 neighbourhood of every present landmark with its
// id. Throws ValidationError when neighbourhoods overlap.
Volume<std::int32_t> write_landmarks_labeled_volume(const LandmarkSet& lm, const Dims& dims, const Spacing& spacing);

// ---------------------------------------------------------------------------
// Sequences, phantom specs, reports, ledgers

json sequence_to_json(const BoundarySequence& s);
BoundarySequence sequence_from_json(const json& j);
// Accepts a single sequence object or an array of them.
std::vector<BoundarySequence> read_sequences(const std::filesystem::path& path);
void write_sequences(std::span<const BoundarySequence> seqs, const std::filesystem::path& path);

// Every field optional; unknown keys are rejected.
PhantomSpec phantom_spec_from_json(const json& j);
json phantom_spec_to_json(const PhantomSpec& s);

json seg_scores_to_json(const SegScores& s);
json landmark_errors_to_json(const LandmarkErrors& e);
json summary_to_json(const Summary& s);

// case_id, dsc, iou, sensitivity, specificity, hd_mm, then
// <name>_mm_error and <name>_in_box for every roster landmark. Missing values
// are empty cells.
void write_report_csv(std::span<const CaseReport> cases, std::ostream& os);

json ledger_to_json(const ArchitectureLedger& l);

// Reads a whole file; throws FormatError("file", ...) when it cannot.
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace geolmk::io
