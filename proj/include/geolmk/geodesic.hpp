#pragma once

// Geodesic landmark maps on a segmented object.
//
// A map holds, for every foreground voxel, the length of the shortest path to
// the source landmark that stays on the foreground, with edges between
// neighbouring voxels weighted by their millimetre distance. Background and
// unreachable voxels are +inf. Several maps combine by a per-voxel minimum;
// the fused map is quantized to classes 0..20 for the landmark network and
// decoded back to sparsely-spaced landmarks by its minima.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geolmk/volume.hpp"

namespace geolmk {

inline constexpr const char* kFusedSource = "fused";

struct GeodesicMap {
    Volume<double> distances;
    // Landmark name for a single-source map, kFusedSource after fusion.
    std::string source;
};

struct GeodesicOptions {
    Connectivity connectivity = Connectivity::full26;
    // Off-mask landmarks snap to the nearest foreground voxel within this
    // many millimetres.
    double snap_limit_mm = 10.0;
};

struct SnapReport {
    Voxel requested;
    Voxel snapped;
    double distance_mm = 0.0;
};

struct GeodesicResult {
    GeodesicMap map;
    Voxel source_voxel;
    std::optional<SnapReport> snap;
};

// Single-source Dijkstra over the foreground voxels of `m`. `label` names the
// landmark in errors and in map.source. Throws ValidationError for an empty
// foreground or a snap beyond the limit, DomainError for an out-of-domain
// landmark.
GeodesicResult geodesic_map(const BinaryMask& m, const Voxel& landmark, const GeodesicOptions& opts = {},
                            const std::string& label = "landmark");

// One map per requested landmark, computed concurrently on up to `threads`
// workers. Results follow the order of `names`; every name must be present.
std::vector<GeodesicResult> geodesic_maps(const BinaryMask& m, const LandmarkSet& landmarks,
                                          std::span<const LandmarkName> names, const GeodesicOptions& opts = {},
                                          int threads = 1);

// Per-voxel minimum over the inputs. Throws ValidationError on an empty list
// or mismatched grids.
GeodesicMap fuse_maps(std::span<const GeodesicMap> maps);

inline constexpr std::uint8_t kMaxClass = 20;
inline constexpr std::uint8_t kBackgroundClass = 255;

struct QuantizedGeodesicMap {
    Volume<std::uint8_t> classes;
    double bin_width = 1.0;  // mm per class
};

// (largest finite value) / 20, so the top class is reached. Falls back to 1 mm
// when the map has no positive finite value.
double auto_bin_width(const GeodesicMap& g);

// class = min(floor(value / bin_width), 20) on the foreground. Without a mask
// every +inf voxel is taken as background (class 255); with one, background
// voxels are 255 and unreachable foreground voxels are 20.
QuantizedGeodesicMap quantize(const GeodesicMap& g, double bin_width);
QuantizedGeodesicMap quantize(const GeodesicMap& g, double bin_width, const BinaryMask& domain);

struct DecodeOptions {
    // Must match the connectivity the map was built with.
    Connectivity connectivity = Connectivity::full26;
    AnatomicalFrame frame{};
};

// Recovers sparsely-spaced landmarks from a fused map.
//
// Candidates are the minimum-class clusters (class 0, falling back to the
// lowest class present). A class-0 cluster is the geodesic ball of radius
// bin_width around its landmark, so the candidate is refined to the voxel
// whose own ball best reproduces the cluster. Identities come from the
// candidate's region: inferior (Me) versus superior, and within the superior
// part anterior (Cor) / posterior (Cd) and left / right. Regions without a
// candidate come back with present = false.
//
// Throws ValidationError when `expected` holds a closely-spaced name, when a
// region receives two candidates, when a candidate lands in a region whose
// landmark is not expected, or when there are more clusters than names.
LandmarkSet decode_landmarks(const QuantizedGeodesicMap& q, const BinaryMask& m,
                             std::span<const LandmarkName> expected, const DecodeOptions& opts = {});

// Same for an unquantized map; candidates are its local minima.
LandmarkSet decode_landmarks(const GeodesicMap& g, const BinaryMask& m, std::span<const LandmarkName> expected,
                             const DecodeOptions& opts = {});

// Region name for a voxel under the split used by decode_landmarks.
LandmarkName sparse_region(const BinaryMask& m, const Voxel& v, const AnatomicalFrame& frame = {});

}  // namespace geolmk
