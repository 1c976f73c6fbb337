#pragma once

// Exact Euclidean distance transforms of binary masks.
//
// The transform is separable: three 1D passes (x, then y, then z), each
// computing the lower envelope of parabolas w * (q - p)^2 + f(p) over the
// squared distances from the previous pass, where w is the squared voxel
// spacing along that axis. Each pass is linear in the number of voxels, and
// the result is exact (no chamfer approximation).

#include "geolmk/volume.hpp"

namespace geolmk {

// Millimetre distances. Unsigned fields hold +inf where the target set is
// empty; signed fields are >= 0 on the foreground and < 0 on the background.
using DistanceField = Volume<double>;

// Squared millimetre distance from every voxel to the nearest voxel with
// targets(v) = 1. +inf everywhere when no target exists. With unit spacing
// every finite value is an exact integer.
DistanceField squared_distance_to(const BinaryMask& targets, int threads = 1);

// Distance from every voxel to the nearest background voxel. Background
// voxels are 0. When the mask has no background every value is +inf and a
// diagnostic is emitted.
DistanceField ltdt(const BinaryMask& m, int threads = 1);

// ltdt(m) on the foreground, -(distance to nearest foreground voxel) on the
// background. Empty foreground yields -inf everywhere, empty background +inf
// everywhere; both emit a diagnostic.
DistanceField sltdt(const BinaryMask& m, int threads = 1);

}  // namespace geolmk
