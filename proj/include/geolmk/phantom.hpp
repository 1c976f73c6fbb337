#pragma once

// Synthetic mandible-like masks with ground-truth landmarks.
//
// The body is a horseshoe arch in the axial plane (chin anterior, opening
// posterior) swept over a vertical extent, with two rami rising at the
// posterior ends. Each ramus carries a coronoid bump (anterior) and a
// condyle bump (posterior). The chin has an anterior profile with a
// B-point concavity and a pogonion bulge, so the five mid-sagittal landmarks
// sit at distinct heights on the anterior boundary.
//
// Geometry parameters are voxel counts. Leaving one at 0 picks a value
// proportional to the volume size; the defaults fit a 96^3 grid.

#include <cstdint>
#include <utility>

#include "geolmk/volume.hpp"

namespace geolmk {

struct PhantomSpec {
    Dims dims{96, 96, 96};
    Spacing spacing{1.0, 1.0, 1.0};
    std::uint64_t seed = 1;

    double arch_radius = 0;     // centreline radius of the arch, in-plane voxels
    double thickness = 0;       // arch and ramus thickness, in-plane voxels
    double body_height = 0;     // vertical extent of the body, z voxels
    double ramus_height = 0;    // ramus top above the body floor, z voxels
    double condyle_radius = 0;  // z voxels; in-plane radius scales with x/y
    double coronoid_radius = 0;

    bool missing_left_condyle = false;
    bool split_into_two_parts = false;
    int cavity_count = 0;
    int noise_blob_count = 0;

    // Spec with every auto (0) geometry field resolved for `dims`.
    PhantomSpec resolved() const;
};

struct Phantom {
    BinaryMask mask;
    LandmarkSet landmarks;
};

// Deterministic for a given spec. Throws ValidationError when the dims are
// too small for the requested geometry or when the requested cavities or
// noise blobs cannot be placed.
Phantom generate_phantom(const PhantomSpec& spec);

}  // namespace geolmk
