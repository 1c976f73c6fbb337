#pragma once

#include <vector>

#include "geolmk/volume.hpp"

namespace geolmk {

// Keeps the largest foreground connected component. Equal sizes resolve to
// the component with the smallest flat index. Empty in, empty out.
BinaryMask largest_component(const BinaryMask& m, Connectivity connectivity = Connectivity::full26);

// Background voxels not face-connected to the domain border become
// foreground.
BinaryMask fill_holes(const BinaryMask& m);

// Per-voxel component labels (0 = background, 1.. in order of smallest flat
// index) and the size of each component (index 0 unused).
struct ComponentLabels {
    Volume<std::int32_t> labels;
    std::vector<std::int64_t> sizes;

    std::int32_t count() const noexcept { return static_cast<std::int32_t>(sizes.size()) - 1; }
};

ComponentLabels label_components(const BinaryMask& m, Connectivity connectivity = Connectivity::full26);

}  // namespace geolmk
