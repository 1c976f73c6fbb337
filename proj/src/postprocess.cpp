#include "geolmk/postprocess.hpp"

#include <vector>

namespace geolmk {

namespace {

// Flood fill from `seed` over voxels accepted by `inside`, tagging each with
// `label` in `labels`. Returns the number of voxels tagged.
template <class Inside>
std::int64_t flood(const Dims& d, std::span<const Voxel> offsets, std::int64_t seed, std::int32_t label,
                   std::span<std::int32_t> labels, Inside&& inside, std::vector<std::int64_t>& stack) {
    std::int64_t n = 0;
    stack.assign(1, seed);
    labels[static_cast<std::size_t>(seed)] = label;
    while (!stack.empty()) {
        const std::int64_t u = stack.back();
        stack.pop_back();
        ++n;
        const std::int64_t ui = u % d.nx;
        const std::int64_t rest = u / d.nx;
        const std::int64_t uj = rest % d.ny;
        const std::int64_t uk = rest / d.ny;
        for (const auto& o : offsets) {
            const Voxel w{ui + o.i, uj + o.j, uk + o.k};
            if (!in_bounds(w, d)) continue;
            const std::int64_t wi = flat(w, d);
            if (labels[static_cast<std::size_t>(wi)] == 0 && inside(wi)) {
                labels[static_cast<std::size_t>(wi)] = label;
                stack.push_back(wi);
            }
        }
    }
    return n;
}

}  // namespace

ComponentLabels label_components(const BinaryMask& m, Connectivity connectivity) {
    ComponentLabels out{Volume<std::int32_t>(m.dims(), m.spacing(), 0), {0}};
    auto labels = out.labels.data();
    const auto offsets = neighbor_offsets(connectivity);
    std::vector<std::int64_t> stack;
    const auto n = static_cast<std::int64_t>(m.size());
    for (std::int64_t i = 0; i < n; ++i) {
        if (!m[i] || labels[static_cast<std::size_t>(i)] != 0) continue;
        const auto label = static_cast<std::int32_t>(out.sizes.size());
        out.sizes.push_back(flood(m.dims(), offsets, i, label, labels, [&](std::int64_t v) { return m[v]; }, stack));
    }
    return out;
}

BinaryMask largest_component(const BinaryMask& m, Connectivity connectivity) {
    const auto comps = label_components(m, connectivity);
    BinaryMask out(m.dims(), m.spacing());
    std::int32_t best = 0;
    for (std::int32_t c = 1; c <= comps.count(); ++c)
        if (best == 0 || comps.sizes[static_cast<std::size_t>(c)] > comps.sizes[static_cast<std::size_t>(best)]) best = c;
    if (best == 0) return out;
    const auto labels = comps.labels.data();
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == best) out.set(static_cast<std::int64_t>(i), true);
    return out;
}

BinaryMask fill_holes(const BinaryMask& m) {
    const Dims d = m.dims();
    Volume<std::int32_t> reach(d, m.spacing(), 0);
    auto labels = reach.data();
    const auto offsets = neighbor_offsets(Connectivity::face6);
    std::vector<std::int64_t> stack;
    auto background = [&](std::int64_t v) { return !m[v]; };
    for (std::int64_t k = 0; k < d.nz; ++k)
        for (std::int64_t j = 0; j < d.ny; ++j)
            for (std::int64_t i = 0; i < d.nx; ++i) {
                const bool border = i == 0 || j == 0 || k == 0 || i == d.nx - 1 || j == d.ny - 1 || k == d.nz - 1;
                if (!border) continue;
                const std::int64_t idx = flat({i, j, k}, d);
                if (!m[idx] && labels[static_cast<std::size_t>(idx)] == 0)
                    flood(d, offsets, idx, 1, labels, background, stack);
            }
    BinaryMask out(d, m.spacing());
    for (std::size_t i = 0; i < labels.size(); ++i) out.set(static_cast<std::int64_t>(i), labels[i] == 0);
    return out;
}

}  // namespace geolmk
