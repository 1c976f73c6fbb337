#include <doctest.h>

#include <map>

#include "geolmk/metrics.hpp"
#include "geolmk/phantom.hpp"
#include "geolmk/postprocess.hpp"
#include "oracles.hpp"

using namespace geolmk;

namespace {

void fill_box(BinaryMask& m, Voxel lo, Voxel hi, bool value = true) {
    for (std::int64_t k = lo.k; k <= hi.k; ++k)
        for (std::int64_t j = lo.j; j <= hi.j; ++j)
            for (std::int64_t i = lo.i; i <= hi.i; ++i) m.set(Voxel{i, j, k}, value);
}

bool subset(const BinaryMask& a, const BinaryMask& b) {
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(a.size()); ++i)
        if (a[i] && !b[i]) return false;
    return true;
}

}  // namespace

TEST_CASE("largest_component keeps the biggest piece") {
    BinaryMask m({20, 20, 20}, {});
    fill_box(m, {1, 1, 1}, {5, 5, 4});   // 100 voxels
    fill_box(m, {12, 12, 12}, {16, 12, 12});  // 5 voxels
    const auto out = largest_component(m);
    CHECK(out.count() == 100);
    CHECK(out.at({1, 1, 1}));
    CHECK_FALSE(out.at({12, 12, 12}));
    CHECK(largest_component(out) == out);
    CHECK(largest_component(BinaryMask({3, 3, 3}, {})).empty());
}

TEST_CASE("ties go to the component with the smallest flat index") {
    BinaryMask m({10, 3, 3}, {});
    m.set(Voxel{7, 1, 1}, true);
    m.set(Voxel{2, 1, 1}, true);
    const auto out = largest_component(m);
    CHECK(out.at({2, 1, 1}));
    CHECK_FALSE(out.at({7, 1, 1}));
}

TEST_CASE("connectivity matters for diagonal neighbours") {
    BinaryMask m({4, 4, 4}, {});
    m.set(Voxel{0, 0, 0}, true);
    m.set(Voxel{1, 1, 1}, true);
    m.set(Voxel{3, 3, 3}, true);
    CHECK(largest_component(m, Connectivity::full26).count() == 2);
    CHECK(largest_component(m, Connectivity::face6).count() == 1);
}

TEST_CASE("component labels agree with a propagation oracle") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const auto m = oracle::random_mask({9, 8, 7}, {}, 0.25, seed);
        const auto labels = label_components(m);
        const auto ref = oracle::naive_components(m);
        std::map<int, std::int32_t> seen;
        for (std::size_t i = 0; i < m.size(); ++i) {
            const auto l = labels.labels.data()[i];
            if (!m[static_cast<std::int64_t>(i)]) {
                CHECK(l == 0);
                continue;
            }
            auto [it, fresh] = seen.emplace(ref[i], l);
            CHECK(it->second == l);
        }
        CHECK(static_cast<std::size_t>(labels.count()) == seen.size());
    }
}

TEST_CASE("fill_holes") {
    BinaryMask shell({9, 9, 9}, {});
    fill_box(shell, {1, 1, 1}, {7, 7, 7});
    fill_box(shell, {2, 2, 2}, {6, 6, 6}, false);
    const auto filled = fill_holes(shell);
    CHECK(filled.count() == 343);
    CHECK(fill_holes(filled) == filled);

    BinaryMask tunnel({9, 9, 9}, {});
    fill_box(tunnel, {1, 1, 1}, {7, 7, 7});
    fill_box(tunnel, {4, 4, 1}, {4, 4, 7}, false);
    CHECK(fill_holes(tunnel) == tunnel);

    const auto m = oracle::random_mask({10, 10, 10}, {}, 0.6, 4);
    const auto f = fill_holes(m);
    CHECK(subset(m, f));
    CHECK(fill_holes(f) == f);
    const auto l = largest_component(m);
    CHECK(subset(l, m));
}

TEST_CASE("two-part mandible keeps the larger part") {
    PhantomSpec spec;
    spec.split_into_two_parts = true;
    const auto p = generate_phantom(spec);
    const auto comps = label_components(p.mask);
    REQUIRE(comps.count() == 2);
    const auto big = std::max(comps.sizes[1], comps.sizes[2]);
    const auto out = largest_component(p.mask);
    CHECK(out.count() == big);
    CHECK(out.test(p.landmarks.present(LandmarkName::CdL)->voxel));
}

TEST_CASE("post-processing improves DSC on noisy phantoms") {
    const auto clean = generate_phantom({}).mask;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        PhantomSpec spec;
        spec.seed = seed;
        spec.cavity_count = 6;
        spec.noise_blob_count = 6;
        const auto noisy = generate_phantom(spec).mask;
        const auto fixed = fill_holes(largest_component(noisy));
        CHECK(seg_scores(fixed, clean).dsc > seg_scores(noisy, clean).dsc);
        CHECK(fixed == clean);
    }
}
