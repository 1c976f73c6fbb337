#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "geolmk/metrics.hpp"
#include "oracles.hpp"

using namespace geolmk;

namespace {

BinaryMask box(const Dims& d, Voxel lo, Voxel hi, const Spacing& s = {}) {
    BinaryMask m(d, s);
    for (std::int64_t k = lo.k; k <= hi.k; ++k)
        for (std::int64_t j = lo.j; j <= hi.j; ++j)
            for (std::int64_t i = lo.i; i <= hi.i; ++i) m.set(Voxel{i, j, k}, true);
    return m;
}

}  // namespace

TEST_CASE("identical masks score perfectly") {
    const auto m = box({6, 6, 6}, {1, 1, 1}, {3, 4, 2});
    const auto s = seg_scores(m, m);
    CHECK(s.dsc == 1.0);
    CHECK(s.iou == 1.0);
    CHECK(s.sensitivity == 1.0);
    CHECK(s.specificity == 1.0);
    CHECK(s.hd_mm == 0.0);
}

TEST_CASE("half overlap") {
    const auto p = box({3, 1, 1}, {0, 0, 0}, {1, 0, 0});
    const auto g = box({3, 1, 1}, {1, 0, 0}, {2, 0, 0});
    const auto s = seg_scores(p, g);
    CHECK(s.dsc == 0.5);
    CHECK(s.iou == doctest::Approx(1.0 / 3.0));
    CHECK(s.tp == 1);
    CHECK(s.fp == 1);
    CHECK(s.fn == 1);
    CHECK(s.tn == 0);
}

TEST_CASE("shifted cubes are 2 mm apart") {
    const auto a = box({8, 4, 4}, {1, 1, 1}, {1, 1, 1});
    const auto b = box({8, 4, 4}, {3, 1, 1}, {3, 1, 1});
    CHECK(seg_scores(a, b).hd_mm == 2.0);
    const auto c = box({12, 8, 8}, {1, 1, 1}, {4, 4, 4});
    const auto d = box({12, 8, 8}, {3, 1, 1}, {6, 4, 4});
    CHECK(hausdorff_distance(c, d) == 2.0);
    CHECK(hausdorff_distance(d, c) == 2.0);
}

TEST_CASE("empty masks") {
    std::vector<std::string> msgs;
    ScopedDiagnosticSink sink([&](const std::string& m) { msgs.push_back(m); });
    const BinaryMask e({4, 4, 4}, {});
    const auto s = seg_scores(e, e);
    CHECK(s.dsc == 1.0);
    CHECK(s.iou == 1.0);
    CHECK(s.sensitivity == 1.0);
    CHECK(s.hd_mm == 0.0);
    CHECK_FALSE(msgs.empty());
    const auto one = box({4, 4, 4}, {1, 1, 1}, {1, 1, 1});
    CHECK(seg_scores(one, e).hd_mm == std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(seg_scores(one, BinaryMask({4, 4, 5}, {})), ValidationError);
}

TEST_CASE("dsc and iou identity on random pairs") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto a = oracle::random_mask({7, 6, 5}, {}, 0.3 + 0.01 * static_cast<double>(seed), seed);
        const auto b = oracle::random_mask({7, 6, 5}, {}, 0.5, seed + 1000);
        const auto s = seg_scores(a, b);
        CHECK(std::abs(s.dsc - 2 * s.iou / (1 + s.iou)) <= 1e-12);
        CHECK(seg_scores(b, a).hd_mm == s.hd_mm);
    }
}

TEST_CASE("counts match a truth table on 4^3 masks") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto p = oracle::random_mask({4, 4, 4}, {}, 0.5, seed);
        const auto g = oracle::random_mask({4, 4, 4}, {}, 0.5, seed + 77);
        const auto c = oracle::truth_table(p, g);
        const auto s = seg_scores(p, g);
        CHECK(s.tp == c.tp);
        CHECK(s.fp == c.fp);
        CHECK(s.fn == c.fn);
        CHECK(s.tn == c.tn);
        CHECK(s.sensitivity == doctest::Approx(static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn)));
        CHECK(s.specificity == doctest::Approx(static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp)));
        // Inverting the prediction swaps hits and misses.
        const auto inv = seg_scores(mask_complement(p), g);
        CHECK(inv.sensitivity == doctest::Approx(1.0 - s.sensitivity));
        CHECK(inv.specificity == doctest::Approx(1.0 - s.specificity));
    }
}

TEST_CASE("boundary Hausdorff equals the all-pairs voxel oracle") {
    const Spacing sp{0.754, 0.754, 0.377};
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto a = oracle::random_mask({8, 8, 8}, sp, 0.3, seed);
        const auto b = oracle::random_mask({8, 8, 8}, sp, 0.3, seed + 500);
        const double ref = oracle::hausdorff_all_pairs(oracle::boundary_voxels(a), oracle::boundary_voxels(b), sp);
        CHECK(std::abs(hausdorff_distance(a, b) - ref) <= 1e-9);
    }
    // On solid objects the shell distance equals the full voxel-set distance.
    const auto c = box({14, 14, 14}, {2, 2, 2}, {8, 9, 7}, sp);
    const auto d = box({14, 14, 14}, {4, 3, 5}, {11, 10, 12}, sp);
    std::vector<oracle::Voxel> fc, fd;
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(c.size()); ++i) {
        if (c[i]) fc.push_back(voxel_at(i, c.dims()));
        if (d[i]) fd.push_back(voxel_at(i, d.dims()));
    }
    CHECK(std::abs(hausdorff_distance(c, d) - oracle::hausdorff_all_pairs(fc, fd, sp)) <= 1e-9);
}

TEST_CASE("percentile Hausdorff is not larger than the maximum") {
    const auto a = oracle::random_mask({10, 10, 10}, {}, 0.3, 1);
    const auto b = oracle::random_mask({10, 10, 10}, {}, 0.3, 2);
    CHECK(hausdorff_distance(a, b, 95.0) <= hausdorff_distance(a, b));
}

TEST_CASE("landmark errors") {
    LandmarkSet gt, pred;
    gt.add(LandmarkName::Me, {10, 10, 10});
    gt.add(LandmarkName::Gn, {5, 5, 5});
    gt.add(LandmarkName::CdL, {1, 1, 1});
    pred.add(LandmarkName::Me, {11, 11, 11});
    pred.add(LandmarkName::Gn, {7, 5, 5});
    pred.add(LandmarkName::CorL, {1, 1, 1});
    const Spacing sp{0.754, 0.754, 0.377};
    const auto e = landmark_errors(pred, gt, sp);
    const auto* me = e.find(LandmarkName::Me);
    REQUIRE(me);
    CHECK(std::abs(me->pixel_error - std::sqrt(3.0)) <= 1e-12);
    CHECK(std::abs(me->mm_error - std::sqrt(0.754 * 0.754 * 2 + 0.377 * 0.377)) <= 1e-9);
    CHECK(me->in_box);
    CHECK_FALSE(e.find(LandmarkName::Gn)->in_box);
    CHECK(e.find(LandmarkName::Gn)->axis_max == 2);
    CHECK(e.false_positives == std::vector<LandmarkName>{LandmarkName::CorL});
    CHECK(e.false_negatives == std::vector<LandmarkName>{LandmarkName::CdL});

    const auto self = landmark_errors(gt, gt, sp);
    for (const auto& x : self.entries) {
        CHECK(x.mm_error == 0.0);
        CHECK(x.pixel_error == 0.0);
        CHECK(x.in_box);
    }
    LandmarkSet other;
    other.add(LandmarkName::CorR, {0, 0, 0});
    CHECK_THROWS_AS(landmark_errors(other, gt, sp), ValidationError);
}

TEST_CASE("summaries") {
    const double a[] = {0, 0, 1.17};
    const auto s = summarize(a);
    CHECK(s.median == 0.0);
    CHECK(s.mean == doctest::Approx(0.39));
    const double b[] = {4, 1, 3, 2};
    CHECK(summarize(b).mean == 2.5);
    CHECK(summarize(b).median == 2.0);
    CHECK_THROWS_AS(summarize(std::span<const double>{}), ValidationError);

    const auto m = box({5, 5, 5}, {1, 1, 1}, {2, 2, 2});
    LandmarkSet lm;
    lm.add(LandmarkName::Me, {1, 1, 1});
    CaseReport c{"one", seg_scores(m, m), landmark_errors(lm, lm, {})};
    const auto sum = aggregate(std::span<const CaseReport>(&c, 1));
    CHECK(sum.cases == 1);
    CHECK(sum.dsc->mean == 1.0);
    REQUIRE(sum.landmarks.size() == 1);
    CHECK(sum.landmarks[0].detection_rate == 1.0);
    CHECK_THROWS_AS(aggregate(std::span<const CaseReport>{}), ValidationError);
}
