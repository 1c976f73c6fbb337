#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "geolmk/geodesic.hpp"
#include "geolmk/phantom.hpp"
#include "oracles.hpp"

using namespace geolmk;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

BinaryMask rod(std::int64_t n) {
    BinaryMask m({1, 1, n}, {});
    for (std::int64_t k = 0; k < n; ++k) m.set(Voxel{0, 0, k}, true);
    return m;
}

// Two 10-voxel arms along y at x = 0 and x = 3, joined by a base row at y = 0.
BinaryMask u_shape() {
    BinaryMask m({4, 10, 1}, {});
    for (std::int64_t j = 0; j < 10; ++j) {
        m.set(Voxel{0, j, 0}, true);
        m.set(Voxel{3, j, 0}, true);
    }
    for (std::int64_t i = 0; i < 4; ++i) m.set(Voxel{i, 0, 0}, true);
    return m;
}

// Random mask with at most `limit` foreground voxels.
BinaryMask sparse_random(std::uint64_t seed, std::int64_t limit) {
    std::mt19937_64 rng(seed);
    const Dims d{9, 8, 7};
    const Spacing sp = (seed % 2) ? Spacing{1, 1, 1} : Spacing{0.754, 0.754, 0.377};
    for (;;) {
        auto m = oracle::random_mask(d, sp, 0.55, rng());
        if (m.count() <= limit && m.count() > 0) return m;
    }
}

std::vector<GeodesicMap> phantom_maps(const Phantom& p) {
    std::vector<LandmarkName> names;
    for (auto n : kSparseLandmarks)
        if (p.landmarks.present(n)) names.push_back(n);
    std::vector<GeodesicMap> out;
    for (auto& r : geodesic_maps(p.mask, p.landmarks, names, {}, 2)) out.push_back(std::move(r.map));
    return out;
}

}  // namespace

TEST_CASE("geodesic distance along a rod") {
    const auto m = rod(20);
    GeodesicOptions o;
    o.connectivity = Connectivity::face6;
    const auto r = geodesic_map(m, {0, 0, 0}, o, "Me");
    for (std::int64_t k = 0; k < 20; ++k) CHECK(r.map.distances.at({0, 0, k}) == static_cast<double>(k));
    CHECK(r.map.source == "Me");
    CHECK_FALSE(r.snap);
}

TEST_CASE("background is infinite and the U bend is followed") {
    const auto m = u_shape();
    for (auto c : {Connectivity::face6, Connectivity::full26}) {
        GeodesicOptions o;
        o.connectivity = c;
        const auto r = geodesic_map(m, {0, 9, 0}, o);
        CHECK(r.map.distances.at({1, 5, 0}) == kInf);
        const auto ref = oracle::bellman_ford(m, {0, 9, 0}, c);
        for (std::size_t i = 0; i < ref.size(); ++i) {
            const double a = r.map.distances.data()[i];
            CHECK((std::isinf(ref[i]) ? a == kInf : std::abs(a - ref[i]) <= 1e-9));
        }
        CHECK(r.map.distances.at({3, 9, 0}) > 15.0);
    }
}

TEST_CASE("Dijkstra equals Bellman-Ford on random masks") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto m = sparse_random(seed, 500);
        std::int64_t src = 0;
        while (!m[src]) ++src;
        for (auto c : {Connectivity::face6, Connectivity::full26}) {
            GeodesicOptions o;
            o.connectivity = c;
            const auto g = geodesic_map(m, voxel_at(src, m.dims()), o);
            const auto ref = oracle::bellman_ford(m, voxel_at(src, m.dims()), c);
            for (std::size_t i = 0; i < ref.size(); ++i) {
                const double a = g.map.distances.data()[i];
                if (std::isinf(ref[i])) {
                    REQUIRE(a == kInf);
                } else {
                    REQUIRE(std::abs(a - ref[i]) <= 1e-9);
                }
            }
        }
    }
}

TEST_CASE("geodesic is at least Euclidean and symmetric between sources") {
    const auto m = sparse_random(5, 500);
    std::vector<Voxel> fg;
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(m.size()); ++i)
        if (m[i]) fg.push_back(voxel_at(i, m.dims()));
    const Voxel a = fg.front(), b = fg.back();
    const auto ga = geodesic_map(m, a).map.distances;
    const auto gb = geodesic_map(m, b).map.distances;
    CHECK(ga.at(b) == doctest::Approx(gb.at(a)));
    for (const auto& v : fg) {
        if (std::isfinite(ga.at(v))) CHECK(ga.at(v) >= euclidean_dist(a, v, m.spacing()) - 1e-12);
    }
}

TEST_CASE("off-mask landmarks snap within the limit") {
    BinaryMask m({10, 10, 10}, {});
    for (std::int64_t k = 0; k < 10; ++k) m.set(Voxel{5, 5, k}, true);
    std::vector<std::string> msgs;
    ScopedDiagnosticSink sink([&](const std::string& s) { msgs.push_back(s); });
    const auto r = geodesic_map(m, {3, 5, 4}, {}, "Gn");
    REQUIRE(r.snap);
    CHECK(r.snap->snapped == Voxel{5, 5, 4});
    CHECK(r.snap->distance_mm == doctest::Approx(2.0));
    CHECK(r.source_voxel == Voxel{5, 5, 4});
    CHECK(r.map.distances.at({5, 5, 4}) == 0.0);

    GeodesicOptions tight;
    tight.snap_limit_mm = 1.5;
    CHECK_THROWS_WITH_AS(geodesic_map(m, {3, 5, 4}, tight, "Gn"), doctest::Contains("Gn"), ValidationError);
    CHECK_THROWS_AS(geodesic_map(m, {10, 5, 4}), DomainError);
    CHECK_THROWS_AS(geodesic_map(BinaryMask({3, 3, 3}, {}), {1, 1, 1}), ValidationError);
}

TEST_CASE("fusion") {
    const auto m = rod(11);
    const auto a = geodesic_map(m, {0, 0, 0}).map;
    const auto b = geodesic_map(m, {0, 0, 10}).map;
    const std::vector<GeodesicMap> one{a};
    CHECK(fuse_maps(one).distances == a.distances);
    CHECK(fuse_maps(one).source == kFusedSource);
    const std::vector<GeodesicMap> two{a, b};
    CHECK(fuse_maps(two).distances.at({0, 0, 5}) == 5.0);
    CHECK(fuse_maps(two).distances.at({0, 0, 3}) == 3.0);

    CHECK_THROWS_AS(fuse_maps(std::span<const GeodesicMap>{}), ValidationError);
    const auto other = geodesic_map(rod(12), {0, 0, 0}).map;
    const std::vector<GeodesicMap> bad{a, other};
    CHECK_THROWS_AS(fuse_maps(bad), ValidationError);
}

TEST_CASE("fusion is the pointwise minimum, commutative and idempotent") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const auto m = sparse_random(seed + 50, 500);
        std::vector<Voxel> fg;
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(m.size()); ++i)
            if (m[i]) fg.push_back(voxel_at(i, m.dims()));
        const auto A = geodesic_map(m, fg[0]).map;
        const auto B = geodesic_map(m, fg[fg.size() / 2]).map;
        const auto C = geodesic_map(m, fg.back()).map;
        const std::vector<GeodesicMap> abc{A, B, C}, cba{C, B, A}, ab{A, B};
        const auto f = fuse_maps(abc);
        CHECK(f.distances == fuse_maps(cba).distances);
        const std::vector<GeodesicMap> nested{fuse_maps(ab), C};
        CHECK(fuse_maps(nested).distances == f.distances);
        const std::vector<GeodesicMap> ff{f, f};
        CHECK(fuse_maps(ff).distances == f.distances);
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double x = f.distances.data()[i];
            const double ins[3] = {A.distances.data()[i], B.distances.data()[i], C.distances.data()[i]};
            bool equals_one = false;
            for (double y : ins) {
                CHECK(x <= y);
                equals_one = equals_one || x == y;
            }
            CHECK(equals_one);
        }
    }
}

TEST_CASE("quantize") {
    BinaryMask m({4, 1, 1}, {});
    for (std::int64_t i = 0; i < 3; ++i) m.set(Voxel{i, 0, 0}, true);
    GeodesicMap g{Volume<double>({4, 1, 1}, {}, std::vector<double>{0.0, 12.5, 1000.0, kInf}), "x"};
    const auto q = quantize(g, 5.0);
    CHECK(q.classes[0] == 0);
    CHECK(q.classes[1] == 2);
    CHECK(q.classes[2] == kMaxClass);
    CHECK(q.classes[3] == kBackgroundClass);
    CHECK(q.bin_width == 5.0);
    CHECK_THROWS_AS(quantize(g, 0.0), ValidationError);

    GeodesicMap h{Volume<double>({4, 1, 1}, {}, std::vector<double>{0.0, kInf, 3.0, kInf}), "x"};
    const auto qm = quantize(h, 1.0, m);
    CHECK(qm.classes[1] == kMaxClass);  // unreachable foreground
    CHECK(qm.classes[3] == kBackgroundClass);
    CHECK(auto_bin_width(g) == doctest::Approx(50.0));
}

TEST_CASE("fusing in mm before quantizing differs from quantizing first") {
    // With per-map automatic bin widths the two orders disagree somewhere;
    // the pipeline must fuse the millimetre maps and then quantize.
    bool found = false;
    for (std::uint64_t seed = 0; seed < 40 && !found; ++seed) {
        const auto m = sparse_random(seed + 200, 500);
        std::vector<Voxel> fg;
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(m.size()); ++i)
            if (m[i]) fg.push_back(voxel_at(i, m.dims()));
        const auto A = geodesic_map(m, fg.front()).map;
        const auto B = geodesic_map(m, fg[fg.size() / 3]).map;
        const std::vector<GeodesicMap> ab{A, B};
        const auto fused = fuse_maps(ab);
        const auto q = quantize(fused, auto_bin_width(fused));
        const auto qa = quantize(A, auto_bin_width(A));
        const auto qb = quantize(B, auto_bin_width(B));
        const double w = auto_bin_width(fused);
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double v = fused.distances.data()[i];
            const std::uint8_t expect =
                std::isinf(v) ? kBackgroundClass
                              : static_cast<std::uint8_t>(std::min<double>(std::floor(v / w), kMaxClass));
            REQUIRE(q.classes.data()[i] == expect);
            if (std::min(qa.classes.data()[i], qb.classes.data()[i]) != q.classes.data()[i]) found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("decode recovers the planted sparse landmarks of the phantom") {
    const auto p = generate_phantom({});
    const auto maps = phantom_maps(p);
    const auto fused = fuse_maps(maps);

    SUBCASE("quantized, automatic bin width") {
        const auto q = quantize(fused, auto_bin_width(fused), p.mask);
        const auto dec = decode_landmarks(q, p.mask, kSparseLandmarks);
        for (auto n : kSparseLandmarks) {
            REQUIRE(dec.present(n));
            CHECK(dec.present(n)->voxel == p.landmarks.present(n)->voxel);
        }
    }
    SUBCASE("unquantized map") {
        const auto dec = decode_landmarks(fused, p.mask, kSparseLandmarks);
        for (auto n : kSparseLandmarks) CHECK(dec.present(n)->voxel == p.landmarks.present(n)->voxel);
    }
    SUBCASE("fixed bin widths") {
        for (double w : {1.0, 2.0, 5.0}) {
            const auto dec = decode_landmarks(quantize(fused, w, p.mask), p.mask, kSparseLandmarks);
            for (auto n : kSparseLandmarks) CHECK(dec.present(n)->voxel == p.landmarks.present(n)->voxel);
        }
    }
    SUBCASE("regions") {
        CHECK(sparse_region(p.mask, p.landmarks.present(LandmarkName::Me)->voxel) == LandmarkName::Me);
        CHECK(sparse_region(p.mask, p.landmarks.present(LandmarkName::CorL)->voxel) == LandmarkName::CorL);
        CHECK(sparse_region(p.mask, p.landmarks.present(LandmarkName::CdR)->voxel) == LandmarkName::CdR);
    }
}

TEST_CASE("decode reports a missing condyle as absent") {
    PhantomSpec spec;
    spec.missing_left_condyle = true;
    const auto p = generate_phantom(spec);
    const auto fused = fuse_maps(phantom_maps(p));
    const auto dec = decode_landmarks(quantize(fused, auto_bin_width(fused), p.mask), p.mask, kSparseLandmarks);
    REQUIRE(dec.find(LandmarkName::CdL));
    CHECK_FALSE(dec.find(LandmarkName::CdL)->present);
    for (auto n : {LandmarkName::Me, LandmarkName::CdR, LandmarkName::CorL, LandmarkName::CorR}) {
        CHECK(dec.present(n)->voxel == p.landmarks.present(n)->voxel);
    }
}

TEST_CASE("decode tolerates upward class corruption") {
    const auto p = generate_phantom({});
    const auto fused = fuse_maps(phantom_maps(p));
    const auto clean = quantize(fused, auto_bin_width(fused), p.mask);
    std::vector<std::int64_t> fg;
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(p.mask.size()); ++i)
        if (p.mask[i]) fg.push_back(i);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto q = clean;
        std::mt19937_64 rng(seed);
        std::shuffle(fg.begin(), fg.end(), rng);
        for (std::size_t t = 0; t < fg.size() / 100; ++t) {
            auto& c = q.classes[fg[t]];
            if (c < kMaxClass) c = static_cast<std::uint8_t>(std::uniform_int_distribution<int>(c + 1, kMaxClass)(rng));
        }
        const auto dec = decode_landmarks(q, p.mask, kSparseLandmarks);
        for (auto n : kSparseLandmarks) {
            const Voxel a = dec.present(n)->voxel, b = p.landmarks.present(n)->voxel;
            CHECK(std::max({std::abs(a.i - b.i), std::abs(a.j - b.j), std::abs(a.k - b.k)}) <= 1);
        }
    }
}

TEST_CASE("decode errors") {
    const auto p = generate_phantom({});
    const auto fused = fuse_maps(phantom_maps(p));
    const auto q = quantize(fused, auto_bin_width(fused), p.mask);
    const LandmarkName closely[] = {LandmarkName::Me, LandmarkName::Gn};
    CHECK_THROWS_AS(decode_landmarks(q, p.mask, closely), ValidationError);
    const LandmarkName just_me[] = {LandmarkName::Me};
    CHECK_THROWS_AS(decode_landmarks(q, p.mask, just_me), ValidationError);

    // Two minima in the inferior region.
    LandmarkSet two;
    two.add(LandmarkName::Me, p.landmarks.present(LandmarkName::Me)->voxel);
    two.add(LandmarkName::Id, p.landmarks.present(LandmarkName::Id)->voxel);
    const LandmarkName both[] = {LandmarkName::Me, LandmarkName::Id};
    std::vector<GeodesicMap> maps;
    for (auto& r : geodesic_maps(p.mask, two, both)) maps.push_back(r.map);
    const auto f2 = fuse_maps(maps);
    CHECK_THROWS_WITH_AS(decode_landmarks(quantize(f2, 1.0, p.mask), p.mask, kSparseLandmarks),
                         doctest::Contains("Me"), ValidationError);
}
