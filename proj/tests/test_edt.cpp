#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "geolmk/edt.hpp"
#include "oracles.hpp"

using namespace geolmk;

namespace {

BinaryMask cube_mask(const Dims& d, std::int64_t lo, std::int64_t hi) {
    BinaryMask m(d, {});
    for (std::int64_t k = lo; k <= hi; ++k)
        for (std::int64_t j = lo; j <= hi; ++j)
            for (std::int64_t i = lo; i <= hi; ++i) m.set(Voxel{i, j, k}, true);
    return m;
}

}  // namespace

TEST_CASE("ltdt small cases") {
    BinaryMask m({11, 11, 11}, {});
    m.set(Voxel{5, 5, 5}, true);
    const auto f = ltdt(m);
    CHECK(f.at({5, 5, 5}) == 1.0);
    CHECK(f.at({0, 0, 0}) == 0.0);
    CHECK(f.at({5, 5, 6}) == 0.0);
}

TEST_CASE("ltdt matches the brute-force oracle exactly with unit spacing") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto m = oracle::random_mask({16, 16, 16}, {}, 0.7, seed);
        const auto sq = squared_distance_to(mask_complement(m));
        const auto ref = oracle::naive_sq_dist_int(m, false);
        for (std::size_t i = 0; i < ref.size(); ++i) {
            REQUIRE(static_cast<std::int64_t>(sq.data()[i]) == ref[i]);
            REQUIRE(sq.data()[i] == static_cast<double>(ref[i]));
        }
        const auto f = ltdt(m);
        for (std::size_t i = 0; i < ref.size(); ++i) REQUIRE(f.data()[i] == std::sqrt(static_cast<double>(ref[i])));
    }
}

TEST_CASE("ltdt matches the oracle with anisotropic spacing") {
    const Spacing s{0.754, 0.754, 0.377};
    for (std::uint64_t seed = 100; seed < 105; ++seed) {
        const auto m = oracle::random_mask({12, 10, 14}, s, 0.8, seed);
        const auto f = ltdt(m, 2);
        const auto ref = oracle::naive_dist(m, false);
        for (std::size_t i = 0; i < ref.size(); ++i) REQUIRE(std::abs(f.data()[i] - ref[i]) <= 1e-9);
    }
}

TEST_CASE("thread count does not change the result") {
    const auto m = oracle::random_mask({20, 17, 9}, {1.0, 0.5, 2.0}, 0.6, 42);
    CHECK(ltdt(m, 1) == ltdt(m, 3));
    CHECK(sltdt(m, 1) == sltdt(m, 4));
}

TEST_CASE("sltdt sign convention") {
    const auto cube = cube_mask({15, 15, 15}, 3, 11);
    const auto f = sltdt(cube);
    CHECK(f.at({7, 7, 7}) == 5.0);
    CHECK(f.at({2, 7, 7}) == -1.0);
    CHECK(f.at({3, 7, 7}) == 1.0);

    const auto m = oracle::random_mask({12, 12, 12}, {}, 0.5, 9);
    const auto s = sltdt(m);
    const auto pos = ltdt(m);
    const auto neg = ltdt(mask_complement(m));
    const auto sc = sltdt(mask_complement(m));
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(m.size()); ++i) {
        CHECK(s[i] == (m[i] ? pos[i] : -neg[i]));
        CHECK(sc[i] == -s[i]);
        CHECK(s[i] != 0.0);
        CHECK((s[i] > 0) == m[i]);
    }
}

TEST_CASE("empty sets give infinite sentinels and a diagnostic") {
    std::vector<std::string> msgs;
    ScopedDiagnosticSink sink([&](const std::string& m) { msgs.push_back(m); });
    BinaryMask empty({4, 4, 4}, {});
    const auto s = sltdt(empty);
    for (double x : s.data()) CHECK(x == -std::numeric_limits<double>::infinity());
    CHECK_FALSE(msgs.empty());
    msgs.clear();
    const auto full = mask_complement(empty);
    const auto lf = ltdt(full);
    for (double x : lf.data()) CHECK(x == std::numeric_limits<double>::infinity());
    CHECK_FALSE(msgs.empty());
}

TEST_CASE("distance field is 1-Lipschitz and translation equivariant") {
    const Spacing sp{0.8, 1.1, 0.6};
    const auto m = oracle::random_mask({14, 14, 14}, sp, 0.6, 77);
    const auto f = sltdt(m);
    const Dims& d = m.dims();
    for (std::int64_t i = 0; i < d.count(); ++i) {
        const Voxel v = voxel_at(i, d);
        for (const Voxel& o : neighbor_offsets(Connectivity::full26)) {
            const Voxel w{v.i + o.i, v.j + o.j, v.k + o.k};
            if (!in_bounds(w, d)) continue;
            if (m[i] != m.at(w)) continue;  // sign flips across the surface
            CHECK(std::abs(f[i] - f.at(w)) <= euclidean_dist(v, w, sp) + 1e-9);
        }
    }

    const auto cube = cube_mask({16, 16, 16}, 4, 9);
    const auto shifted = cube_mask({16, 16, 16}, 5, 10);
    const auto a = ltdt(cube), b = ltdt(shifted);
    for (std::int64_t k = 4; k <= 9; ++k)
        for (std::int64_t j = 4; j <= 9; ++j)
            for (std::int64_t i = 4; i <= 9; ++i) CHECK(a.at({i, j, k}) == b.at({i + 1, j + 1, k + 1}));
}
