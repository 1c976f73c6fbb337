#include <doctest.h>

#include <random>

#include "geolmk/volume.hpp"
#include "oracles.hpp"

using namespace geolmk;

TEST_CASE("voxel_index follows x-fastest layout") {
    CHECK(voxel_index({0, 0, 0}, {4, 4, 4}) == 0);
    CHECK(voxel_index({3, 0, 0}, {4, 4, 4}) == 3);
    CHECK(voxel_index({1, 2, 3}, {4, 5, 6}) == 69);
    CHECK_THROWS_AS(voxel_index({4, 0, 0}, {4, 4, 4}), DomainError);
    CHECK_THROWS_AS(voxel_index({0, -1, 0}, {4, 4, 4}), DomainError);
}

TEST_CASE("flat index round trips over a 5x6x7 domain") {
    const Dims d{5, 6, 7};
    for (std::int64_t i = 0; i < d.count(); ++i) CHECK(voxel_index(voxel_at(i, d), d) == i);
}

TEST_CASE("mask_complement") {
    const Spacing s{0.5, 1.0, 2.0};
    SUBCASE("all ones becomes all zeros") {
        Volume<std::uint8_t> v({2, 2, 2}, s, std::uint8_t{1});
        const auto c = mask_complement(BinaryMask::from_volume(v));
        CHECK(c.count() == 0);
        CHECK(c.spacing() == s);
    }
    SUBCASE("single voxel") {
        BinaryMask m({3, 3, 3}, s);
        m.set(Voxel{1, 1, 1}, true);
        const auto c = mask_complement(m);
        CHECK(c.count() == 26);
        CHECK_FALSE(c.at({1, 1, 1}));
    }
    SUBCASE("involution") {
        const auto m = oracle::random_mask({8, 8, 8}, s, 0.4, 3);
        CHECK(mask_complement(mask_complement(m)) == m);
    }
}

TEST_CASE("BinaryMask rejects values other than 0 and 1") {
    Volume<std::uint8_t> v({2, 2, 2}, {}, std::uint8_t{0});
    v[5] = 2;
    CHECK_THROWS_AS(BinaryMask::from_volume(v), ValidationError);
}

TEST_CASE("volume construction checks") {
    CHECK_THROWS_AS(Volume<float>({0, 1, 1}, {}), ValidationError);
    CHECK_THROWS_AS(Volume<float>({1, 1, 1}, {1, -1, 1}), ValidationError);
    CHECK_THROWS_AS(Volume<float>({1, 1, 1}, {1, 1, std::nan("")}), ValidationError);
    CHECK_THROWS_AS(Volume<float>({2, 2, 2}, {}, std::vector<float>(7)), ValidationError);
}

TEST_CASE("euclidean_dist") {
    CHECK(euclidean_dist({1, 2, 3}, {1, 2, 3}, {}) == 0.0);
    CHECK(euclidean_dist({0, 0, 0}, {3, 4, 0}, {}) == doctest::Approx(5.0));
    CHECK(euclidean_dist({0, 0, 0}, {1, 1, 1}, {0.5, 0.5, 0.25}) == doctest::Approx(0.75));

    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::int64_t> c(0, 15);
    const Spacing s{0.754, 0.754, 0.377};
    for (int t = 0; t < 200; ++t) {
        const Voxel a{c(rng), c(rng), c(rng)}, b{c(rng), c(rng), c(rng)}, q{c(rng), c(rng), c(rng)};
        CHECK(euclidean_dist(a, b, s) == euclidean_dist(b, a, s));
        CHECK(euclidean_dist(a, q, s) <= euclidean_dist(a, b, s) + euclidean_dist(b, q, s) + 1e-12);
    }
}

TEST_CASE("landmark names and roster ids") {
    for (auto n : kRoster) {
        CHECK(parse_landmark_name(landmark_name(n)) == n);
        CHECK(roster_name(roster_id(n)) == n);
    }
    CHECK(roster_id(LandmarkName::Me) == 1);
    CHECK(roster_id(LandmarkName::CorR) == 9);
    CHECK_FALSE(parse_landmark_name("Menton"));
    CHECK_FALSE(roster_name(10));
}

TEST_CASE("LandmarkSet uniqueness and domain checks") {
    LandmarkSet s;
    s.add(LandmarkName::Me, {1, 1, 1});
    CHECK_THROWS_AS(s.add(LandmarkName::Me, {2, 2, 2}), ValidationError);
    CHECK_THROWS_AS(s.add(Landmark{1, LandmarkName::Gn, {0, 0, 0}, true}), ValidationError);
    s.add(LandmarkName::CdL, {0, 0, 0}, false);
    CHECK(s.present(LandmarkName::CdL) == nullptr);
    CHECK(s.find(LandmarkName::CdL) != nullptr);
    CHECK_NOTHROW(s.validate({2, 2, 2}));
    s.add(LandmarkName::Gn, {5, 0, 0});
    CHECK_THROWS_AS(s.validate({2, 2, 2}), DomainError);
}

TEST_CASE("boundary voxels") {
    BinaryMask m({5, 5, 5}, {});
    for (std::int64_t k = 1; k < 4; ++k)
        for (std::int64_t j = 1; j < 4; ++j)
            for (std::int64_t i = 1; i < 4; ++i) m.set(Voxel{i, j, k}, true);
    CHECK_FALSE(is_boundary_voxel(m, {2, 2, 2}));
    CHECK(is_boundary_voxel(m, {1, 2, 2}));
    CHECK_FALSE(is_boundary_voxel(m, {0, 0, 0}));
}
