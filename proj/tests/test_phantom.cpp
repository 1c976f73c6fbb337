#include <doctest.h>

#include "geolmk/phantom.hpp"
#include "geolmk/postprocess.hpp"

using namespace geolmk;

TEST_CASE("default phantom") {
    const auto p = generate_phantom({});
    CHECK(p.mask.dims() == Dims{96, 96, 96});
    CHECK(p.landmarks.size() == 9);
    for (const auto& l : p.landmarks.entries()) {
        CHECK(l.present);
        CHECK(l.id == roster_id(l.name));
        CHECK(is_boundary_voxel(p.mask, l.voxel));
    }
    CHECK(label_components(p.mask).count() == 1);

    // Mid-sagittal landmarks share x and run Id, B, Pg, Gn, Me top to bottom.
    const auto x = p.landmarks.present(LandmarkName::Me)->voxel.i;
    std::int64_t prev_z = p.mask.dims().nz;
    for (auto n : kCloseLandmarks) {
        const Voxel v = p.landmarks.present(n)->voxel;
        CHECK(v.i == x);
        CHECK(v.k < prev_z);
        prev_z = v.k;
    }
}

TEST_CASE("determinism") {
    PhantomSpec spec;
    spec.seed = 5;
    spec.cavity_count = 3;
    spec.noise_blob_count = 3;
    const auto a = generate_phantom(spec);
    const auto b = generate_phantom(spec);
    CHECK(a.mask == b.mask);
    CHECK(a.landmarks == b.landmarks);
    spec.seed = 6;
    CHECK_FALSE(generate_phantom(spec).mask == a.mask);
}

TEST_CASE("missing condyle") {
    PhantomSpec spec;
    spec.missing_left_condyle = true;
    const auto p = generate_phantom(spec);
    CHECK_FALSE(p.landmarks.find(LandmarkName::CdL)->present);
    int present = 0;
    for (const auto& l : p.landmarks.entries()) {
        if (!l.present) continue;
        ++present;
        CHECK(is_boundary_voxel(p.mask, l.voxel));
    }
    CHECK(present == 8);
    CHECK(p.mask.count() < generate_phantom({}).mask.count());
}

TEST_CASE("split phantom has exactly two parts") {
    PhantomSpec spec;
    spec.split_into_two_parts = true;
    CHECK(label_components(generate_phantom(spec).mask).count() == 2);
}

TEST_CASE("noise and cavities") {
    PhantomSpec spec;
    spec.cavity_count = 4;
    spec.noise_blob_count = 5;
    const auto p = generate_phantom(spec);
    const auto clean = generate_phantom({}).mask;
    CHECK(label_components(p.mask).count() == 6);
    CHECK(fill_holes(largest_component(p.mask)) == clean);
}

TEST_CASE("other sizes and anisotropic spacing") {
    for (auto d : {Dims{64, 64, 64}, Dims{128, 128, 96}, Dims{64, 64, 128}}) {
        PhantomSpec spec;
        spec.dims = d;
        spec.spacing = {0.754, 0.754, 0.377};
        const auto p = generate_phantom(spec);
        CHECK(p.mask.spacing() == spec.spacing);
        for (const auto& l : p.landmarks.entries()) CHECK(is_boundary_voxel(p.mask, l.voxel));
    }
}

TEST_CASE("invalid specs") {
    PhantomSpec tiny;
    tiny.dims = {16, 16, 16};
    CHECK_THROWS_AS(generate_phantom(tiny), ValidationError);
    PhantomSpec fat;
    fat.arch_radius = 60;
    CHECK_THROWS_AS(generate_phantom(fat), ValidationError);
    PhantomSpec crowded;
    crowded.noise_blob_count = 100000;
    CHECK_THROWS_AS(generate_phantom(crowded), ValidationError);
    PhantomSpec negative;
    negative.cavity_count = -1;
    CHECK_THROWS_AS(generate_phantom(negative), ValidationError);
}
