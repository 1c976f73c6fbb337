#include "geolmk/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include "geolmk/edt.hpp"

namespace geolmk {

namespace {

// Noise and cavities keep this many voxels between themselves and the clean
// surface.
constexpr double kClearance = 3.0;

struct Geometry {
    double cx = 0;          // midline x
    double y0 = 0, y1 = 0;  // arch centre y, posterior end of the body
    double zb = 0;          // body floor
    double R = 0, t = 0, H = 0;
    double ramus_top = 0, ramus_depth = 0;
    double a = 1, c = 1;    // in-plane and vertical scale against a 96^3 grid
    double chin_bulge = 0, chin_notch = 0;
    double cond_y = 0, cor_y = 0, cond_r = 0, cor_r = 0;
};

// Anterior chin offset at fractional height u in [0,1] of the body.
double chin_profile(const Geometry& g, double u) {
    const double pg = (u - 0.35) / 0.18;
    const double b = (u - 0.70) / 0.12;
    return g.chin_bulge * std::exp(-pg * pg) - g.chin_notch * std::exp(-b * b);
}

Geometry layout(const PhantomSpec& s) {
    Geometry g;
    g.a = static_cast<double>(std::min(s.dims.nx, s.dims.ny)) / 96.0;
    g.c = static_cast<double>(s.dims.nz) / 96.0;
    g.R = s.arch_radius;
    g.t = s.thickness;
    g.H = s.body_height;
    g.cx = std::floor(static_cast<double>(s.dims.nx) / 2.0);
    g.chin_bulge = 4.0 * g.a;
    g.chin_notch = 2.0 * g.a;
    g.y0 = 6.0 * g.a + g.chin_bulge + g.t / 2.0 + g.R;
    g.y1 = g.y0 + std::round(1.1 * g.R);
    g.zb = std::round(8.0 * g.c);
    g.ramus_top = g.zb + s.ramus_height;
    g.ramus_depth = std::round(0.6 * g.R);
    g.cond_r = s.condyle_radius;
    g.cor_r = s.coronoid_radius;
    g.cond_y = std::round(g.y1 - 0.12 * g.R);
    g.cor_y = std::round(g.y1 - g.ramus_depth + 0.12 * g.R);
    return g;
}

bool in_ellipsoid(double x, double y, double z, double cx, double cy, double cz, double rxy, double rz) {
    const double dx = (x - cx) / rxy, dy = (y - cy) / rxy, dz = (z - cz) / rz;
    return dx * dx + dy * dy + dz * dz <= 1.0;
}

struct Shape {
    const Geometry& g;
    const PhantomSpec& s;

    bool body(double x, double y, double z) const {
        if (z < g.zb || z > g.zb + g.H) return false;
        if (y <= g.y0) {
            const double dx = x - g.cx, dy = g.y0 - y;
            const double r = std::hypot(dx, dy);
            const double phi = std::atan2(std::abs(dx), dy);  // 0 on the midline
            const double taper = std::exp(-(phi / 0.35) * (phi / 0.35));
            const double outer = g.R + g.t / 2.0 + chin_profile(g, (z - g.zb) / g.H) * taper;
            return r >= g.R - g.t / 2.0 && r <= outer;
        }
        if (y > g.y1) return false;
        return std::abs(x - (g.cx - g.R)) <= g.t / 2.0 || std::abs(x - (g.cx + g.R)) <= g.t / 2.0;
    }

    bool ramus(double x, double y, double z, double side_x) const {
        return std::abs(x - side_x) <= g.t / 2.0 && y >= g.y1 - g.ramus_depth && y <= g.y1 && z >= g.zb &&
               z <= g.ramus_top;
    }

    // left = high x
    bool inside(double x, double y, double z) const {
        if (body(x, y, z)) return true;
        for (int side = -1; side <= 1; side += 2) {
            const double sx = g.cx + side * g.R;
            if (ramus(x, y, z, sx)) return true;
            const bool left = side > 0;
            if (!(left && s.missing_left_condyle) &&
                in_ellipsoid(x, y, z, sx, g.cond_y, g.ramus_top, g.cond_r * g.a / g.c, g.cond_r))
                return true;
            if (in_ellipsoid(x, y, z, sx, g.cor_y, g.ramus_top, g.cor_r * g.a / g.c, g.cor_r)) return true;
        }
        return false;
    }
};

void check_fits(const PhantomSpec& s, const Geometry& g) {
    const double margin = 2.0;
    const double half_width = std::max({g.t / 2.0, g.cond_r * g.a / g.c, g.cor_r * g.a / g.c});
    std::ostringstream why;
    if (g.R - g.t / 2.0 < 1.0) why << "thickness exceeds the arch radius; ";
    if (g.cx - g.R - half_width < margin || g.cx + g.R + half_width > static_cast<double>(s.dims.nx) - 1 - margin)
        why << "arch does not fit along x; ";
    if (g.y0 - g.R - g.t / 2.0 - g.chin_bulge < margin ||
        std::max(g.y1, g.cond_y + g.cond_r * g.a / g.c) > static_cast<double>(s.dims.ny) - 1 - margin)
        why << "arch does not fit along y; ";
    if (g.zb < margin || g.ramus_top + std::max(g.cond_r, g.cor_r) > static_cast<double>(s.dims.nz) - 1 - margin)
        why << "rami do not fit along z; ";
    if (g.H < 10.0) why << "body height below 10 voxels; ";
    if (g.ramus_top - g.zb < 2.0 * g.H + 2.0) why << "ramus height must exceed twice the body height; ";
    if (g.ramus_depth < 2.0 * g.cor_r * g.a / g.c) why << "ramus too shallow for the bumps; ";
    const auto msg = why.str();
    if (!msg.empty()) throw ValidationError("phantom: " + msg.substr(0, msg.size() - 2));
}

// First foreground voxel scanning anteriorly to posteriorly along y in row
// (x, z).
std::optional<Voxel> anterior_voxel(const BinaryMask& m, std::int64_t x, std::int64_t z) {
    for (std::int64_t y = 0; y < m.dims().ny; ++y)
        if (m.test({x, y, z})) return Voxel{x, y, z};
    return std::nullopt;
}

std::optional<Voxel> top_voxel(const BinaryMask& m, std::int64_t x, std::int64_t y) {
    for (std::int64_t z = m.dims().nz - 1; z >= 0; --z)
        if (m.test({x, y, z})) return Voxel{x, y, z};
    return std::nullopt;
}

// Places `count` small balls at randomly chosen centres that satisfy
// `eligible`, at least `spacing_vox` apart. Returns the centres.
std::vector<Voxel> place_balls(const Dims& d, int count, std::mt19937_64& rng, const std::vector<std::int64_t>& eligible,
                               double spacing_vox, const char* what) {
    std::vector<Voxel> centres;
    if (count <= 0) return centres;
    if (eligible.empty()) throw ValidationError(std::string("phantom: no room for ") + what);
    std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
    const int max_attempts = 200 * count;
    for (int attempt = 0; attempt < max_attempts && static_cast<int>(centres.size()) < count; ++attempt) {
        const Voxel v = voxel_at(eligible[pick(rng)], d);
        const bool clear = std::none_of(centres.begin(), centres.end(), [&](const Voxel& c) {
            return euclidean_dist(c, v, Spacing{}) < spacing_vox;
        });
        if (clear) centres.push_back(v);
    }
    if (static_cast<int>(centres.size()) < count) {
        throw ValidationError(std::string("phantom: could only place ") + std::to_string(centres.size()) + " of " +
                              std::to_string(count) + " " + what);
    }
    return centres;
}

}  // namespace

PhantomSpec PhantomSpec::resolved() const {
    validate_dims(dims);
    validate_spacing(spacing);
    PhantomSpec s = *this;
    const double a = static_cast<double>(std::min(dims.nx, dims.ny)) / 96.0;
    const double c = static_cast<double>(dims.nz) / 96.0;
    if (s.arch_radius <= 0) s.arch_radius = std::round(26.0 * a);
    if (s.thickness <= 0) s.thickness = std::round(10.0 * a);
    if (s.body_height <= 0) s.body_height = std::round(26.0 * c);
    if (s.ramus_height <= 0) s.ramus_height = std::round(64.0 * c);
    if (s.condyle_radius <= 0) s.condyle_radius = std::round(6.0 * c);
    if (s.coronoid_radius <= 0) s.coronoid_radius = std::round(5.0 * c);
    if (s.cavity_count < 0 || s.noise_blob_count < 0) throw ValidationError("phantom: counts must be >= 0");
    return s;
}

Phantom generate_phantom(const PhantomSpec& spec) {
    const PhantomSpec s = spec.resolved();
    const Geometry g = layout(s);
    check_fits(s, g);
    const Shape shape{g, s};
    const Dims d = s.dims;

    BinaryMask mask(d, s.spacing);
    const double half_width = std::max({g.t / 2.0, g.cond_r * g.a / g.c, g.cor_r * g.a / g.c});
    const auto x_lo = static_cast<std::int64_t>(std::floor(g.cx - g.R - half_width - 1));
    const auto x_hi = static_cast<std::int64_t>(std::ceil(g.cx + g.R + half_width + 1));
    const auto z_hi = static_cast<std::int64_t>(std::ceil(g.ramus_top + std::max(g.cond_r, g.cor_r) + 1));
    for (std::int64_t k = std::max<std::int64_t>(0, static_cast<std::int64_t>(g.zb) - 1); k <= std::min(d.nz - 1, z_hi); ++k)
        for (std::int64_t j = 0; j < d.ny; ++j)
            for (std::int64_t i = std::max<std::int64_t>(0, x_lo); i <= std::min(d.nx - 1, x_hi); ++i)
                if (shape.inside(static_cast<double>(i), static_cast<double>(j), static_cast<double>(k)))
                    mask.set(flat({i, j, k}, d), true);

    if (s.split_into_two_parts) {
        // Cut the right posterior body just behind the arch.
        const auto gap = std::max<std::int64_t>(2, static_cast<std::int64_t>(std::round(2.0 * g.a)));
        const auto y_cut = static_cast<std::int64_t>(std::ceil(g.y0 + 0.2 * g.R));
        for (std::int64_t k = 0; k < d.nz; ++k)
            for (std::int64_t j = y_cut; j < std::min(d.ny, y_cut + gap); ++j)
                for (std::int64_t i = 0; i < static_cast<std::int64_t>(g.cx); ++i) mask.set(flat({i, j, k}, d), false);
    }

    Phantom out;
    const auto mid = static_cast<std::int64_t>(g.cx);
    auto chin_row = [&](double u) { return static_cast<std::int64_t>(g.zb + std::round(u * g.H)); };
    const std::pair<LandmarkName, double> chin[] = {{LandmarkName::Me, 0.0},
                                                    {LandmarkName::Gn, 0.15},
                                                    {LandmarkName::Pg, 0.35},
                                                    {LandmarkName::B, 0.70},
                                                    {LandmarkName::Id, 1.0}};
    for (const auto& [name, u] : chin) {
        const auto v = anterior_voxel(mask, mid, chin_row(u));
        if (!v) throw ValidationError("phantom: chin row for " + std::string(landmark_name(name)) + " is empty");
        out.landmarks.add(name, *v);
    }
    const auto right_x = static_cast<std::int64_t>(std::round(g.cx - g.R));
    const auto left_x = static_cast<std::int64_t>(std::round(g.cx + g.R));
    const auto cond_y = static_cast<std::int64_t>(g.cond_y);
    const auto cor_y = static_cast<std::int64_t>(g.cor_y);
    auto add_top = [&](LandmarkName name, std::int64_t x, std::int64_t y, bool present) {
        if (!present) {
            out.landmarks.add(name, {}, false);
            return;
        }
        const auto v = top_voxel(mask, x, y);
        if (!v) throw ValidationError("phantom: no foreground under " + std::string(landmark_name(name)));
        out.landmarks.add(name, *v);
    };
    add_top(LandmarkName::CdL, left_x, cond_y, !s.missing_left_condyle);
    add_top(LandmarkName::CdR, right_x, cond_y, true);
    add_top(LandmarkName::CorL, left_x, cor_y, true);
    add_top(LandmarkName::CorR, right_x, cor_y, true);

    if (s.cavity_count > 0 || s.noise_blob_count > 0) {
        std::mt19937_64 rng(s.seed);
        const auto unit_grid = BinaryMask::from_volume(
            Volume<std::uint8_t>(d, Spacing{}, std::vector<std::uint8_t>(mask.data().begin(), mask.data().end())));
        const DistanceField depth = sltdt(unit_grid);
        const auto n = static_cast<std::int64_t>(mask.size());

        // Radius-1 cavities (centre plus face neighbours); a centre at depth
        // >= clearance + 1 keeps every cavity voxel at depth >= clearance.
        std::vector<std::int64_t> inner;
        for (std::int64_t i = 0; i < n; ++i)
            if (depth[i] >= kClearance + 1.0) inner.push_back(i);
        const auto cavities = place_balls(d, s.cavity_count, rng, inner, 4.0, "cavities");

        // Radius-1 blobs outside, same clearance, away from the border.
        std::vector<std::int64_t> outer;
        for (std::int64_t i = 0; i < n; ++i) {
            if (depth[i] > -(kClearance + 1.0)) continue;
            const Voxel v = voxel_at(i, d);
            if (v.i < 2 || v.j < 2 || v.k < 2 || v.i > d.nx - 3 || v.j > d.ny - 3 || v.k > d.nz - 3) continue;
            outer.push_back(i);
        }
        const auto blobs = place_balls(d, s.noise_blob_count, rng, outer, 4.0, "noise blobs");

        for (const auto& c : cavities) {
            mask.set(c, false);
            for (const auto& o : neighbor_offsets(Connectivity::face6)) mask.set({c.i + o.i, c.j + o.j, c.k + o.k}, false);
        }
        for (const auto& c : blobs) {
            mask.set(c, true);
            for (const auto& o : neighbor_offsets(Connectivity::face6)) mask.set({c.i + o.i, c.j + o.j, c.k + o.k}, true);
        }
    }
    out.mask = std::move(mask);
    return out;
}

}  // namespace geolmk
