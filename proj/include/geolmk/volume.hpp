#pragma once

// Voxel grid types shared by every module.
//
// Axis convention: (i, j, k) indexes (x, y, z) with x fastest in memory.
// x is the sagittal-normal axis, so "sagittal slice s" is the plane x = s.
// The default anatomical frame is +x patient left, +y posterior,
// +z superior; see AnatomicalFrame for the switches.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geolmk/error.hpp"

namespace geolmk {

struct Dims {
    std::int64_t nx = 0;
    std::int64_t ny = 0;
    std::int64_t nz = 0;

    std::int64_t count() const noexcept { return nx * ny * nz; }
    bool operator==(const Dims&) const = default;
};

// Millimetres per voxel along x, y, z.
struct Spacing {
    double sx = 1.0;
    double sy = 1.0;
    double sz = 1.0;

    double operator[](int axis) const noexcept { return axis == 0 ? sx : (axis == 1 ? sy : sz); }
    bool operator==(const Spacing&) const = default;
};

struct Voxel {
    std::int64_t i = 0;
    std::int64_t j = 0;
    std::int64_t k = 0;

    std::int64_t operator[](int axis) const noexcept { return axis == 0 ? i : (axis == 1 ? j : k); }
    bool operator==(const Voxel&) const = default;
};

enum class DType : std::uint8_t { u8, i32, f32, f64 };

std::string_view dtype_name(DType t) noexcept;
std::size_t dtype_size(DType t) noexcept;
std::optional<DType> parse_dtype(std::string_view name) noexcept;

template <class T> struct DTypeOf;
template <> struct DTypeOf<std::uint8_t> { static constexpr DType value = DType::u8; };
template <> struct DTypeOf<std::int32_t> { static constexpr DType value = DType::i32; };
template <> struct DTypeOf<float> { static constexpr DType value = DType::f32; };
template <> struct DTypeOf<double> { static constexpr DType value = DType::f64; };

// Throws ValidationError unless every extent is positive.
void validate_dims(const Dims& dims);
// Throws ValidationError unless every component is positive and finite.
void validate_spacing(const Spacing& spacing);

inline bool in_bounds(const Voxel& v, const Dims& d) noexcept {
    return v.i >= 0 && v.j >= 0 && v.k >= 0 && v.i < d.nx && v.j < d.ny && v.k < d.nz;
}

// i + nx * (j + ny * k). Throws DomainError for coordinates outside `dims`.
std::int64_t voxel_index(const Voxel& v, const Dims& dims);
// Inverse of voxel_index.
Voxel voxel_at(std::int64_t index, const Dims& dims);

// Unchecked flat index for inner loops whose bounds are already established.
inline std::int64_t flat(const Voxel& v, const Dims& d) noexcept {
    return v.i + d.nx * (v.j + d.ny * v.k);
}

// Voxel-centre to voxel-centre distance in millimetres.
inline double euclidean_dist(const Voxel& a, const Voxel& b, const Spacing& s) noexcept {
    const double dx = static_cast<double>(a.i - b.i) * s.sx;
    const double dy = static_cast<double>(a.j - b.j) * s.sy;
    const double dz = static_cast<double>(a.k - b.k) * s.sz;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Dense scalar grid. Storage is x-fastest.
template <class T>
class Volume {
public:
    using value_type = T;
    static constexpr DType dtype = DTypeOf<T>::value;

    Volume() = default;

    Volume(Dims dims, Spacing spacing, T fill = T{})
        : dims_(dims), spacing_(spacing) {
        validate_dims(dims_);
        validate_spacing(spacing_);
        data_.assign(static_cast<std::size_t>(dims_.count()), fill);
    }

    Volume(Dims dims, Spacing spacing, std::vector<T> data)
        : dims_(dims), spacing_(spacing), data_(std::move(data)) {
        validate_dims(dims_);
        validate_spacing(spacing_);
        if (static_cast<std::int64_t>(data_.size()) != dims_.count()) {
            throw ValidationError("volume data length " + std::to_string(data_.size()) +
                                  " does not match dims product " + std::to_string(dims_.count()));
        }
    }

    const Dims& dims() const noexcept { return dims_; }
    const Spacing& spacing() const noexcept { return spacing_; }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<const T> data() const noexcept { return data_; }
    std::span<T> data() noexcept { return data_; }

    T operator[](std::int64_t idx) const noexcept { return data_[static_cast<std::size_t>(idx)]; }
    T& operator[](std::int64_t idx) noexcept { return data_[static_cast<std::size_t>(idx)]; }

    T at(const Voxel& v) const { return data_[static_cast<std::size_t>(voxel_index(v, dims_))]; }
    T& at(const Voxel& v) { return data_[static_cast<std::size_t>(voxel_index(v, dims_))]; }

    bool same_grid(const Dims& d, const Spacing& s) const noexcept { return dims_ == d && spacing_ == s; }
    template <class U>
    bool same_grid(const Volume<U>& other) const noexcept {
        return same_grid(other.dims(), other.spacing());
    }

    bool operator==(const Volume&) const = default;

private:
    Dims dims_{};
    Spacing spacing_{};
    std::vector<T> data_;
};

// A u8 volume restricted to {0, 1}. Foreground M = {v : I(v) = 1}.
class BinaryMask {
public:
    BinaryMask() = default;
    // All-background mask.
    BinaryMask(Dims dims, Spacing spacing) : vol_(dims, spacing, std::uint8_t{0}) {}

    // Throws ValidationError naming the first voxel whose value is not 0 or 1.
    static BinaryMask from_volume(Volume<std::uint8_t> vol);

    const Dims& dims() const noexcept { return vol_.dims(); }
    const Spacing& spacing() const noexcept { return vol_.spacing(); }
    std::size_t size() const noexcept { return vol_.size(); }

    bool operator[](std::int64_t idx) const noexcept { return vol_[idx] != 0; }
    bool at(const Voxel& v) const { return vol_.at(v) != 0; }
    // Out-of-domain voxels read as background.
    bool test(const Voxel& v) const noexcept { return in_bounds(v, dims()) && vol_[flat(v, dims())] != 0; }

    void set(std::int64_t idx, bool value) noexcept { vol_[idx] = value ? 1 : 0; }
    void set(const Voxel& v, bool value) { vol_.at(v) = value ? 1 : 0; }

    std::int64_t count() const noexcept;
    bool empty() const noexcept { return count() == 0; }

    const Volume<std::uint8_t>& volume() const noexcept { return vol_; }
    std::span<const std::uint8_t> data() const noexcept { return vol_.data(); }

    template <class U>
    bool same_grid(const Volume<U>& other) const noexcept { return vol_.same_grid(other); }
    bool same_grid(const BinaryMask& other) const noexcept { return vol_.same_grid(other.vol_); }

    bool operator==(const BinaryMask&) const = default;

private:
    explicit BinaryMask(Volume<std::uint8_t> vol) : vol_(std::move(vol)) {}
    Volume<std::uint8_t> vol_;
};

// output(v) = 1 - input(v). Preserves dims and spacing.
BinaryMask mask_complement(const BinaryMask& m);

// Neighbour offsets. Face (6) or full (26) connectivity.
enum class Connectivity : int { face6 = 6, full26 = 26 };

std::span<const Voxel> neighbor_offsets(Connectivity c) noexcept;
std::optional<Connectivity> parse_connectivity(int n) noexcept;

// Foreground voxel with at least one face neighbour in the background
// (out-of-domain counts as background).
bool is_boundary_voxel(const BinaryMask& m, const Voxel& v) noexcept;

// Orientation switches used where anatomy matters (region split and the
// sagittal boundary profile).
struct AnatomicalFrame {
    bool left_is_high_x = true;
    bool anterior_is_low_y = true;
    bool superior_is_high_z = true;

    bool operator==(const AnatomicalFrame&) const = default;
};

// ---------------------------------------------------------------------------
// Landmarks

enum class LandmarkName : std::uint8_t { Me, Gn, Pg, B, Id, CdL, CdR, CorL, CorR };

inline constexpr std::array<LandmarkName, 9> kRoster = {
    LandmarkName::Me, LandmarkName::Gn,  LandmarkName::Pg,   LandmarkName::B,    LandmarkName::Id,
    LandmarkName::CdL, LandmarkName::CdR, LandmarkName::CorL, LandmarkName::CorR};

// Decodable from the fused geodesic map's extrema.
inline constexpr std::array<LandmarkName, 5> kSparseLandmarks = {
    LandmarkName::Me, LandmarkName::CdL, LandmarkName::CdR, LandmarkName::CorL, LandmarkName::CorR};

// Mid-sagittal set in top-to-bottom anatomical order.
inline constexpr std::array<LandmarkName, 5> kCloseLandmarks = {
    LandmarkName::Id, LandmarkName::B, LandmarkName::Pg, LandmarkName::Gn, LandmarkName::Me};

std::string_view landmark_name(LandmarkName n) noexcept;
std::optional<LandmarkName> parse_landmark_name(std::string_view s) noexcept;
// Canonical label id: position in kRoster plus one.
int roster_id(LandmarkName n) noexcept;
std::optional<LandmarkName> roster_name(int id) noexcept;

struct Landmark {
    int id = 0;
    LandmarkName name = LandmarkName::Me;
    Voxel voxel{};
    bool present = true;

    bool operator==(const Landmark&) const = default;
};

// Ordered landmark entries with unique ids and names.
class LandmarkSet {
public:
    LandmarkSet() = default;

    // Throws ValidationError on id < 1 or a duplicate id or name.
    void add(const Landmark& lm);
    // Adds with the roster id.
    void add(LandmarkName name, const Voxel& v, bool present = true);

    const std::vector<Landmark>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    const Landmark* find(LandmarkName name) const noexcept;
    const Landmark* find_id(int id) const noexcept;
    // Present entry or nullptr.
    const Landmark* present(LandmarkName name) const noexcept;

    // Throws DomainError when a present landmark lies outside `dims`.
    void validate(const Dims& dims) const;

    bool operator==(const LandmarkSet&) const = default;

private:
    std::vector<Landmark> entries_;
};

}  // namespace geolmk
