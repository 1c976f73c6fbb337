#include "geolmk/volume.hpp"

#include <algorithm>
#include <cctype>
#include <iostream>
#include <mutex>
#include <utility>

namespace geolmk {

namespace {

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

DiagnosticSink& sink_ref() {
    static DiagnosticSink sink = [](const std::string& msg) { std::cerr << "geolmk: " << msg << '\n'; };
    return sink;
}

std::string voxel_str(const Voxel& v) {
    return "(" + std::to_string(v.i) + "," + std::to_string(v.j) + "," + std::to_string(v.k) + ")";
}

constexpr std::array<Voxel, 6> kFace = {{{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}}};

std::array<Voxel, 26> make_full() {
    std::array<Voxel, 26> out{};
    std::size_t n = 0;
    for (std::int64_t dk = -1; dk <= 1; ++dk)
        for (std::int64_t dj = -1; dj <= 1; ++dj)
            for (std::int64_t di = -1; di <= 1; ++di)
                if (di != 0 || dj != 0 || dk != 0) out[n++] = {di, dj, dk};
    return out;
}

const std::array<Voxel, 26> kFull = make_full();

constexpr std::array<std::string_view, 9> kNames = {"Me", "Gn", "Pg", "B", "Id", "CdL", "CdR", "CorL", "CorR"};

}  // namespace

void set_diagnostic_sink(DiagnosticSink sink) {
    std::lock_guard lock(sink_mutex());
    sink_ref() = std::move(sink);
}

void diagnostic(const std::string& message) {
    std::lock_guard lock(sink_mutex());
    if (sink_ref()) sink_ref()(message);
}

ScopedDiagnosticSink::ScopedDiagnosticSink(DiagnosticSink sink) {
    std::lock_guard lock(sink_mutex());
    previous_ = std::exchange(sink_ref(), std::move(sink));
}

ScopedDiagnosticSink::~ScopedDiagnosticSink() {
    std::lock_guard lock(sink_mutex());
    sink_ref() = std::move(previous_);
}

std::string_view dtype_name(DType t) noexcept {
    switch (t) {
        case DType::u8: return "u8";
        case DType::i32: return "i32";
        case DType::f32: return "f32";
        case DType::f64: return "f64";
    }
    return "?";
}

std::size_t dtype_size(DType t) noexcept {
    switch (t) {
        case DType::u8: return 1;
        case DType::i32: return 4;
        case DType::f32: return 4;
        case DType::f64: return 8;
    }
    return 0;
}

std::optional<DType> parse_dtype(std::string_view name) noexcept {
    if (name == "u8") return DType::u8;
    if (name == "i32") return DType::i32;
    if (name == "f32") return DType::f32;
    if (name == "f64") return DType::f64;
    return std::nullopt;
}

void validate_dims(const Dims& d) {
    if (d.nx <= 0 || d.ny <= 0 || d.nz <= 0) {
        throw ValidationError("dims must be positive, got (" + std::to_string(d.nx) + "," + std::to_string(d.ny) +
                              "," + std::to_string(d.nz) + ")");
    }
}

void validate_spacing(const Spacing& s) {
    for (int a = 0; a < 3; ++a) {
        if (!(std::isfinite(s[a]) && s[a] > 0.0)) {
            throw ValidationError("spacing components must be positive and finite");
        }
    }
}

std::int64_t voxel_index(const Voxel& v, const Dims& dims) {
    if (!in_bounds(v, dims)) throw DomainError("voxel " + voxel_str(v) + " outside domain");
    return flat(v, dims);
}

Voxel voxel_at(std::int64_t index, const Dims& dims) {
    if (index < 0 || index >= dims.count()) throw DomainError("flat index " + std::to_string(index) + " outside domain");
    const std::int64_t i = index % dims.nx;
    const std::int64_t rest = index / dims.nx;
    return {i, rest % dims.ny, rest / dims.ny};
}

BinaryMask BinaryMask::from_volume(Volume<std::uint8_t> vol) {
    const auto data = vol.data();
    const auto bad = std::find_if(data.begin(), data.end(), [](std::uint8_t x) { return x > 1; });
    if (bad != data.end()) {
        const auto idx = static_cast<std::int64_t>(bad - data.begin());
        throw ValidationError("mask value " + std::to_string(*bad) + " at voxel " + voxel_str(voxel_at(idx, vol.dims())) +
                              " is not 0 or 1");
    }
    return BinaryMask(std::move(vol));
}

std::int64_t BinaryMask::count() const noexcept {
    const auto d = vol_.data();
    return std::count(d.begin(), d.end(), std::uint8_t{1});
}

BinaryMask mask_complement(const BinaryMask& m) {
    BinaryMask out(m.dims(), m.spacing());
    const auto n = static_cast<std::int64_t>(m.size());
    for (std::int64_t i = 0; i < n; ++i) out.set(i, !m[i]);
    return out;
}

std::span<const Voxel> neighbor_offsets(Connectivity c) noexcept {
    if (c == Connectivity::face6) return kFace;
    return kFull;
}

std::optional<Connectivity> parse_connectivity(int n) noexcept {
    if (n == 6) return Connectivity::face6;
    if (n == 26) return Connectivity::full26;
    return std::nullopt;
}

bool is_boundary_voxel(const BinaryMask& m, const Voxel& v) noexcept {
    if (!m.test(v)) return false;
    for (const auto& o : kFace) {
        if (!m.test({v.i + o.i, v.j + o.j, v.k + o.k})) return true;
    }
    return false;
}

std::string_view landmark_name(LandmarkName n) noexcept { return kNames[static_cast<std::size_t>(n)]; }

std::optional<LandmarkName> parse_landmark_name(std::string_view s) noexcept {
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (kNames[i] == s) return static_cast<LandmarkName>(i);
    }
    return std::nullopt;
}

int roster_id(LandmarkName n) noexcept { return static_cast<int>(n) + 1; }

std::optional<LandmarkName> roster_name(int id) noexcept {
    if (id < 1 || id > static_cast<int>(kRoster.size())) return std::nullopt;
    return kRoster[static_cast<std::size_t>(id - 1)];
}

void LandmarkSet::add(const Landmark& lm) {
    if (lm.id < 1) throw ValidationError("landmark id must be >= 1, got " + std::to_string(lm.id));
    for (const auto& e : entries_) {
        if (e.id == lm.id) throw ValidationError("duplicate landmark id " + std::to_string(lm.id));
        if (e.name == lm.name) throw ValidationError("duplicate landmark name " + std::string(landmark_name(lm.name)));
    }
    entries_.push_back(lm);
}

void LandmarkSet::add(LandmarkName name, const Voxel& v, bool present) {
    add(Landmark{roster_id(name), name, v, present});
}

const Landmark* LandmarkSet::find(LandmarkName name) const noexcept {
    for (const auto& e : entries_)
        if (e.name == name) return &e;
    return nullptr;
}

const Landmark* LandmarkSet::find_id(int id) const noexcept {
    for (const auto& e : entries_)
        if (e.id == id) return &e;
    return nullptr;
}

const Landmark* LandmarkSet::present(LandmarkName name) const noexcept {
    const auto* e = find(name);
    return (e != nullptr && e->present) ? e : nullptr;
}

void LandmarkSet::validate(const Dims& dims) const {
    for (const auto& e : entries_) {
        if (e.present && !in_bounds(e.voxel, dims)) {
            throw DomainError("landmark " + std::string(landmark_name(e.name)) + " at " + voxel_str(e.voxel) +
                              " outside domain");
        }
    }
}

}  // namespace geolmk
