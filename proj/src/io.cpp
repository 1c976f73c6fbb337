#include "geolmk/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "geolmk/error.hpp"

namespace geolmk::io {

namespace fs = std::filesystem;

namespace {

// Largest payload accepted from a header, before the file size is consulted.
constexpr std::uint64_t kMaxVoxels = std::uint64_t{1} << 36;

template <class T>
T byteswap_value(T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    std::memcpy(&v, b, sizeof(T));
    return v;
}

template <class T>
void to_little_endian(std::span<T> data) {
    if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
        for (auto& x : data) x = byteswap_value(x);
    }
}

json num(double d) {
    if (std::isfinite(d)) return d;
    return nullptr;
}

std::int64_t header_extent(const json& v, const char* field) {
    if (!v.is_number_integer()) throw FormatError(field, "entries must be integers");
    const auto n = v.get<std::int64_t>();
    if (n < 1) throw FormatError(field, "entries must be positive, got " + std::to_string(n));
    return n;
}

std::vector<std::int64_t> int_triplet(const json& v, const std::string& field) {
    if (!v.is_array() || v.size() != 3) throw FormatError(field, "expected an array of 3 integers");
    std::vector<std::int64_t> out;
    for (const auto& e : v) {
        if (!e.is_number_integer()) throw FormatError(field, "expected an array of 3 integers");
        out.push_back(e.get<std::int64_t>());
    }
    return out;
}

const json& require(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw FormatError(key, "missing");
    return *it;
}

template <class T>
Volume<T> take(LoadedVolume&& lv, const fs::path& path) {
    if (auto* p = std::get_if<Volume<T>>(&lv.volume)) return std::move(*p);
    const DType got = std::visit([](const auto& v) { return std::decay_t<decltype(v)>::dtype; }, lv.volume);
    throw FormatError("dtype", path.string() + ": expected " + std::string(dtype_name(DTypeOf<T>::value)) + ", found " +
                                   std::string(dtype_name(got)));
}

json parse_json_file(const fs::path& path) {
    const std::string text = read_text(path);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError("json", path.string() + ": " + e.what());
    }
}

// Common long forms and case variants, mapped to the canonical abbreviation.
std::optional<LandmarkName> suggest_landmark(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::erase_if(s, [](char c) { return c == ' ' || c == '_' || c == '-'; });
    static const std::map<std::string, LandmarkName> known = {
        {"me", LandmarkName::Me},          {"menton", LandmarkName::Me},
        {"gn", LandmarkName::Gn},          {"gnathion", LandmarkName::Gn},
        {"pg", LandmarkName::Pg},          {"pog", LandmarkName::Pg},
        {"pogonion", LandmarkName::Pg},    {"b", LandmarkName::B},
        {"bpoint", LandmarkName::B},       {"supramentale", LandmarkName::B},
        {"id", LandmarkName::Id},          {"infradentale", LandmarkName::Id},
        {"cdl", LandmarkName::CdL},        {"condylionleft", LandmarkName::CdL},
        {"leftcondylion", LandmarkName::CdL}, {"cdr", LandmarkName::CdR},
        {"condylionright", LandmarkName::CdR}, {"rightcondylion", LandmarkName::CdR},
        {"corl", LandmarkName::CorL},      {"coronoidleft", LandmarkName::CorL},
        {"leftcoronoid", LandmarkName::CorL}, {"corr", LandmarkName::CorR},
        {"coronoidright", LandmarkName::CorR}, {"rightcoronoid", LandmarkName::CorR},
    };
    auto it = known.find(s);
    if (it == known.end()) return std::nullopt;
    return it->second;
}

std::string csv_number(double d) {
    if (!std::isfinite(d)) return d > 0 ? "inf" : (d < 0 ? "-inf" : "nan");
    std::ostringstream os;
    os.precision(10);
    os << d;
    return os.str();
}

}  // namespace

std::uint64_t VolumeHeader::payload_bytes() const noexcept {
    return static_cast<std::uint64_t>(dims.count()) * dtype_size(dtype);
}

fs::path header_path(const fs::path& payload) {
    fs::path h = payload;
    h += ".json";
    return h;
}

VolumeHeader parse_volume_header(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError("header", std::string("not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw FormatError("header", "expected a JSON object");

    const json& magic = require(j, "magic");
    if (!magic.is_string() || magic.get<std::string>() != kVolumeMagic) {
        throw FormatError("magic", std::string("expected \"") + kVolumeMagic + "\"");
    }

    VolumeHeader h;
    const json& dims = require(j, "dims");
    if (!dims.is_array() || dims.size() != 3) throw FormatError("dims", "expected an array of 3 positive integers");
    h.dims = {header_extent(dims[0], "dims"), header_extent(dims[1], "dims"), header_extent(dims[2], "dims")};
    std::uint64_t voxels = 1;
    for (std::int64_t n : {h.dims.nx, h.dims.ny, h.dims.nz}) {
        if (static_cast<std::uint64_t>(n) > kMaxVoxels / voxels) throw FormatError("dims", "voxel count too large");
        voxels *= static_cast<std::uint64_t>(n);
    }

    const json& spacing = require(j, "spacing");
    if (!spacing.is_array() || spacing.size() != 3) throw FormatError("spacing", "expected an array of 3 numbers");
    double s[3];
    for (int a = 0; a < 3; ++a) {
        if (!spacing[a].is_number()) throw FormatError("spacing", "expected an array of 3 numbers");
        s[a] = spacing[a].get<double>();
        if (!(std::isfinite(s[a]) && s[a] > 0)) throw FormatError("spacing", "entries must be positive and finite");
    }
    h.spacing = {s[0], s[1], s[2]};

    const json& dtype = require(j, "dtype");
    if (!dtype.is_string()) throw FormatError("dtype", "expected a string");
    const auto dt = parse_dtype(dtype.get<std::string>());
    if (!dt) throw FormatError("dtype", "unknown dtype \"" + dtype.get<std::string>() + "\"");
    h.dtype = *dt;

    if (auto it = j.find("byte_order"); it != j.end()) {
        if (!it->is_string() || it->get<std::string>() != "little") {
            throw FormatError("byte_order", "only \"little\" is supported");
        }
    }
    if (auto it = j.find("layout"); it != j.end()) {
        if (!it->is_string() || it->get<std::string>() != "x-fastest") {
            throw FormatError("layout", "only \"x-fastest\" is supported");
        }
    }
    if (auto it = j.find("attributes"); it != j.end()) {
        if (!it->is_object()) throw FormatError("attributes", "expected an object");
        h.attributes = *it;
    }
    return h;
}

json volume_header_json(const VolumeHeader& h) {
    json j;
    j["magic"] = kVolumeMagic;
    j["dims"] = {h.dims.nx, h.dims.ny, h.dims.nz};
    j["spacing"] = {h.spacing.sx, h.spacing.sy, h.spacing.sz};
    j["dtype"] = std::string(dtype_name(h.dtype));
    j["byte_order"] = "little";
    j["layout"] = "x-fastest";
    if (!h.attributes.empty()) j["attributes"] = h.attributes;
    return j;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("file", "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw FormatError("file", "read failed for " + path.string());
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("file", "cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw FormatError("file", "write failed for " + path.string());
}

LoadedVolume read_volume(const fs::path& path) {
    const VolumeHeader h = parse_volume_header(read_text(header_path(path)));
    std::error_code ec;
    const auto size = fs::file_size(path, ec);
    if (ec) throw FormatError("file", "cannot stat " + path.string() + ": " + ec.message());
    if (size != h.payload_bytes()) {
        throw FormatError("payload", path.string() + ": expected " + std::to_string(h.payload_bytes()) +
                                         " bytes for the header's dims and dtype, found " + std::to_string(size));
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("file", "cannot open " + path.string());

    auto load = [&]<class T>(T) -> AnyVolume {
        std::vector<T> data(static_cast<std::size_t>(h.dims.count()));
        in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(h.payload_bytes()));
        if (!in) throw FormatError("payload", "short read from " + path.string());
        to_little_endian(std::span<T>(data));
        return Volume<T>(h.dims, h.spacing, std::move(data));
    };
    LoadedVolume out;
    switch (h.dtype) {
        case DType::u8: out.volume = load(std::uint8_t{}); break;
        case DType::i32: out.volume = load(std::int32_t{}); break;
        case DType::f32: out.volume = load(float{}); break;
        case DType::f64: out.volume = load(double{}); break;
    }
    out.attributes = h.attributes;
    return out;
}

template <class T>
void write_volume(const Volume<T>& v, const fs::path& path, const json& attributes) {
    VolumeHeader h{v.dims(), v.spacing(), Volume<T>::dtype, attributes.is_null() ? json::object() : attributes};
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("file", "cannot open " + path.string() + " for writing");
        if constexpr (std::endian::native == std::endian::little || sizeof(T) == 1) {
            out.write(reinterpret_cast<const char*>(v.data().data()), static_cast<std::streamsize>(h.payload_bytes()));
        } else {
            std::vector<T> copy(v.data().begin(), v.data().end());
            to_little_endian(std::span<T>(copy));
            out.write(reinterpret_cast<const char*>(copy.data()), static_cast<std::streamsize>(h.payload_bytes()));
        }
        if (!out) throw FormatError("file", "write failed for " + path.string());
    }
    write_text(header_path(path), volume_header_json(h).dump(2) + "\n");
}

template void write_volume(const Volume<std::uint8_t>&, const fs::path&, const json&);
template void write_volume(const Volume<std::int32_t>&, const fs::path&, const json&);
template void write_volume(const Volume<float>&, const fs::path&, const json&);
template void write_volume(const Volume<double>&, const fs::path&, const json&);

template <class T>
Volume<T> read_volume_as(const fs::path& path) {
    return take<T>(read_volume(path), path);
}

template Volume<std::uint8_t> read_volume_as(const fs::path&);
template Volume<std::int32_t> read_volume_as(const fs::path&);
template Volume<float> read_volume_as(const fs::path&);
template Volume<double> read_volume_as(const fs::path&);

BinaryMask read_mask(const fs::path& path) {
    return BinaryMask::from_volume(read_volume_as<std::uint8_t>(path));
}

void write_mask(const BinaryMask& m, const fs::path& path) { write_volume(m.volume(), path); }

void write_geodesic_map(const GeodesicMap& g, const fs::path& path) {
    write_volume(g.distances, path, json{{"source", g.source}});
}

GeodesicMap read_geodesic_map(const fs::path& path) {
    LoadedVolume lv = read_volume(path);
    GeodesicMap g;
    if (auto it = lv.attributes.find("source"); it != lv.attributes.end() && it->is_string()) {
        g.source = it->get<std::string>();
    }
    if (auto* f = std::get_if<Volume<float>>(&lv.volume)) {
        std::vector<double> d(f->data().begin(), f->data().end());
        g.distances = Volume<double>(f->dims(), f->spacing(), std::move(d));
    } else {
        g.distances = take<double>(std::move(lv), path);
    }
    return g;
}

void write_quantized_map(const QuantizedGeodesicMap& q, const fs::path& path) {
    write_volume(q.classes, path, json{{"bin_width", q.bin_width}});
}

QuantizedGeodesicMap read_quantized_map(const fs::path& path) {
    LoadedVolume lv = read_volume(path);
    QuantizedGeodesicMap q;
    auto it = lv.attributes.find("bin_width");
    if (it == lv.attributes.end() || !it->is_number()) {
        throw FormatError("attributes.bin_width", path.string() + ": quantized maps must record their bin width");
    }
    q.bin_width = it->get<double>();
    if (!(std::isfinite(q.bin_width) && q.bin_width > 0)) {
        throw FormatError("attributes.bin_width", "must be positive and finite");
    }
    q.classes = take<std::uint8_t>(std::move(lv), path);
    for (std::size_t i = 0; i < q.classes.size(); ++i) {
        const auto c = q.classes.data()[i];
        if (c > kMaxClass && c != kBackgroundClass) {
            throw FormatError("payload", "class value " + std::to_string(c) + " at index " + std::to_string(i) +
                                             " is neither 0..20 nor 255");
        }
    }
    return q;
}

// ---------------------------------------------------------------------------
// Landmarks

json landmarks_to_json(const LandmarkSet& lm) {
    json arr = json::array();
    for (const auto& e : lm.entries()) {
        arr.push_back({{"id", e.id},
                       {"name", std::string(landmark_name(e.name))},
                       {"voxel", {e.voxel.i, e.voxel.j, e.voxel.k}},
                       {"present", e.present}});
    }
    return arr;
}

LandmarkSet landmarks_from_json(const json& j) {
    const json* arr = &j;
    if (j.is_object() && j.contains("landmarks")) arr = &j["landmarks"];
    if (!arr->is_array()) throw FormatError("landmarks", "expected an array of landmark objects");
    LandmarkSet out;
    std::size_t idx = 0;
    for (const auto& e : *arr) {
        const std::string where = "landmarks[" + std::to_string(idx++) + "]";
        if (!e.is_object()) throw FormatError(where, "expected an object");
        auto name_it = e.find("name");
        if (name_it == e.end() || !name_it->is_string()) throw FormatError(where + ".name", "missing or not a string");
        const std::string name = name_it->get<std::string>();
        const auto parsed = parse_landmark_name(name);
        if (!parsed) {
            std::string msg = "unknown landmark \"" + name + "\"";
            if (auto s = suggest_landmark(name)) msg += "; did you mean \"" + std::string(landmark_name(*s)) + "\"?";
            throw FormatError(where + ".name", msg);
        }
        auto vox_it = e.find("voxel");
        if (vox_it == e.end()) throw FormatError(where + ".voxel", "missing");
        const auto v = int_triplet(*vox_it, where + ".voxel");
        Landmark lm;
        lm.name = *parsed;
        lm.voxel = {v[0], v[1], v[2]};
        lm.id = roster_id(*parsed);
        if (auto it = e.find("id"); it != e.end()) {
            if (!it->is_number_integer()) throw FormatError(where + ".id", "expected an integer");
            lm.id = it->get<int>();
        }
        if (auto it = e.find("present"); it != e.end()) {
            if (!it->is_boolean()) throw FormatError(where + ".present", "expected a boolean");
            lm.present = it->get<bool>();
        }
        try {
            out.add(lm);
        } catch (const ValidationError& err) {
            throw FormatError(where, err.what());
        }
    }
    return out;
}

void write_landmarks_json(const LandmarkSet& lm, const fs::path& path) {
    write_text(path, landmarks_to_json(lm).dump(2) + "\n");
}

LandmarkSet read_landmarks_json(const fs::path& path) { return landmarks_from_json(parse_json_file(path)); }

template <class T>
LandmarkSet read_landmarks_labeled_volume(const Volume<T>& v) {
    const Dims& d = v.dims();
    std::map<int, std::vector<std::int64_t>> voxels;
    for (std::int64_t idx = 0; idx < d.count(); ++idx) {
        const auto label = v[idx];
        if (label == T{}) continue;
        if constexpr (std::is_floating_point_v<T>) {
            if (label != std::floor(label)) throw ValidationError("non-integer label at index " + std::to_string(idx));
        }
        if (label < T{}) throw ValidationError("negative label at index " + std::to_string(idx));
        voxels[static_cast<int>(label)].push_back(idx);
    }

    LandmarkSet out;
    for (const auto& [label, idxs] : voxels) {
        const auto name = roster_name(label);
        if (!name) throw ValidationError("label " + std::to_string(label) + " is not a roster landmark id (1..9)");

        // Connectivity check by flood fill over the label's voxels.
        std::vector<std::int64_t> sorted = idxs;
        std::vector<char> seen(sorted.size(), 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        std::size_t reached = 1;
        while (!stack.empty()) {
            const Voxel p = voxel_at(sorted[stack.back()], d);
            stack.pop_back();
            for (const Voxel& o : neighbor_offsets(Connectivity::full26)) {
                const Voxel q{p.i + o.i, p.j + o.j, p.k + o.k};
                if (!in_bounds(q, d)) continue;
                auto it = std::lower_bound(sorted.begin(), sorted.end(), flat(q, d));
                if (it == sorted.end() || *it != flat(q, d)) continue;
                const auto pos = static_cast<std::size_t>(it - sorted.begin());
                if (seen[pos]) continue;
                seen[pos] = 1;
                ++reached;
                stack.push_back(pos);
            }
        }
        if (reached != sorted.size()) {
            throw ValidationError("label " + std::to_string(label) + " (" + std::string(landmark_name(*name)) +
                                  ") forms more than one connected cluster");
        }

        double c[3] = {0, 0, 0};
        Voxel lo = voxel_at(sorted.front(), d), hi = lo;
        for (auto idx : sorted) {
            const Voxel p = voxel_at(idx, d);
            for (int a = 0; a < 3; ++a) c[a] += static_cast<double>(p[a]);
            lo = {std::min(lo.i, p.i), std::min(lo.j, p.j), std::min(lo.k, p.k)};
            hi = {std::max(hi.i, p.i), std::max(hi.j, p.j), std::max(hi.k, p.k)};
        }
        for (double& x : c) x /= static_cast<double>(sorted.size());
        if (hi.i - lo.i > 2 || hi.j - lo.j > 2 || hi.k - lo.k > 2) {
            diagnostic("label " + std::to_string(label) + " (" + std::string(landmark_name(*name)) +
                       ") spans more than a 3x3x3 box");
        }
        std::int64_t best = sorted.front();
        double best_d = std::numeric_limits<double>::infinity();
        for (auto idx : sorted) {
            const Voxel p = voxel_at(idx, d);
            double dd = 0;
            for (int a = 0; a < 3; ++a) {
                const double t = (static_cast<double>(p[a]) - c[a]) * v.spacing()[a];
                dd += t * t;
            }
            if (dd < best_d) {
                best_d = dd;
                best = idx;
            }
        }
        out.add(*name, voxel_at(best, d));
    }
    return out;
}

template LandmarkSet read_landmarks_labeled_volume(const Volume<std::uint8_t>&);
template LandmarkSet read_landmarks_labeled_volume(const Volume<std::int32_t>&);
template LandmarkSet read_landmarks_labeled_volume(const Volume<float>&);
template LandmarkSet read_landmarks_labeled_volume(const Volume<double>&);

Volume<std::int32_t> write_landmarks_labeled_volume(const LandmarkSet& lm, const Dims& dims, const Spacing& spacing) {
    lm.validate(dims);
    Volume<std::int32_t> out(dims, spacing, 0);
    for (const auto& e : lm.entries()) {
        if (!e.present) continue;
        for (std::int64_t dk = -1; dk <= 1; ++dk)
            for (std::int64_t dj = -1; dj <= 1; ++dj)
                for (std::int64_t di = -1; di <= 1; ++di) {
                    const Voxel q{e.voxel.i + di, e.voxel.j + dj, e.voxel.k + dk};
                    if (!in_bounds(q, dims)) continue;
                    auto& cell = out[flat(q, dims)];
                    if (cell != 0 && cell != e.id) {
                        throw ValidationError("3x3x3 neighbourhoods of " + std::string(landmark_name(e.name)) +
                                              " and label " + std::to_string(cell) + " overlap");
                    }
                    cell = e.id;
                }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sequences

json sequence_to_json(const BoundarySequence& s) {
    json j;
    j["profile"] = s.profile;
    j["labels"] = s.labels;
    j["source_slice"] = s.source_slice;
    j["crop"] = {{"y0", s.crop_y0}, {"y1", s.crop_y1}, {"z0", s.crop_z0}, {"z1", s.crop_z1}};
    j["row_scale"] = s.row_scale;
    j["col_scale"] = s.col_scale;
    j["frame"] = {{"left_is_high_x", s.frame.left_is_high_x},
                  {"anterior_is_low_y", s.frame.anterior_is_low_y},
                  {"superior_is_high_z", s.frame.superior_is_high_z}};
    json rows = json::array();
    for (int r = 0; r < kSeqRows && !s.image.empty(); ++r) {
        std::string row(kSeqCols, '0');
        for (int c = 0; c < kSeqCols; ++c)
            if (s.image[static_cast<std::size_t>(r * kSeqCols + c)]) row[static_cast<std::size_t>(c)] = '1';
        rows.push_back(row);
    }
    j["image"] = rows;
    return j;
}

BoundarySequence sequence_from_json(const json& j) {
    if (!j.is_object()) throw FormatError("sequence", "expected an object");
    BoundarySequence s;
    try {
        const json& profile = require(j, "profile");
        const json& labels = require(j, "labels");
        if (!profile.is_array() || profile.size() != kSeqRows) throw FormatError("profile", "expected 64 integers");
        if (!labels.is_array() || labels.size() != kSeqRows) throw FormatError("labels", "expected 64 values");
        for (int r = 0; r < kSeqRows; ++r) {
            if (!profile[r].is_number_integer()) throw FormatError("profile", "expected 64 integers");
            const auto p = profile[r].get<std::int64_t>();
            if (p < kEmptyRow || p >= kSeqCols) throw FormatError("profile", "column out of range at row " + std::to_string(r));
            s.profile[static_cast<std::size_t>(r)] = static_cast<std::int16_t>(p);
            const auto l = labels[r].is_boolean() ? (labels[r].get<bool>() ? 1 : 0) : labels[r].get<int>();
            if (l != 0 && l != 1) throw FormatError("labels", "values must be 0 or 1");
            s.labels[static_cast<std::size_t>(r)] = static_cast<std::uint8_t>(l);
        }
        if (auto it = j.find("source_slice"); it != j.end()) s.source_slice = it->get<std::int64_t>();
        if (auto it = j.find("crop"); it != j.end()) {
            s.crop_y0 = it->at("y0").get<std::int64_t>();
            s.crop_y1 = it->at("y1").get<std::int64_t>();
            s.crop_z0 = it->at("z0").get<std::int64_t>();
            s.crop_z1 = it->at("z1").get<std::int64_t>();
        }
        if (auto it = j.find("row_scale"); it != j.end()) s.row_scale = it->get<double>();
        if (auto it = j.find("col_scale"); it != j.end()) s.col_scale = it->get<double>();
        if (auto it = j.find("frame"); it != j.end()) {
            s.frame.left_is_high_x = it->value("left_is_high_x", true);
            s.frame.anterior_is_low_y = it->value("anterior_is_low_y", true);
            s.frame.superior_is_high_z = it->value("superior_is_high_z", true);
        }
        if (auto it = j.find("image"); it != j.end() && !it->empty()) {
            if (!it->is_array() || it->size() != kSeqRows) throw FormatError("image", "expected 64 row strings");
            s.image.assign(static_cast<std::size_t>(kSeqRows * kSeqCols), 0);
            for (int r = 0; r < kSeqRows; ++r) {
                const auto row = (*it)[r].get<std::string>();
                if (row.size() != kSeqCols) throw FormatError("image", "row " + std::to_string(r) + " is not 64 wide");
                for (int c = 0; c < kSeqCols; ++c) {
                    const char ch = row[static_cast<std::size_t>(c)];
                    if (ch != '0' && ch != '1') throw FormatError("image", "rows must contain only 0 and 1");
                    s.image[static_cast<std::size_t>(r * kSeqCols + c)] = ch == '1';
                }
            }
        }
    } catch (const json::exception& e) {
        throw FormatError("sequence", e.what());
    }
    try {
        s.validate();
    } catch (const FormatError&) {
        throw;
    } catch (const ValidationError& e) {
        throw FormatError("sequence", e.what());
    }
    return s;
}

std::vector<BoundarySequence> read_sequences(const fs::path& path) {
    const json j = parse_json_file(path);
    std::vector<BoundarySequence> out;
    if (j.is_array()) {
        for (const auto& e : j) out.push_back(sequence_from_json(e));
    } else {
        out.push_back(sequence_from_json(j));
    }
    return out;
}

void write_sequences(std::span<const BoundarySequence> seqs, const fs::path& path) {
    json arr = json::array();
    for (const auto& s : seqs) arr.push_back(sequence_to_json(s));
    write_text(path, arr.dump(1) + "\n");
}

// ---------------------------------------------------------------------------
// Phantom specs

PhantomSpec phantom_spec_from_json(const json& j) {
    if (!j.is_object()) throw FormatError("spec", "expected an object");
    PhantomSpec s;
    try {
        for (const auto& [key, val] : j.items()) {
            if (key == "dims") {
                const auto d = int_triplet(val, "dims");
                s.dims = {d[0], d[1], d[2]};
            } else if (key == "spacing") {
                if (!val.is_array() || val.size() != 3) throw FormatError("spacing", "expected 3 numbers");
                s.spacing = {val[0].get<double>(), val[1].get<double>(), val[2].get<double>()};
            } else if (key == "seed") {
                s.seed = val.get<std::uint64_t>();
            } else if (key == "arch_radius") {
                s.arch_radius = val.get<double>();
            } else if (key == "thickness") {
                s.thickness = val.get<double>();
            } else if (key == "body_height") {
                s.body_height = val.get<double>();
            } else if (key == "ramus_height") {
                s.ramus_height = val.get<double>();
            } else if (key == "condyle_radius") {
                s.condyle_radius = val.get<double>();
            } else if (key == "coronoid_radius") {
                s.coronoid_radius = val.get<double>();
            } else if (key == "missing_left_condyle") {
                s.missing_left_condyle = val.get<bool>();
            } else if (key == "split_into_two_parts") {
                s.split_into_two_parts = val.get<bool>();
            } else if (key == "cavity_count") {
                s.cavity_count = val.get<int>();
            } else if (key == "noise_blob_count") {
                s.noise_blob_count = val.get<int>();
            } else {
                throw FormatError(key, "unknown phantom spec field");
            }
        }
    } catch (const json::exception& e) {
        throw FormatError("spec", e.what());
    }
    return s;
}

json phantom_spec_to_json(const PhantomSpec& s) {
    return {{"dims", {s.dims.nx, s.dims.ny, s.dims.nz}},
            {"spacing", {s.spacing.sx, s.spacing.sy, s.spacing.sz}},
            {"seed", s.seed},
            {"arch_radius", s.arch_radius},
            {"thickness", s.thickness},
            {"body_height", s.body_height},
            {"ramus_height", s.ramus_height},
            {"condyle_radius", s.condyle_radius},
            {"coronoid_radius", s.coronoid_radius},
            {"missing_left_condyle", s.missing_left_condyle},
            {"split_into_two_parts", s.split_into_two_parts},
            {"cavity_count", s.cavity_count},
            {"noise_blob_count", s.noise_blob_count}};
}

// ---------------------------------------------------------------------------
// Reports

json seg_scores_to_json(const SegScores& s) {
    return {{"dsc", num(s.dsc)}, {"iou", num(s.iou)}, {"sensitivity", num(s.sensitivity)},
            {"specificity", num(s.specificity)}, {"hd_mm", num(s.hd_mm)}, {"tp", s.tp}, {"fp", s.fp},
            {"fn", s.fn}, {"tn", s.tn}};
}

json landmark_errors_to_json(const LandmarkErrors& e) {
    json entries = json::array();
    for (const auto& x : e.entries) {
        entries.push_back({{"name", std::string(landmark_name(x.name))},
                           {"delta", {x.delta.i, x.delta.j, x.delta.k}},
                           {"pixel_error", x.pixel_error},
                           {"mm_error", x.mm_error},
                           {"axis_max", x.axis_max},
                           {"in_box", x.in_box}});
    }
    json fp = json::array(), fn = json::array();
    for (auto n : e.false_positives) fp.push_back(std::string(landmark_name(n)));
    for (auto n : e.false_negatives) fn.push_back(std::string(landmark_name(n)));
    return {{"entries", entries}, {"false_positives", fp}, {"false_negatives", fn}};
}

json summary_to_json(const Summary& s) {
    auto stat = [](const Stat& st) { return json{{"mean", num(st.mean)}, {"median", num(st.median)}, {"count", st.count}}; };
    json j;
    j["cases"] = s.cases;
    const std::pair<const char*, const std::optional<Stat>*> seg[] = {
        {"dsc", &s.dsc}, {"iou", &s.iou}, {"sensitivity", &s.sensitivity}, {"specificity", &s.specificity},
        {"hd_mm", &s.hd_mm}};
    for (const auto& [k, v] : seg)
        if (*v) j[k] = stat(**v);
    json lms = json::array();
    for (const auto& l : s.landmarks) {
        lms.push_back({{"name", std::string(landmark_name(l.name))},
                       {"mm_error", stat(l.mm_error)},
                       {"pixel_error", stat(l.pixel_error)},
                       {"detection_rate", l.detection_rate}});
    }
    j["landmarks"] = lms;
    return j;
}

void write_report_csv(std::span<const CaseReport> cases, std::ostream& os) {
    os << "case_id,dsc,iou,sensitivity,specificity,hd_mm";
    for (auto n : kRoster) os << ',' << landmark_name(n) << "_mm_error," << landmark_name(n) << "_in_box";
    os << '\n';
    for (const auto& c : cases) {
        os << c.case_id;
        if (c.seg) {
            os << ',' << csv_number(c.seg->dsc) << ',' << csv_number(c.seg->iou) << ','
               << csv_number(c.seg->sensitivity) << ',' << csv_number(c.seg->specificity) << ','
               << csv_number(c.seg->hd_mm);
        } else {
            os << ",,,,,";
        }
        for (auto n : kRoster) {
            const LandmarkError* e = c.landmarks ? c.landmarks->find(n) : nullptr;
            if (e) {
                os << ',' << csv_number(e->mm_error) << ',' << (e->in_box ? 1 : 0);
            } else {
                os << ",,";
            }
        }
        os << '\n';
    }
}

json ledger_to_json(const ArchitectureLedger& l) {
    json entries = json::array();
    for (const auto& e : l.entries) {
        json row = {{"kind", layer_kind_name(e.kind)},
                    {"label", e.label},
                    {"kernel", e.kernel},
                    {"layers", e.layers},
                    {"growth", e.growth},
                    {"in_features", e.in_features},
                    {"out_features", e.out_features},
                    {"new_features", e.new_features},
                    {"spatial", e.spatial},
                    {"params", e.params}};
        if (e.reference) {
            row["reference"] = *e.reference;
            row["discrepant"] = e.discrepant();
        }
        entries.push_back(std::move(row));
    }
    return {{"name", l.name}, {"entries", entries}, {"total_params", l.total_params}, {"notes", l.notes}};
}

}  // namespace geolmk::io
