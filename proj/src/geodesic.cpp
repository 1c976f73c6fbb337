#include "geolmk/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>
#include <utility>

#include "parallel.hpp"

namespace geolmk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string voxel_str(const Voxel& v) {
    std::ostringstream os;
    os << '(' << v.i << ',' << v.j << ',' << v.k << ')';
    return os.str();
}

struct Step {
    Voxel offset;
    std::int64_t delta;  // flat-index offset
    double weight;       // mm
};

std::vector<Step> make_steps(const Dims& d, const Spacing& s, Connectivity c) {
    std::vector<Step> steps;
    for (const auto& o : neighbor_offsets(c)) {
        steps.push_back({o, o.i + d.nx * (o.j + d.ny * o.k), euclidean_dist({0, 0, 0}, o, s)});
    }
    return steps;
}

using QueueEntry = std::pair<double, std::int64_t>;
// Min-heap on (distance, flat index): equal distances settle in index order.
using MinQueue = std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>>;

// Lazy-deletion Dijkstra from `source` over the foreground of `m`, writing
// into `dist` (pre-filled with +inf). Stops expanding once the popped
// distance reaches `limit`. Every voxel whose distance was written is
// appended to `touched` when it is non-null.
void dijkstra(const BinaryMask& m, const std::vector<Step>& steps, std::int64_t source, double limit,
              std::span<double> dist, std::vector<std::int64_t>* touched) {
    const Dims d = m.dims();
    MinQueue queue;
    dist[static_cast<std::size_t>(source)] = 0.0;
    if (touched) touched->push_back(source);
    queue.emplace(0.0, source);
    while (!queue.empty()) {
        const auto [du, u] = queue.top();
        queue.pop();
        if (du > dist[static_cast<std::size_t>(u)]) continue;
        if (du >= limit) break;
        const std::int64_t ui = u % d.nx;
        const std::int64_t rest = u / d.nx;
        const std::int64_t uj = rest % d.ny;
        const std::int64_t uk = rest / d.ny;
        for (const auto& st : steps) {
            const std::int64_t vi = ui + st.offset.i, vj = uj + st.offset.j, vk = uk + st.offset.k;
            if (vi < 0 || vj < 0 || vk < 0 || vi >= d.nx || vj >= d.ny || vk >= d.nz) continue;
            const std::int64_t v = u + st.delta;
            if (!m[v]) continue;
            const double nd = du + st.weight;
            auto& dv = dist[static_cast<std::size_t>(v)];
            if (nd < dv) {
                if (touched && dv == kInf) touched->push_back(v);
                dv = nd;
                queue.emplace(nd, v);
            }
        }
    }
}

// Nearest foreground voxel to `v` within `limit_mm`; ties go to the smaller
// flat index.
std::optional<std::pair<Voxel, double>> nearest_foreground(const BinaryMask& m, const Voxel& v, double limit_mm) {
    const Dims d = m.dims();
    const Spacing s = m.spacing();
    const auto ri = static_cast<std::int64_t>(std::floor(limit_mm / s.sx));
    const auto rj = static_cast<std::int64_t>(std::floor(limit_mm / s.sy));
    const auto rk = static_cast<std::int64_t>(std::floor(limit_mm / s.sz));
    std::optional<std::pair<Voxel, double>> best;
    for (std::int64_t k = std::max<std::int64_t>(0, v.k - rk); k <= std::min(d.nz - 1, v.k + rk); ++k)
        for (std::int64_t j = std::max<std::int64_t>(0, v.j - rj); j <= std::min(d.ny - 1, v.j + rj); ++j)
            for (std::int64_t i = std::max<std::int64_t>(0, v.i - ri); i <= std::min(d.nx - 1, v.i + ri); ++i) {
                const Voxel q{i, j, k};
                if (!m[flat(q, d)]) continue;
                const double dd = euclidean_dist(v, q, s);
                if (dd > limit_mm) continue;
                // Scan order is flat-index order, so strict < keeps the first tie.
                if (!best || dd < best->second) best = std::make_pair(q, dd);
            }
    return best;
}

// 26-connected components of the voxels selected by `pick`, in order of
// their smallest flat index.
std::vector<std::vector<std::int64_t>> clusters_of(const Dims& d, const std::vector<char>& pick) {
    std::vector<std::vector<std::int64_t>> out;
    std::vector<char> seen(pick.size(), 0);
    const auto offsets = neighbor_offsets(Connectivity::full26);
    std::vector<std::int64_t> stack;
    for (std::int64_t start = 0; start < d.count(); ++start) {
        if (!pick[static_cast<std::size_t>(start)] || seen[static_cast<std::size_t>(start)]) continue;
        std::vector<std::int64_t> comp;
        stack.assign(1, start);
        seen[static_cast<std::size_t>(start)] = 1;
        while (!stack.empty()) {
            const std::int64_t u = stack.back();
            stack.pop_back();
            comp.push_back(u);
            const Voxel uv = voxel_at(u, d);
            for (const auto& o : offsets) {
                const Voxel w{uv.i + o.i, uv.j + o.j, uv.k + o.k};
                if (!in_bounds(w, d)) continue;
                const std::int64_t wi = flat(w, d);
                if (pick[static_cast<std::size_t>(wi)] && !seen[static_cast<std::size_t>(wi)]) {
                    seen[static_cast<std::size_t>(wi)] = 1;
                    stack.push_back(wi);
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
    }
    return out;
}

struct Centroid {
    double i = 0, j = 0, k = 0;
};

Centroid centroid_of(const std::vector<std::int64_t>& cluster, const Dims& d) {
    Centroid c;
    for (auto idx : cluster) {
        const Voxel v = voxel_at(idx, d);
        c.i += static_cast<double>(v.i);
        c.j += static_cast<double>(v.j);
        c.k += static_cast<double>(v.k);
    }
    const auto n = static_cast<double>(cluster.size());
    return {c.i / n, c.j / n, c.k / n};
}

double centroid_dist(const Centroid& c, const Voxel& v, const Spacing& s) {
    const double dx = (static_cast<double>(v.i) - c.i) * s.sx;
    const double dy = (static_cast<double>(v.j) - c.j) * s.sy;
    const double dz = (static_cast<double>(v.k) - c.k) * s.sz;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Cluster voxel closest to the cluster centroid (ties: smallest index).
std::int64_t snapped_centroid(const std::vector<std::int64_t>& cluster, const Dims& d, const Spacing& s) {
    const Centroid c = centroid_of(cluster, d);
    std::int64_t best = cluster.front();
    double best_d = kInf;
    for (auto idx : cluster) {
        const double dd = centroid_dist(c, voxel_at(idx, d), s);
        if (dd < best_d) {
            best_d = dd;
            best = idx;
        }
    }
    return best;
}

// Refines a class-0 cluster to the voxel whose geodesic ball of radius
// `radius` matches the cluster with the fewest disagreeing voxels.
class BallFitter {
public:
    BallFitter(const BinaryMask& m, Connectivity c, double radius)
        : m_(m), steps_(make_steps(m.dims(), m.spacing(), c)), radius_(radius),
          dist_(m.size(), kInf), in_cluster_(m.size(), 0) {}

    std::int64_t fit(const std::vector<std::int64_t>& cluster) {
        const Dims d = m_.dims();
        for (auto idx : cluster) in_cluster_[static_cast<std::size_t>(idx)] = 1;

        const Centroid c = centroid_of(cluster, d);
        const std::int64_t start = snapped_centroid(cluster, d, m_.spacing());

        // Candidates: the cluster and its foreground neighbours, so a source
        // voxel whose own class was corrupted upward is still reachable.
        std::vector<std::int64_t> candidates;
        if (cluster.size() <= kExhaustiveLimit) {
            std::vector<char> mark(m_.size(), 0);
            for (auto idx : cluster) {
                const Voxel v = voxel_at(idx, d);
                for (const auto& st : steps_) {
                    const Voxel w{v.i + st.offset.i, v.j + st.offset.j, v.k + st.offset.k};
                    if (!in_bounds(w, d)) continue;
                    const auto wi = flat(w, d);
                    if (m_[wi]) mark[static_cast<std::size_t>(wi)] = 1;
                }
                mark[static_cast<std::size_t>(idx)] = 1;
            }
            for (std::int64_t i = 0; i < static_cast<std::int64_t>(mark.size()); ++i)
                if (mark[static_cast<std::size_t>(i)]) candidates.push_back(i);
        }

        std::int64_t best = start;
        std::int64_t best_score = score(start, cluster.size());
        auto better = [&](std::int64_t cand, std::int64_t sc) {
            if (sc != best_score) return sc < best_score;
            const double dc = centroid_dist(c, voxel_at(cand, d), m_.spacing());
            const double db = centroid_dist(c, voxel_at(best, d), m_.spacing());
            if (dc != db) return dc < db;
            return cand < best;
        };

        if (!candidates.empty()) {
            for (auto cand : candidates) {
                const auto sc = score(cand, cluster.size());
                if (better(cand, sc)) {
                    best = cand;
                    best_score = sc;
                }
            }
        } else {
            // Large clusters: greedy descent from the snapped centroid.
            bool moved = true;
            while (moved && best_score > 0) {
                moved = false;
                const Voxel v = voxel_at(best, d);
                std::int64_t step_best = best;
                std::int64_t step_score = best_score;
                for (const auto& st : steps_) {
                    const Voxel w{v.i + st.offset.i, v.j + st.offset.j, v.k + st.offset.k};
                    if (!in_bounds(w, d) || !m_[flat(w, d)]) continue;
                    const auto wi = flat(w, d);
                    const auto sc = score(wi, cluster.size());
                    if (sc < step_score) {
                        step_best = wi;
                        step_score = sc;
                    }
                }
                if (step_best != best) {
                    best = step_best;
                    best_score = step_score;
                    moved = true;
                }
            }
        }

        for (auto idx : cluster) in_cluster_[static_cast<std::size_t>(idx)] = 0;
        return best;
    }

private:
    static constexpr std::size_t kExhaustiveLimit = 4096;

    // |ball(c) symmetric-difference cluster|
    std::int64_t score(std::int64_t c, std::size_t cluster_size) {
        touched_.clear();
        dijkstra(m_, steps_, c, radius_, dist_, &touched_);
        std::int64_t inside_both = 0;
        std::int64_t ball_size = 0;
        for (auto t : touched_) {
            auto& dt = dist_[static_cast<std::size_t>(t)];
            if (dt < radius_) {
                ++ball_size;
                if (in_cluster_[static_cast<std::size_t>(t)]) ++inside_both;
            }
            dt = kInf;
        }
        return (ball_size - inside_both) + (static_cast<std::int64_t>(cluster_size) - inside_both);
    }

    const BinaryMask& m_;
    std::vector<Step> steps_;
    double radius_;
    std::vector<double> dist_;
    std::vector<char> in_cluster_;
    std::vector<std::int64_t> touched_;
};

// Split of the mask into the five sparse regions.
class RegionSplit {
public:
    RegionSplit(const BinaryMask& m, const AnatomicalFrame& f) : frame_(f) {
        const Dims d = m.dims();
        Box full;
        for (std::int64_t idx = 0; idx < d.count(); ++idx)
            if (m[idx]) full.add(voxel_at(idx, d));
        if (full.empty()) throw ValidationError("decode_landmarks: mask has no foreground");
        split_z_ = 0.5 * static_cast<double>(full.lo.k + full.hi.k);
        Box sup;
        for (std::int64_t idx = 0; idx < d.count(); ++idx) {
            if (!m[idx]) continue;
            const Voxel v = voxel_at(idx, d);
            if (!inferior(v)) sup.add(v);
        }
        split_x_ = 0.5 * static_cast<double>(sup.lo.i + sup.hi.i);
        split_y_ = 0.5 * static_cast<double>(sup.lo.j + sup.hi.j);
    }

    LandmarkName region(const Voxel& v) const {
        if (inferior(v)) return LandmarkName::Me;
        const double dx = static_cast<double>(v.i) - split_x_;
        const double dy = static_cast<double>(v.j) - split_y_;
        const bool left = frame_.left_is_high_x ? dx > 0 : dx < 0;
        const bool anterior = frame_.anterior_is_low_y ? dy < 0 : dy > 0;
        if (anterior) return left ? LandmarkName::CorL : LandmarkName::CorR;
        return left ? LandmarkName::CdL : LandmarkName::CdR;
    }

private:
    struct Box {
        Voxel lo{std::numeric_limits<std::int64_t>::max(), std::numeric_limits<std::int64_t>::max(),
                 std::numeric_limits<std::int64_t>::max()};
        Voxel hi{-1, -1, -1};
        void add(const Voxel& v) {
            lo = {std::min(lo.i, v.i), std::min(lo.j, v.j), std::min(lo.k, v.k)};
            hi = {std::max(hi.i, v.i), std::max(hi.j, v.j), std::max(hi.k, v.k)};
        }
        bool empty() const { return hi.i < 0; }
    };

    bool inferior(const Voxel& v) const {
        const double dz = static_cast<double>(v.k) - split_z_;
        return frame_.superior_is_high_z ? dz < 0 : dz > 0;
    }

    AnatomicalFrame frame_;
    double split_z_ = 0, split_x_ = 0, split_y_ = 0;
};

void check_expected(std::span<const LandmarkName> expected) {
    if (expected.empty()) throw ValidationError("decode_landmarks: no expected landmark names");
    for (std::size_t a = 0; a < expected.size(); ++a) {
        if (std::find(kSparseLandmarks.begin(), kSparseLandmarks.end(), expected[a]) == kSparseLandmarks.end()) {
            throw ValidationError("decode_landmarks: " + std::string(landmark_name(expected[a])) +
                                  " is closely-spaced and cannot be decoded from a fused map");
        }
        for (std::size_t b = 0; b < a; ++b)
            if (expected[a] == expected[b])
                throw ValidationError("decode_landmarks: duplicate expected name " +
                                      std::string(landmark_name(expected[a])));
    }
}

LandmarkSet assign_regions(const BinaryMask& m, const std::vector<Voxel>& candidates,
                           std::span<const LandmarkName> expected, const AnatomicalFrame& frame) {
    if (candidates.size() > expected.size()) {
        throw ValidationError("decode_landmarks: " + std::to_string(candidates.size()) + " minimum clusters but only " +
                              std::to_string(expected.size()) + " expected landmarks");
    }
    const RegionSplit split(m, frame);
    std::vector<std::optional<Voxel>> slot(kRoster.size());
    for (const auto& v : candidates) {
        const LandmarkName r = split.region(v);
        if (std::find(expected.begin(), expected.end(), r) == expected.end()) {
            throw ValidationError("decode_landmarks: candidate " + voxel_str(v) + " lies in the " +
                                  std::string(landmark_name(r)) + " region, which is not expected");
        }
        auto& s = slot[static_cast<std::size_t>(r)];
        if (s) {
            throw ValidationError("decode_landmarks: candidates " + voxel_str(*s) + " and " + voxel_str(v) +
                                  " both lie in the " + std::string(landmark_name(r)) + " region");
        }
        s = v;
    }
    LandmarkSet out;
    for (auto name : expected) {
        const auto& s = slot[static_cast<std::size_t>(name)];
        out.add(name, s.value_or(Voxel{}), s.has_value());
    }
    return out;
}

}  // namespace

GeodesicResult geodesic_map(const BinaryMask& m, const Voxel& landmark, const GeodesicOptions& opts,
                            const std::string& label) {
    if (!in_bounds(landmark, m.dims())) {
        throw DomainError("geodesic_map: " + label + " at " + voxel_str(landmark) + " outside domain");
    }
    if (m.empty()) throw ValidationError("geodesic_map: mask has no foreground");

    GeodesicResult result;
    result.source_voxel = landmark;
    if (!m.at(landmark)) {
        const auto near = nearest_foreground(m, landmark, opts.snap_limit_mm);
        if (!near) {
            std::ostringstream os;
            os << "geodesic_map: " << label << " at " << voxel_str(landmark)
               << " has no foreground voxel within " << opts.snap_limit_mm << " mm";
            throw ValidationError(os.str());
        }
        result.snap = SnapReport{landmark, near->first, near->second};
        result.source_voxel = near->first;
        std::ostringstream os;
        os << "geodesic_map: " << label << " snapped from " << voxel_str(landmark) << " to "
           << voxel_str(near->first) << " (" << near->second << " mm)";
        diagnostic(os.str());
    }

    Volume<double> dist(m.dims(), m.spacing(), kInf);
    const auto steps = make_steps(m.dims(), m.spacing(), opts.connectivity);
    dijkstra(m, steps, flat(result.source_voxel, m.dims()), kInf, dist.data(), nullptr);
    result.map = GeodesicMap{std::move(dist), label};
    return result;
}

std::vector<GeodesicResult> geodesic_maps(const BinaryMask& m, const LandmarkSet& landmarks,
                                          std::span<const LandmarkName> names, const GeodesicOptions& opts,
                                          int threads) {
    std::vector<Voxel> sources;
    for (auto n : names) {
        const auto* lm = landmarks.present(n);
        if (lm == nullptr) {
            throw ValidationError("geodesic_maps: landmark " + std::string(landmark_name(n)) + " is not present");
        }
        sources.push_back(lm->voxel);
    }
    std::vector<GeodesicResult> out(names.size());
    detail::parallel_for(static_cast<std::int64_t>(names.size()), threads, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i) {
            const auto u = static_cast<std::size_t>(i);
            out[u] = geodesic_map(m, sources[u], opts, std::string(landmark_name(names[u])));
        }
    });
    return out;
}

GeodesicMap fuse_maps(std::span<const GeodesicMap> maps) {
    if (maps.empty()) throw ValidationError("fuse_maps: no input maps");
    GeodesicMap out{maps.front().distances, kFusedSource};
    for (std::size_t a = 1; a < maps.size(); ++a) {
        const auto& other = maps[a].distances;
        if (!out.distances.same_grid(other)) {
            throw ValidationError("fuse_maps: map " + std::to_string(a) + " (" + maps[a].source +
                                  ") has different dims or spacing");
        }
        auto dst = out.distances.data();
        const auto src = other.data();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::min(dst[i], src[i]);
    }
    return out;
}

double auto_bin_width(const GeodesicMap& g) {
    double hi = 0.0;
    for (double x : g.distances.data())
        if (std::isfinite(x)) hi = std::max(hi, x);
    return hi > 0.0 ? hi / static_cast<double>(kMaxClass) : 1.0;
}

namespace {

std::uint8_t class_of(double value, double bin_width) {
    if (!(value < kInf)) return kMaxClass;
    const double c = std::floor(value / bin_width);
    return c >= static_cast<double>(kMaxClass) ? kMaxClass : static_cast<std::uint8_t>(std::max(c, 0.0));
}

void check_bin_width(double bin_width) {
    if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
        throw ValidationError("quantize: bin width must be positive and finite");
    }
}

}  // namespace

QuantizedGeodesicMap quantize(const GeodesicMap& g, double bin_width) {
    check_bin_width(bin_width);
    const auto& src = g.distances;
    Volume<std::uint8_t> classes(src.dims(), src.spacing(), kBackgroundClass);
    const auto n = static_cast<std::int64_t>(src.size());
    for (std::int64_t i = 0; i < n; ++i)
        if (std::isfinite(src[i])) classes[i] = class_of(src[i], bin_width);
    return {std::move(classes), bin_width};
}

QuantizedGeodesicMap quantize(const GeodesicMap& g, double bin_width, const BinaryMask& domain) {
    check_bin_width(bin_width);
    const auto& src = g.distances;
    if (!domain.same_grid(src)) throw ValidationError("quantize: mask grid does not match map grid");
    Volume<std::uint8_t> classes(src.dims(), src.spacing(), kBackgroundClass);
    const auto n = static_cast<std::int64_t>(src.size());
    for (std::int64_t i = 0; i < n; ++i)
        if (domain[i]) classes[i] = class_of(src[i], bin_width);
    return {std::move(classes), bin_width};
}

LandmarkSet decode_landmarks(const QuantizedGeodesicMap& q, const BinaryMask& m,
                             std::span<const LandmarkName> expected, const DecodeOptions& opts) {
    check_expected(expected);
    const auto& cls = q.classes;
    if (!m.same_grid(cls)) throw ValidationError("decode_landmarks: mask grid does not match map grid");
    const Dims d = m.dims();
    const auto n = static_cast<std::int64_t>(m.size());

    int lowest = kMaxClass + 1;
    for (std::int64_t i = 0; i < n; ++i)
        if (m[i] && cls[i] <= kMaxClass) lowest = std::min<int>(lowest, cls[i]);
    if (lowest > kMaxClass) throw ValidationError("decode_landmarks: map has no foreground class");

    std::vector<char> pick(m.size(), 0);
    for (std::int64_t i = 0; i < n; ++i) pick[static_cast<std::size_t>(i)] = m[i] && cls[i] == lowest;
    const auto clusters = clusters_of(d, pick);
    if (clusters.size() > expected.size()) {
        throw ValidationError("decode_landmarks: " + std::to_string(clusters.size()) + " minimum clusters but only " +
                              std::to_string(expected.size()) + " expected landmarks");
    }

    std::vector<Voxel> candidates;
    if (lowest == 0) {
        BallFitter fitter(m, opts.connectivity, q.bin_width);
        for (const auto& c : clusters) candidates.push_back(voxel_at(fitter.fit(c), d));
    } else {
        diagnostic("decode_landmarks: no class-0 voxels; using class " + std::to_string(lowest) + " clusters");
        for (const auto& c : clusters) candidates.push_back(voxel_at(snapped_centroid(c, d, m.spacing()), d));
    }
    return assign_regions(m, candidates, expected, opts.frame);
}

LandmarkSet decode_landmarks(const GeodesicMap& g, const BinaryMask& m, std::span<const LandmarkName> expected,
                             const DecodeOptions& opts) {
    check_expected(expected);
    const auto& dist = g.distances;
    if (!m.same_grid(dist)) throw ValidationError("decode_landmarks: mask grid does not match map grid");
    const Dims d = m.dims();
    const auto offsets = neighbor_offsets(opts.connectivity);

    // A voxel is a minimum when no foreground neighbour is strictly lower.
    std::vector<char> pick(m.size(), 0);
    for (std::int64_t idx = 0; idx < d.count(); ++idx) {
        if (!m[idx] || !std::isfinite(dist[idx])) continue;
        const Voxel v = voxel_at(idx, d);
        bool minimum = true;
        for (const auto& o : offsets) {
            const Voxel w{v.i + o.i, v.j + o.j, v.k + o.k};
            if (in_bounds(w, d) && m[flat(w, d)] && dist[flat(w, d)] < dist[idx]) {
                minimum = false;
                break;
            }
        }
        pick[static_cast<std::size_t>(idx)] = minimum;
    }
    const auto clusters = clusters_of(d, pick);
    if (clusters.empty()) throw ValidationError("decode_landmarks: map has no finite foreground values");
    std::vector<Voxel> candidates;
    for (const auto& c : clusters) candidates.push_back(voxel_at(snapped_centroid(c, d, m.spacing()), d));
    return assign_regions(m, candidates, expected, opts.frame);
}

LandmarkName sparse_region(const BinaryMask& m, const Voxel& v, const AnatomicalFrame& frame) {
    return RegionSplit(m, frame).region(v);
}

}  // namespace geolmk
