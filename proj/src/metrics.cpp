#include "geolmk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>

#include "geolmk/edt.hpp"

namespace geolmk {

namespace {

double ratio(std::int64_t num, std::int64_t den, const char* what) {
    if (den == 0) {
        diagnostic(std::string("seg_scores: ") + what + " has a zero denominator; reported as 1");
        return 1.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

// Directed distances from every boundary voxel of `from` to the boundary of
// `to`, reduced to the requested percentile (nearest rank).
double directed(const BinaryMask& from_boundary, const BinaryMask& to_boundary, double percentile) {
    const auto sq = squared_distance_to(to_boundary);
    std::vector<double> d;
    const auto n = static_cast<std::int64_t>(from_boundary.size());
    for (std::int64_t i = 0; i < n; ++i)
        if (from_boundary[i]) d.push_back(std::sqrt(sq[i]));
    if (d.empty()) return 0.0;
    if (percentile >= 100.0) return *std::max_element(d.begin(), d.end());
    const auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * static_cast<double>(d.size())));
    const std::size_t pos = rank == 0 ? 0 : rank - 1;
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(pos), d.end());
    return d[pos];
}

}  // namespace

BinaryMask boundary_of(const BinaryMask& m) {
    BinaryMask out(m.dims(), m.spacing());
    const Dims d = m.dims();
    for (std::int64_t k = 0; k < d.nz; ++k)
        for (std::int64_t j = 0; j < d.ny; ++j)
            for (std::int64_t i = 0; i < d.nx; ++i)
                if (is_boundary_voxel(m, {i, j, k})) out.set(flat({i, j, k}, d), true);
    return out;
}

double hausdorff_distance(const BinaryMask& a, const BinaryMask& b, double percentile) {
    if (!a.same_grid(b)) throw ValidationError("hausdorff_distance: masks have different dims or spacing");
    if (!(percentile > 0.0 && percentile <= 100.0)) throw ValidationError("hausdorff_distance: percentile must be in (0,100]");
    const auto ba = boundary_of(a);
    const auto bb = boundary_of(b);
    const bool ea = ba.empty(), eb = bb.empty();
    if (ea && eb) return 0.0;
    if (ea || eb) {
        diagnostic("hausdorff_distance: one mask is empty; distance is +inf");
        return std::numeric_limits<double>::infinity();
    }
    return std::max(directed(ba, bb, percentile), directed(bb, ba, percentile));
}

SegScores seg_scores(const BinaryMask& pred, const BinaryMask& gt, const SegOptions& opts) {
    if (!pred.same_grid(gt)) throw ValidationError("seg_scores: masks have different dims or spacing");
    SegScores s;
    const auto n = static_cast<std::int64_t>(pred.size());
    for (std::int64_t i = 0; i < n; ++i) {
        const bool p = pred[i], g = gt[i];
        s.tp += p && g;
        s.fp += p && !g;
        s.fn += !p && g;
        s.tn += !p && !g;
    }
    if (s.tp + s.fp + s.fn == 0) diagnostic("seg_scores: both masks are empty");
    s.dsc = ratio(2 * s.tp, 2 * s.tp + s.fp + s.fn, "dsc");
    s.iou = ratio(s.tp, s.tp + s.fp + s.fn, "iou");
    s.sensitivity = ratio(s.tp, s.tp + s.fn, "sensitivity");
    s.specificity = ratio(s.tn, s.tn + s.fp, "specificity");
    s.hd_mm = hausdorff_distance(pred, gt, opts.hd_percentile);
    return s;
}

const LandmarkError* LandmarkErrors::find(LandmarkName n) const noexcept {
    for (const auto& e : entries)
        if (e.name == n) return &e;
    return nullptr;
}

LandmarkErrors landmark_errors(const LandmarkSet& pred, const LandmarkSet& gt, const Spacing& spacing) {
    validate_spacing(spacing);
    LandmarkErrors out;
    bool shared = false;
    for (auto name : kRoster) {
        const auto* p = pred.find(name);
        const auto* g = gt.find(name);
        if (p != nullptr && g != nullptr) shared = true;
        const bool pp = p != nullptr && p->present;
        const bool gp = g != nullptr && g->present;
        if (pp && gp) {
            LandmarkError e;
            e.name = name;
            e.delta = {p->voxel.i - g->voxel.i, p->voxel.j - g->voxel.j, p->voxel.k - g->voxel.k};
            e.pixel_error = euclidean_dist(p->voxel, g->voxel, Spacing{1.0, 1.0, 1.0});
            e.mm_error = euclidean_dist(p->voxel, g->voxel, spacing);
            e.axis_max = std::max({std::llabs(e.delta.i), std::llabs(e.delta.j), std::llabs(e.delta.k)});
            e.in_box = e.axis_max <= 1;
            out.entries.push_back(e);
        } else if (pp) {
            out.false_positives.push_back(name);
        } else if (gp) {
            out.false_negatives.push_back(name);
        }
    }
    if (!shared) throw ValidationError("landmark_errors: prediction and ground truth share no landmark names");
    return out;
}

Stat summarize(std::span<const double> values) {
    if (values.empty()) throw ValidationError("summarize: no values");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    Stat s;
    s.count = v.size();
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    s.median = v[(v.size() - 1) / 2];
    return s;
}

Summary aggregate(std::span<const CaseReport> cases) {
    if (cases.empty()) throw ValidationError("aggregate: no cases");
    Summary out;
    out.cases = cases.size();

    std::vector<double> dsc, iou, sens, spec, hd;
    for (const auto& c : cases) {
        if (!c.seg) continue;
        dsc.push_back(c.seg->dsc);
        iou.push_back(c.seg->iou);
        sens.push_back(c.seg->sensitivity);
        spec.push_back(c.seg->specificity);
        hd.push_back(c.seg->hd_mm);
    }
    if (!dsc.empty()) {
        out.dsc = summarize(dsc);
        out.iou = summarize(iou);
        out.sensitivity = summarize(sens);
        out.specificity = summarize(spec);
        out.hd_mm = summarize(hd);
    }

    for (auto name : kRoster) {
        std::vector<double> mm, px;
        std::size_t in_box = 0;
        for (const auto& c : cases) {
            if (!c.landmarks) continue;
            if (const auto* e = c.landmarks->find(name)) {
                mm.push_back(e->mm_error);
                px.push_back(e->pixel_error);
                in_box += e->in_box;
            }
        }
        if (mm.empty()) continue;
        out.landmarks.push_back(
            {name, summarize(mm), summarize(px), static_cast<double>(in_box) / static_cast<double>(mm.size())});
    }
    return out;
}

}  // namespace geolmk
