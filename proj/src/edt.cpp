#include "geolmk/edt.hpp"

#include <limits>
#include <vector>

#include "parallel.hpp"

namespace geolmk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Scratch buffers for one scan line, reused across lines by a worker.
struct LineScratch {
    std::vector<double> f;
    std::vector<double> z;
    std::vector<std::int64_t> v;

    explicit LineScratch(std::int64_t n)
        : f(static_cast<std::size_t>(n)), z(static_cast<std::size_t>(n + 1)), v(static_cast<std::size_t>(n)) {}
};

// In-place lower envelope along one line of `n` samples spaced `stride`
// apart: out[q] = min_p w * (q - p)^2 + in[p]. Infinite samples never join
// the envelope.
void envelope_pass(double* line, std::int64_t n, std::int64_t stride, double w, LineScratch& s) {
    for (std::int64_t q = 0; q < n; ++q) s.f[q] = line[q * stride];

    std::int64_t k = -1;
    for (std::int64_t q = 0; q < n; ++q) {
        const double fq = s.f[q];
        if (fq == kInf) continue;
        double inter = 0.0;
        while (k >= 0) {
            const std::int64_t p = s.v[k];
            inter = ((fq + w * static_cast<double>(q * q)) - (s.f[p] + w * static_cast<double>(p * p))) /
                    (2.0 * w * static_cast<double>(q - p));
            if (inter <= s.z[k]) {
                --k;
            } else {
                break;
            }
        }
        if (k < 0) {
            k = 0;
            s.v[0] = q;
            s.z[0] = -kInf;
            s.z[1] = kInf;
        } else {
            ++k;
            s.v[k] = q;
            s.z[k] = inter;
            s.z[k + 1] = kInf;
        }
    }

    if (k < 0) {
        for (std::int64_t q = 0; q < n; ++q) line[q * stride] = kInf;
        return;
    }
    std::int64_t j = 0;
    for (std::int64_t q = 0; q < n; ++q) {
        while (s.z[j + 1] < static_cast<double>(q)) ++j;
        const auto dq = static_cast<double>(q - s.v[j]);
        line[q * stride] = w * dq * dq + s.f[s.v[j]];
    }
}

}  // namespace

DistanceField squared_distance_to(const BinaryMask& targets, int threads) {
    const Dims d = targets.dims();
    const Spacing sp = targets.spacing();
    DistanceField out(d, sp, kInf);
    auto data = out.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (targets[static_cast<std::int64_t>(i)]) data[i] = 0.0;
    }
    double* base = data.data();
    const std::int64_t nx = d.nx, ny = d.ny, nz = d.nz;

    // x lines: one per (j, k)
    detail::parallel_for(ny * nz, threads, [&](std::int64_t lo, std::int64_t hi) {
        LineScratch s(nx);
        for (std::int64_t line = lo; line < hi; ++line) envelope_pass(base + line * nx, nx, 1, sp.sx * sp.sx, s);
    });
    // y lines: one per (i, k)
    detail::parallel_for(nz, threads, [&](std::int64_t lo, std::int64_t hi) {
        LineScratch s(ny);
        for (std::int64_t k = lo; k < hi; ++k)
            for (std::int64_t i = 0; i < nx; ++i) envelope_pass(base + i + nx * ny * k, ny, nx, sp.sy * sp.sy, s);
    });
    // z lines: one per (i, j)
    detail::parallel_for(ny, threads, [&](std::int64_t lo, std::int64_t hi) {
        LineScratch s(nz);
        for (std::int64_t j = lo; j < hi; ++j)
            for (std::int64_t i = 0; i < nx; ++i) envelope_pass(base + i + nx * j, nz, nx * ny, sp.sz * sp.sz, s);
    });
    return out;
}

DistanceField ltdt(const BinaryMask& m, int threads) {
    const auto background = mask_complement(m);
    if (background.empty()) diagnostic("ltdt: mask has no background voxels; distances are +inf");
    DistanceField out = squared_distance_to(background, threads);
    for (auto& x : out.data()) x = std::sqrt(x);
    return out;
}

DistanceField sltdt(const BinaryMask& m, int threads) {
    const std::int64_t fg = m.count();
    const auto n = static_cast<std::int64_t>(m.size());
    if (fg == 0) {
        diagnostic("sltdt: mask has no foreground voxels; distances are -inf");
        return DistanceField(m.dims(), m.spacing(), -kInf);
    }
    if (fg == n) {
        diagnostic("sltdt: mask has no background voxels; distances are +inf");
        return DistanceField(m.dims(), m.spacing(), kInf);
    }
    const auto background = mask_complement(m);
    const DistanceField inside = squared_distance_to(background, threads);
    const DistanceField outside = squared_distance_to(m, threads);
    DistanceField out(m.dims(), m.spacing(), 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
        out[i] = m[i] ? std::sqrt(inside[i]) : -std::sqrt(outside[i]);
    }
    return out;
}

}  // namespace geolmk
