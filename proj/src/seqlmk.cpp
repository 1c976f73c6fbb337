#include "geolmk/seqlmk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace geolmk {

namespace {

std::int64_t crop_rows(const BoundarySequence& s) { return s.crop_z1 - s.crop_z0 + 1; }
std::int64_t crop_cols(const BoundarySequence& s) { return s.crop_y1 - s.crop_y0 + 1; }

// Source crop row / column for an original z / y.
std::int64_t source_row(const BoundarySequence& s, std::int64_t z) {
    return s.frame.superior_is_high_z ? s.crop_z1 - z : z - s.crop_z0;
}
std::int64_t source_col(const BoundarySequence& s, std::int64_t y) {
    return s.frame.anterior_is_low_y ? y - s.crop_y0 : s.crop_y1 - y;
}
std::int64_t original_z(const BoundarySequence& s, std::int64_t sr) {
    return s.frame.superior_is_high_z ? s.crop_z1 - sr : s.crop_z0 + sr;
}
std::int64_t original_y(const BoundarySequence& s, std::int64_t sc) {
    return s.frame.anterior_is_low_y ? s.crop_y0 + sc : s.crop_y1 - sc;
}

// Centre-aligned nearest-neighbour maps between n source samples and `out`
// scaled samples.
int forward(std::int64_t src, std::int64_t n, int out) {
    return static_cast<int>(std::floor((static_cast<double>(src) + 0.5) * out / static_cast<double>(n)));
}
std::int64_t inverse(int dst, std::int64_t n, int out) {
    return static_cast<std::int64_t>(std::floor((dst + 0.5) * static_cast<double>(n) / out));
}

void check_labels(const std::array<std::uint8_t, kSeqRows>& labels) {
    int n = 0;
    for (auto l : labels) {
        if (l > 1) throw ValidationError("sequence label values must be 0 or 1");
        n += l;
    }
    if (n > static_cast<int>(kCloseLandmarks.size())) {
        throw ValidationError("sequence has " + std::to_string(n) + " landmark rows; at most 5 allowed");
    }
}

}  // namespace

int BoundarySequence::flagged() const noexcept {
    int n = 0;
    for (auto l : labels) n += l != 0;
    return n;
}

void BoundarySequence::validate() const {
    check_labels(labels);
    for (int y = 0; y < kSeqRows; ++y) {
        const auto c = profile[static_cast<std::size_t>(y)];
        if (c != kEmptyRow && (c < 0 || c >= kSeqCols)) {
            throw ValidationError("profile column " + std::to_string(c) + " at row " + std::to_string(y) +
                                  " outside [0,64)");
        }
        if (labels[static_cast<std::size_t>(y)] && c == kEmptyRow) {
            throw ValidationError("landmark row " + std::to_string(y) + " has an empty profile");
        }
    }
    if (!image.empty() && image.size() != static_cast<std::size_t>(kSeqRows * kSeqCols)) {
        throw ValidationError("boundary image must be 64x64");
    }
    if (crop_y1 < crop_y0 || crop_z1 < crop_z0) throw ValidationError("crop window is inverted");
}

BoundarySequence extract_boundary_sequence(const BinaryMask& m, const LandmarkSet& lm, const AnatomicalFrame& frame) {
    const auto* me = lm.present(LandmarkName::Me);
    if (me == nullptr) throw ValidationError("extract_boundary_sequence: Menton is not present");
    lm.validate(m.dims());
    const Dims d = m.dims();
    const std::int64_t x = me->voxel.i;

    std::int64_t y0 = std::numeric_limits<std::int64_t>::max(), y1 = -1;
    std::int64_t z0 = std::numeric_limits<std::int64_t>::max(), z1 = -1;
    for (std::int64_t k = 0; k < d.nz; ++k)
        for (std::int64_t j = 0; j < d.ny; ++j)
            if (m[flat({x, j, k}, d)]) {
                y0 = std::min(y0, j);
                y1 = std::max(y1, j);
                z0 = std::min(z0, k);
                z1 = std::max(z1, k);
            }
    if (y1 < 0) {
        throw ValidationError("extract_boundary_sequence: sagittal slice x=" + std::to_string(x) + " is empty");
    }

    BoundarySequence s;
    s.frame = frame;
    s.source_slice = x;
    s.crop_y0 = y0 - 2;
    s.crop_y1 = y1 + 2;
    s.crop_z0 = z0 - 2;
    s.crop_z1 = z1 + 2;
    const std::int64_t rows = crop_rows(s);
    const std::int64_t cols = crop_cols(s);
    s.row_scale = static_cast<double>(kSeqRows) / static_cast<double>(rows);
    s.col_scale = static_cast<double>(kSeqCols) / static_cast<double>(cols);

    // In-plane boundary in crop coordinates (source row, source col).
    std::vector<std::uint8_t> boundary(static_cast<std::size_t>(rows * cols), 0);
    auto fg = [&](std::int64_t j, std::int64_t k) { return m.test({x, j, k}); };
    for (std::int64_t k = s.crop_z0; k <= s.crop_z1; ++k)
        for (std::int64_t j = s.crop_y0; j <= s.crop_y1; ++j) {
            if (!fg(j, k)) continue;
            if (fg(j - 1, k) && fg(j + 1, k) && fg(j, k - 1) && fg(j, k + 1)) continue;
            boundary[static_cast<std::size_t>(source_row(s, k) * cols + source_col(s, j))] = 1;
        }

    // Nearest-neighbour resample, plus a forward splat so boundary pixels
    // survive when the crop is larger than 64 along an axis.
    s.image.assign(static_cast<std::size_t>(kSeqRows * kSeqCols), 0);
    for (int r = 0; r < kSeqRows; ++r)
        for (int c = 0; c < kSeqCols; ++c)
            if (boundary[static_cast<std::size_t>(inverse(r, rows, kSeqRows) * cols + inverse(c, cols, kSeqCols))])
                s.image[static_cast<std::size_t>(r * kSeqCols + c)] = 1;
    for (std::int64_t sr = 0; sr < rows; ++sr)
        for (std::int64_t sc = 0; sc < cols; ++sc)
            if (boundary[static_cast<std::size_t>(sr * cols + sc)])
                s.image[static_cast<std::size_t>(forward(sr, rows, kSeqRows) * kSeqCols + forward(sc, cols, kSeqCols))] = 1;

    for (int r = 0; r < kSeqRows; ++r) {
        s.profile[static_cast<std::size_t>(r)] = kEmptyRow;
        for (int c = 0; c < kSeqCols; ++c)
            if (s.image[static_cast<std::size_t>(r * kSeqCols + c)]) {
                s.profile[static_cast<std::size_t>(r)] = static_cast<std::int16_t>(c);
                break;
            }
    }

    std::array<std::optional<LandmarkName>, kSeqRows> owner{};
    for (auto name : kCloseLandmarks) {
        const auto* e = lm.present(name);
        if (e == nullptr) continue;
        const std::int64_t z = e->voxel.k;
        if (z < s.crop_z0 || z > s.crop_z1) {
            throw ValidationError("extract_boundary_sequence: " + std::string(landmark_name(name)) +
                                  " lies outside the slice crop");
        }
        const int r = forward(source_row(s, z), rows, kSeqRows);
        auto& o = owner[static_cast<std::size_t>(r)];
        if (o) {
            throw ValidationError("extract_boundary_sequence: " + std::string(landmark_name(*o)) + " and " +
                                  std::string(landmark_name(name)) + " collapse onto row " + std::to_string(r));
        }
        if (s.profile[static_cast<std::size_t>(r)] == kEmptyRow) {
            throw ValidationError("extract_boundary_sequence: " + std::string(landmark_name(name)) + " falls on row " +
                                  std::to_string(r) + " with no boundary");
        }
        o = name;
        s.labels[static_cast<std::size_t>(r)] = 1;
    }
    return s;
}

std::vector<SequenceLandmark> decode_sequence(const BoundarySequence& s) {
    s.validate();
    std::vector<int> rows;
    for (int r = 0; r < kSeqRows; ++r)
        if (s.labels[static_cast<std::size_t>(r)]) rows.push_back(r);
    if (rows.empty()) throw ValidationError("decode_sequence: no landmark rows flagged");

    const std::size_t offset = kCloseLandmarks.size() - rows.size();
    const std::int64_t src_rows = crop_rows(s);
    const std::int64_t src_cols = crop_cols(s);
    std::vector<SequenceLandmark> out;
    for (std::size_t n = 0; n < rows.size(); ++n) {
        const int r = rows[n];
        const int c = s.profile[static_cast<std::size_t>(r)];
        SequenceLandmark lm{kCloseLandmarks[offset + n], r, c, {}};
        lm.voxel = {s.source_slice, original_y(s, inverse(c, src_cols, kSeqCols)),
                    original_z(s, inverse(r, src_rows, kSeqRows))};
        out.push_back(lm);
    }
    return out;
}

LandmarkSet decode_sequence_landmarks(const BoundarySequence& s) {
    const auto decoded = decode_sequence(s);
    LandmarkSet out;
    for (auto name : kCloseLandmarks) {
        const auto it = std::find_if(decoded.begin(), decoded.end(), [&](const auto& d) { return d.name == name; });
        if (it == decoded.end()) {
            out.add(name, {}, false);
        } else {
            out.add(name, it->voxel, true);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd shape_features(const BoundarySequence& s) {
    s.validate();
    std::vector<int> rows;
    for (int r = 0; r < kSeqRows; ++r)
        if (s.labels[static_cast<std::size_t>(r)]) rows.push_back(r);
    if (rows.size() != kCloseLandmarks.size()) {
        throw ValidationError("shape features need exactly 5 landmark rows, got " + std::to_string(rows.size()));
    }
    Eigen::VectorXd f(kShapeFeatures);
    for (int r = 0; r < kSeqRows; ++r) {
        // Nearest non-empty row; the upper one wins a tie.
        int best = -1;
        for (int dist = 0; dist < kSeqRows && best < 0; ++dist) {
            if (r - dist >= 0 && s.profile[static_cast<std::size_t>(r - dist)] != kEmptyRow) {
                best = r - dist;
            } else if (r + dist < kSeqRows && s.profile[static_cast<std::size_t>(r + dist)] != kEmptyRow) {
                best = r + dist;
            }
        }
        f[r] = best < 0 ? 0.0 : static_cast<double>(s.profile[static_cast<std::size_t>(best)]);
    }
    for (std::size_t n = 0; n < rows.size(); ++n) f[kSeqRows + static_cast<int>(n)] = rows[n];
    return f;
}

ShapeModel build_shape_model(std::span<const BoundarySequence> training) {
    if (training.size() < 3) {
        throw ValidationError("PCA augmentation needs at least 3 training sequences, got " +
                              std::to_string(training.size()));
    }
    const auto n = static_cast<Eigen::Index>(training.size());
    Eigen::MatrixXd x(kShapeFeatures, n);
    std::array<int, kSeqRows> empty_votes{};
    for (Eigen::Index c = 0; c < n; ++c) {
        const auto& s = training[static_cast<std::size_t>(c)];
        x.col(c) = shape_features(s);
        for (int r = 0; r < kSeqRows; ++r) empty_votes[static_cast<std::size_t>(r)] += s.profile[static_cast<std::size_t>(r)] == kEmptyRow;
    }

    ShapeModel model;
    model.meta = training.front();
    model.meta.source_slice = -1;
    for (int r = 0; r < kSeqRows; ++r) model.empty_rows[static_cast<std::size_t>(r)] = 2 * empty_votes[static_cast<std::size_t>(r)] > n;
    model.mean = x.rowwise().mean();
    const Eigen::MatrixXd centered = x.colwise() - model.mean;
    const Eigen::MatrixXd cov = centered * centered.transpose() / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::VectorXd& values = eig.eigenvalues();  // ascending
    const double top = values.maxCoeff();
    std::vector<Eigen::Index> keep;
    if (top > 1e-12) {
        for (Eigen::Index i = values.size() - 1; i >= 0; --i)
            if (values[i] > 1e-10 * top) keep.push_back(i);
    }
    model.components.resize(kShapeFeatures, static_cast<Eigen::Index>(keep.size()));
    model.sigma.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
        model.components.col(static_cast<Eigen::Index>(c)) = eig.eigenvectors().col(keep[c]);
        model.sigma[static_cast<Eigen::Index>(c)] = std::sqrt(values[keep[c]]);
    }
    return model;
}

Eigen::VectorXd project(const ShapeModel& model, const BoundarySequence& s) {
    return model.components.transpose() * (shape_features(s) - model.mean);
}

BoundarySequence reconstruct(const ShapeModel& model, const Eigen::VectorXd& coefficients) {
    if (coefficients.size() != model.components.cols()) {
        throw ValidationError("reconstruct: expected " + std::to_string(model.components.cols()) + " coefficients");
    }
    const Eigen::VectorXd f = model.mean + model.components * coefficients;

    BoundarySequence s = model.meta;
    s.labels.fill(0);
    std::array<int, 5> rows{};
    for (int n = 0; n < 5; ++n) rows[static_cast<std::size_t>(n)] = std::clamp(static_cast<int>(std::lround(f[kSeqRows + n])), 0, kSeqRows - 1);
    for (std::size_t n = 1; n < rows.size(); ++n) rows[n] = std::max(rows[n], rows[n - 1] + 1);
    for (std::size_t n = rows.size(); n-- > 0;) {
        const int cap = kSeqRows - static_cast<int>(rows.size() - n);
        rows[n] = std::min(rows[n], n + 1 < rows.size() ? std::min(cap, rows[n + 1] - 1) : cap);
    }

    for (int r = 0; r < kSeqRows; ++r) {
        const auto col = static_cast<std::int16_t>(std::clamp(static_cast<int>(std::lround(f[r])), 0, kSeqCols - 1));
        s.profile[static_cast<std::size_t>(r)] = model.empty_rows[static_cast<std::size_t>(r)] ? kEmptyRow : col;
    }
    for (int r : rows) {
        s.labels[static_cast<std::size_t>(r)] = 1;
        if (s.profile[static_cast<std::size_t>(r)] == kEmptyRow)
            s.profile[static_cast<std::size_t>(r)] = static_cast<std::int16_t>(std::clamp(static_cast<int>(std::lround(f[r])), 0, kSeqCols - 1));
    }
    s.image.assign(static_cast<std::size_t>(kSeqRows * kSeqCols), 0);
    for (int r = 0; r < kSeqRows; ++r)
        if (s.profile[static_cast<std::size_t>(r)] != kEmptyRow)
            s.image[static_cast<std::size_t>(r * kSeqCols + s.profile[static_cast<std::size_t>(r)])] = 1;
    return s;
}

std::vector<Eigen::VectorXd> sample_coefficients(const ShapeModel& model, int count, double sigma_cap,
                                                 std::uint64_t seed) {
    if (count < 1) throw ValidationError("sample count must be >= 1");
    if (!(sigma_cap >= 0.0) || !std::isfinite(sigma_cap)) throw ValidationError("sigma cap must be finite and >= 0");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<Eigen::VectorXd> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int n = 0; n < count; ++n) {
        Eigen::VectorXd c(model.sigma.size());
        for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = unit(rng) * sigma_cap * model.sigma[i];
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<BoundarySequence> pca_augment(std::span<const BoundarySequence> training, int count, double sigma_cap,
                                          std::uint64_t seed) {
    const ShapeModel model = build_shape_model(training);
    std::vector<BoundarySequence> out;
    if (model.degenerate()) {
        diagnostic("pca_augment: training shapes are identical; returning jittered copies");
        if (count < 1) throw ValidationError("sample count must be >= 1");
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> jitter(-1, 1);
        const Eigen::VectorXd none(0);
        for (int n = 0; n < count; ++n) {
            BoundarySequence s = reconstruct(model, none);
            if (sigma_cap > 0.0) {
                for (int r = 0; r < kSeqRows; ++r) {
                    auto& c = s.profile[static_cast<std::size_t>(r)];
                    if (c == kEmptyRow) continue;
                    c = static_cast<std::int16_t>(std::clamp(c + jitter(rng), 0, kSeqCols - 1));
                }
                s.image.assign(static_cast<std::size_t>(kSeqRows * kSeqCols), 0);
                for (int r = 0; r < kSeqRows; ++r)
                    if (s.profile[static_cast<std::size_t>(r)] != kEmptyRow)
                        s.image[static_cast<std::size_t>(r * kSeqCols + s.profile[static_cast<std::size_t>(r)])] = 1;
            }
            out.push_back(std::move(s));
        }
        return out;
    }
    for (const auto& c : sample_coefficients(model, count, sigma_cap, seed)) out.push_back(reconstruct(model, c));
    return out;
}

}  // namespace geolmk
