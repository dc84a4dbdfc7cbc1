#pragma once

// Image-level decisions built on patch predictions:
//   * proportion rule: an image is positive ("healthy") iff the fraction of
//     its tiles predicted positive reaches a learned threshold theta;
//   * region rule: an image is positive ("MVP") iff some connected group of
//     positive tiles has at least m cells.

#include <dfdl/classifier.hpp>
#include <dfdl/image.hpp>
#include <dfdl/model.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace dfdl {

struct ThresholdModel {
    double theta = 0.5;
    Index positive_class = 0;
};

/// Per-tile class indices, row-major.
struct LabelGrid {
    Index rows = 0;
    Index cols = 0;
    std::vector<Index> labels;

    Index at(Index r, Index c) const { return labels[static_cast<std::size_t>(r * cols + c)]; }

    static LabelGrid from_rows(const std::vector<std::vector<Index>>& rows)
    {
        LabelGrid g;
        g.rows = static_cast<Index>(rows.size());
        g.cols = rows.empty() ? 0 : static_cast<Index>(rows.front().size());
        for (const auto& row : rows) {
            require(static_cast<Index>(row.size()) == g.cols, ErrorCode::invalid_argument,
                    "LabelGrid: ragged rows");
            g.labels.insert(g.labels.end(), row.begin(), row.end());
        }
        return g;
    }
};

struct Cell {
    Index row = 0;
    Index col = 0;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct MvpRegion {
    std::vector<Cell> cells; ///< sorted row-major
    Index size() const noexcept { return static_cast<Index>(cells.size()); }
};

enum class Connectivity { four = 4, eight = 8 };

/// Classifies every tile of an image.
inline LabelGrid classify_tiles(const DfdlModel& model, const ImageRGB& image, Index side)
{
    const TiledImage tiled = tile_image(image, side);
    LabelGrid grid{tiled.grid.rows, tiled.grid.cols, {}};
    for (const auto& p : classify_patch_batch(model, tiled.samples)) grid.labels.push_back(p.label);
    return grid;
}

/// Fraction of cells labeled `positive_class`.
inline double positive_fraction(const LabelGrid& grid, Index positive_class)
{
    require(!grid.labels.empty(), ErrorCode::invalid_argument, "empty label grid");
    const auto hits = std::count(grid.labels.begin(), grid.labels.end(), positive_class);
    return static_cast<double>(hits) / static_cast<double>(grid.labels.size());
}

inline double healthy_proportion(const DfdlModel& model, const ImageRGB& image, Index side,
                                 Index positive_class = 0)
{
    return positive_fraction(classify_tiles(model, image, side), positive_class);
}

/// One-dimensional maximum-margin threshold on proportions (tau, is_positive).
/// Separable data yield the midpoint of the gap between classes; otherwise
/// the candidate with the fewest errors wins, then the widest margin, then
/// the smaller theta. Candidates are midpoints between consecutive distinct
/// values plus one point beyond each end of [0,1]-bounded data.
inline ThresholdModel learn_threshold(const std::vector<std::pair<double, bool>>& samples,
                                      Index positive_class = 0)
{
    const bool has_pos = std::any_of(samples.begin(), samples.end(), [](auto& s) { return s.second; });
    const bool has_neg = std::any_of(samples.begin(), samples.end(), [](auto& s) { return !s.second; });
    require(has_pos && has_neg, ErrorCode::invalid_argument,
            "learn_threshold: both classes must be present");

    std::vector<double> values;
    for (const auto& [tau, label] : samples) {
        require(std::isfinite(tau), ErrorCode::invalid_argument, "learn_threshold: non-finite tau");
        values.push_back(tau);
    }
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());

    struct Candidate {
        double theta;
        double margin;
    };
    std::vector<Candidate> candidates;
    const double lo = std::min(0.0, values.front());
    const double hi = std::max(1.0, values.back());
    candidates.push_back({(lo + values.front()) / 2, (values.front() - lo) / 2});
    for (std::size_t i = 0; i + 1 < values.size(); ++i)
        candidates.push_back({(values[i] + values[i + 1]) / 2, (values[i + 1] - values[i]) / 2});
    if (values.back() < hi)
        candidates.push_back({(values.back() + hi) / 2, (hi - values.back()) / 2});

    auto errors = [&](double theta) {
        std::size_t e = 0;
        for (const auto& [tau, positive] : samples)
            if ((tau >= theta) != positive) ++e;
        return e;
    };

    std::optional<Candidate> best;
    std::size_t best_errors = std::numeric_limits<std::size_t>::max();
    for (const auto& c : candidates) {
        const std::size_t e = errors(c.theta);
        const bool better = !best || e < best_errors ||
                            (e == best_errors && (c.margin > best->margin ||
                                                  (c.margin == best->margin && c.theta < best->theta)));
        if (better) {
            best = c;
            best_errors = e;
        }
    }
    return ThresholdModel{best->theta, positive_class};
}

inline bool threshold_decision(double tau, double theta) { return tau >= theta; }

/// True iff the image is assigned the positive class of `threshold`.
inline bool classify_image(const DfdlModel& model, const ThresholdModel& threshold,
                           const ImageRGB& image, Index side)
{
    return threshold_decision(healthy_proportion(model, image, side, threshold.positive_class),
                              threshold.theta);
}

/// Majority vote over tile labels; ties go to the lowest class index.
inline Index majority_label(const LabelGrid& grid, Index class_count)
{
    std::vector<std::size_t> votes(static_cast<std::size_t>(class_count), 0);
    for (Index l : grid.labels) ++votes[static_cast<std::size_t>(l)];
    return static_cast<Index>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

/// All maximal connected groups of cells labeled `target`, in order of their
/// first cell (row-major).
inline std::vector<MvpRegion> connected_regions(const LabelGrid& grid, Index target,
                                                Connectivity conn = Connectivity::four)
{
    std::vector<MvpRegion> out;
    std::vector<char> seen(grid.labels.size(), 0);
    std::vector<Cell> stack;
    static constexpr int dr[8] = {-1, 1, 0, 0, -1, -1, 1, 1};
    static constexpr int dc[8] = {0, 0, -1, 1, -1, 1, -1, 1};
    const int neighbours = conn == Connectivity::four ? 4 : 8;
    for (Index r = 0; r < grid.rows; ++r)
        for (Index c = 0; c < grid.cols; ++c) {
            const auto idx = static_cast<std::size_t>(r * grid.cols + c);
            if (seen[idx] || grid.labels[idx] != target) continue;
            MvpRegion region;
            seen[idx] = 1;
            stack.push_back({r, c});
            while (!stack.empty()) {
                const Cell cell = stack.back();
                stack.pop_back();
                region.cells.push_back(cell);
                for (int n = 0; n < neighbours; ++n) {
                    const Index nr = cell.row + dr[n];
                    const Index nc = cell.col + dc[n];
                    if (nr < 0 || nc < 0 || nr >= grid.rows || nc >= grid.cols) continue;
                    const auto nidx = static_cast<std::size_t>(nr * grid.cols + nc);
                    if (seen[nidx] || grid.labels[nidx] != target) continue;
                    seen[nidx] = 1;
                    stack.push_back({nr, nc});
                }
            }
            std::sort(region.cells.begin(), region.cells.end());
            out.push_back(std::move(region));
        }
    return out;
}

struct MvpDetection {
    std::vector<MvpRegion> regions;
    bool positive = false;
};

/// Regions of at least `m` connected positive cells; positive iff any survive.
inline MvpDetection detect_regions(const LabelGrid& grid, Index positive_class, Index m,
                                   Connectivity conn = Connectivity::four)
{
    require(m >= 1, ErrorCode::invalid_argument, "region size m must be >= 1");
    MvpDetection det;
    for (auto& region : connected_regions(grid, positive_class, conn))
        if (region.size() >= m) det.regions.push_back(std::move(region));
    det.positive = !det.regions.empty();
    return det;
}

inline MvpDetection detect_mvp(const DfdlModel& model, const ImageRGB& image, Index side, Index m,
                               Index positive_class, Connectivity conn = Connectivity::four)
{
    require(m >= 1, ErrorCode::invalid_argument, "region size m must be >= 1");
    return detect_regions(classify_tiles(model, image, side), positive_class, m, conn);
}

struct RegionSweepPoint {
    Index m = 0;
    double false_alarm = 0.0; ///< negatives called positive
    double miss = 0.0;        ///< positives called negative
};

/// Operating points for m = 1..max_m on labeled grids.
inline std::vector<RegionSweepPoint> region_size_sweep(
    const std::vector<std::pair<LabelGrid, bool>>& training, Index positive_class, Index max_m = 20,
    Connectivity conn = Connectivity::four)
{
    std::size_t positives = 0;
    for (const auto& t : training) positives += t.second ? 1 : 0;
    const std::size_t negatives = training.size() - positives;
    require(positives > 0 && negatives > 0, ErrorCode::invalid_argument,
            "region size selection needs both positive and negative images");

    std::vector<Index> largest;
    for (const auto& [grid, label] : training) {
        Index big = 0;
        for (const auto& r : connected_regions(grid, positive_class, conn))
            big = std::max(big, r.size());
        largest.push_back(big);
    }
    std::vector<RegionSweepPoint> out;
    for (Index m = 1; m <= max_m; ++m) {
        std::size_t fa = 0, miss = 0;
        for (std::size_t i = 0; i < training.size(); ++i) {
            const bool detected = largest[i] >= m;
            if (detected && !training[i].second) ++fa;
            if (!detected && training[i].second) ++miss;
        }
        out.push_back({m, static_cast<double>(fa) / static_cast<double>(negatives),
                       static_cast<double>(miss) / static_cast<double>(positives)});
    }
    return out;
}

/// The m whose (false alarm, miss) point is closest to the origin; ties go
/// to the smaller m.
inline Index select_m_from_grids(const std::vector<std::pair<LabelGrid, bool>>& training,
                                 Index positive_class, Index max_m = 20,
                                 Connectivity conn = Connectivity::four)
{
    const auto sweep = region_size_sweep(training, positive_class, max_m, conn);
    Index best = sweep.front().m;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& p : sweep) {
        const double dist = std::hypot(p.false_alarm, p.miss);
        if (dist < best_dist) {
            best_dist = dist;
            best = p.m;
        }
    }
    return best;
}

inline Index select_m(const DfdlModel& model, const std::vector<std::pair<ImageRGB, bool>>& images,
                      Index side, Index positive_class, Connectivity conn = Connectivity::four)
{
    std::vector<std::pair<LabelGrid, bool>> grids;
    grids.reserve(images.size());
    for (const auto& [img, label] : images) grids.emplace_back(classify_tiles(model, img, side), label);
    return select_m_from_grids(grids, positive_class, 20, conn);
}

} // namespace dfdl
