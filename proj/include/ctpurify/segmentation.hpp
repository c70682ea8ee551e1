#pragma once

#include "ctpurify/core.hpp"

#include <algorithm>

namespace ctpurify {

struct OtsuResult {
    double threshold = 0.0;               ///< bin edge k / bins
    double between_class_variance = 0.0;  ///< in intensity units squared
    int histogram_bins = 0;
};

struct SegmentationParams {
    int bins = 256;
    Index min_lung_area = 50;
    /// Filled-foreground components smaller than this fraction of the image are background specks.
    double min_body_fraction = 0.02;
};

/// Histogram bin of a [0, 1] value; 1.0 lands in the last bin.
inline int histogram_bin(double v, int bins) {
    const int b = static_cast<int>(std::floor(v * bins));
    return std::clamp(b, 0, bins - 1);
}

/// Otsu's threshold over a `bins`-bin histogram of [0, 1]. Candidates are the interior bin
/// edges k / bins; pixels in bins >= k form the upper class. Ties go to the lower threshold.
OtsuResult otsu_threshold(const Image& img, int bins = 256);

/// pixel >= threshold -> 1.
BinaryMask binarize(const Image& img, double threshold);

struct FloodFillResult {
    BinaryMask background;  ///< 0-pixels 4-connected to a corner
    BinaryMask filled;      ///< complement of background: foreground plus promoted holes
};

FloodFillResult flood_fill_background(const BinaryMask& mask);

/// 4-connected component labels (0 = not in mask, 1..n otherwise) and per-label areas.
struct Components {
    Grid<std::int32_t> labels;
    std::vector<Index> areas;  // areas[k - 1] belongs to label k
};
Components connected_components(const BinaryMask& mask);

/// Holes of the body (filled AND NOT raw), minus components below `min_area`.
BinaryMask lung_region(const BinaryMask& body_with_holes, const BinaryMask& filled_body, Index min_area = 50);

/// Per-pixel max under Background < Lung < Body.
RegionMask common_mask(const RegionMask& uldct_mask, const RegionMask& ndct_mask);

/// otsu -> binarize -> flood fill -> body speck removal -> lung holes.
RegionMask segment(const Image& img, const SegmentationParams& params = {});

}  // namespace ctpurify
