#pragma once

#include "ctpurify/core.hpp"

#include <optional>

namespace ctpurify {

struct RegionStats {
    Region region = Region::Background;
    Index pixel_count = 0;
    double mean = 0.0;
    double std = 0.0;  ///< population standard deviation
    double min = 0.0;
    double max = 0.0;
};

/// Stats for each non-empty region, in label order. Empty regions are skipped.
std::vector<RegionStats> region_stats(const Image& img, const RegionMask& mask);

/// Stats for one region, or nullopt when it has no pixels.
std::optional<RegionStats> region_stats(const Image& img, const RegionMask& mask, Region region);

struct HistDistance {
    int bins = 0;
    double distance = 0.0;
};

/// 1-D Wasserstein distance between the normalized intensity histograms of two masked
/// regions: mean absolute CDF difference over the bin grid, so two deltas at 0 and 1 are 1 apart.
HistDistance wasserstein_1d(const Image& a, const RegionMask& mask_a, Region region_a, const Image& b,
                            const RegionMask& mask_b, Region region_b, int bins = 128);

/// Same, on histograms that are already built.
double wasserstein_1d(const std::vector<double>& hist_a, const std::vector<double>& hist_b);

/// Normalized histogram of the pixels of `region`.
std::vector<double> region_histogram(const Image& img, const RegionMask& mask, Region region, int bins);

/// RMSE over the whole image, or over one region of `mask`.
double rmse(const Image& a, const Image& b);
double rmse(const Image& a, const Image& b, const RegionMask& mask, Region region);

}  // namespace ctpurify
