#include "ctpurify/metrics.hpp"

#include "ctpurify/segmentation.hpp"

#include <limits>

namespace ctpurify {

std::optional<RegionStats> region_stats(const Image& img, const RegionMask& mask, Region region) {
    require_same_shape(img.pixels, mask.labels, "region_stats");
    const auto code = static_cast<std::uint8_t>(region);
    RegionStats s;
    s.region = region;
    s.min = std::numeric_limits<double>::infinity();
    s.max = -std::numeric_limits<double>::infinity();
    // Welford update keeps the variance exact enough for near-constant regions.
    double m2 = 0.0;
    for (Index i = 0; i < img.size(); ++i) {
        if (mask.labels.data()[i] != code) continue;
        const double v = img.pixels.data()[i];
        ++s.pixel_count;
        const double delta = v - s.mean;
        s.mean += delta / static_cast<double>(s.pixel_count);
        m2 += delta * (v - s.mean);
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    if (s.pixel_count == 0) return std::nullopt;
    s.std = std::sqrt(std::max(0.0, m2 / static_cast<double>(s.pixel_count)));
    s.mean = std::clamp(s.mean, s.min, s.max);
    return s;
}

std::vector<RegionStats> region_stats(const Image& img, const RegionMask& mask) {
    std::vector<RegionStats> out;
    for (Region r : kAllRegions)
        if (auto s = region_stats(img, mask, r)) out.push_back(*s);
    return out;
}

std::vector<double> region_histogram(const Image& img, const RegionMask& mask, Region region, int bins) {
    require_same_shape(img.pixels, mask.labels, "region_histogram");
    if (bins < 1) throw InvalidArgument("region_histogram: bins must be positive");
    const auto code = static_cast<std::uint8_t>(region);
    std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
    Index n = 0;
    for (Index i = 0; i < img.size(); ++i) {
        if (mask.labels.data()[i] != code) continue;
        h[static_cast<std::size_t>(histogram_bin(img.pixels.data()[i], bins))] += 1.0;
        ++n;
    }
    if (n == 0) throw InvalidArgument(std::string("region_histogram: region '") + region_name(region) + "' is empty");
    for (auto& v : h) v /= static_cast<double>(n);
    return h;
}

double wasserstein_1d(const std::vector<double>& hist_a, const std::vector<double>& hist_b) {
    if (hist_a.size() != hist_b.size() || hist_a.empty())
        throw InvalidArgument("wasserstein_1d: histograms must have the same non-zero length");
    const auto bins = hist_a.size();
    if (bins == 1) return 0.0;
    // With bin centers spaced 1/(bins-1) apart across [0, 1], W1 is the CDF gap summed over
    // the bins-1 steps, times the spacing.
    double cdf_a = 0.0, cdf_b = 0.0, acc = 0.0;
    for (std::size_t i = 0; i + 1 < bins; ++i) {
        cdf_a += hist_a[i];
        cdf_b += hist_b[i];
        acc += std::abs(cdf_a - cdf_b);
    }
    return acc / static_cast<double>(bins - 1);
}

HistDistance wasserstein_1d(const Image& a, const RegionMask& mask_a, Region region_a, const Image& b,
                            const RegionMask& mask_b, Region region_b, int bins) {
    if (bins < 2) throw InvalidArgument("wasserstein_1d: need at least 2 bins");
    return {bins, wasserstein_1d(region_histogram(a, mask_a, region_a, bins), region_histogram(b, mask_b, region_b, bins))};
}

double rmse(const Image& a, const Image& b) {
    require_same_shape(a.pixels, b.pixels, "rmse");
    if (a.size() == 0) throw InvalidArgument("rmse: empty image");
    return std::sqrt((a.pixels.cast<double>() - b.pixels.cast<double>()).square().mean());
}

double rmse(const Image& a, const Image& b, const RegionMask& mask, Region region) {
    require_same_shape(a.pixels, b.pixels, "rmse");
    require_same_shape(a.pixels, mask.labels, "rmse");
    const auto sel = (mask.labels == static_cast<std::uint8_t>(region));
    const Index n = sel.count();
    if (n == 0) throw InvalidArgument(std::string("rmse: region '") + region_name(region) + "' is empty");
    const Grid<double> d2 = (a.pixels.cast<double>() - b.pixels.cast<double>()).square();
    return std::sqrt(sel.select(d2, 0.0).sum() / static_cast<double>(n));
}

}  // namespace ctpurify
