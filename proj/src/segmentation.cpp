#include "ctpurify/segmentation.hpp"

#include <array>
#include <queue>

namespace ctpurify {

OtsuResult otsu_threshold(const Image& img, int bins) {
    if (bins < 2) throw InvalidArgument("otsu_threshold: need at least 2 bins");
    if (img.size() == 0) throw InvalidArgument("otsu_threshold: empty image");
    if (img.pixels.minCoeff() == img.pixels.maxCoeff())
        throw ConstantImageError("otsu_threshold: constant image has no threshold");

    std::vector<std::int64_t> hist(static_cast<std::size_t>(bins), 0);
    for (Index i = 0; i < img.size(); ++i) ++hist[static_cast<std::size_t>(histogram_bin(img.pixels.data()[i], bins))];

    std::int64_t total_n = 0;
    __int128 total_s = 0;
    for (int b = 0; b < bins; ++b) {
        total_n += hist[static_cast<std::size_t>(b)];
        total_s += static_cast<__int128>(b) * hist[static_cast<std::size_t>(b)];
    }

    // Between-class variance in bin-index units is (s0*n1 - s1*n0)^2 / (N^2 n0 n1); the
    // constant N^2 is dropped for the argmax.
    std::int64_t n0 = 0;
    __int128 s0 = 0;
    int best_k = -1;
    double best_score = -1.0;
    for (int k = 1; k < bins; ++k) {
        n0 += hist[static_cast<std::size_t>(k - 1)];
        s0 += static_cast<__int128>(k - 1) * hist[static_cast<std::size_t>(k - 1)];
        const std::int64_t n1 = total_n - n0;
        if (n0 == 0 || n1 == 0) continue;
        const __int128 s1 = total_s - s0;
        const double d = static_cast<double>(s0 * n1 - s1 * n0);
        const double score = d * d / (static_cast<double>(n0) * static_cast<double>(n1));
        if (score > best_score) {
            best_score = score;
            best_k = k;
        }
    }
    if (best_k < 0) throw ConstantImageError("otsu_threshold: all pixels fall in one histogram bin");

    const double n = static_cast<double>(total_n);
    OtsuResult r;
    r.threshold = static_cast<double>(best_k) / bins;
    r.between_class_variance = best_score / (n * n) / (static_cast<double>(bins) * bins);
    r.histogram_bins = bins;
    return r;
}

BinaryMask binarize(const Image& img, double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw InvalidArgument("binarize: threshold must be in [0, 1]");
    return (img.pixels.cast<double>() >= threshold).cast<std::uint8_t>();
}

// Scanline span fill from the four corners over 0-pixels.
FloodFillResult flood_fill_background(const BinaryMask& mask) {
    const Index h = mask.rows(), w = mask.cols();
    FloodFillResult r;
    r.background = BinaryMask::Zero(h, w);
    if (h == 0 || w == 0) {
        r.filled = r.background;
        return r;
    }
    auto open = [&](Index y, Index x) { return mask(y, x) == 0 && r.background(y, x) == 0; };

    std::vector<std::array<Index, 2>> stack;
    const std::array<std::array<Index, 2>, 4> corners{{{0, 0}, {0, w - 1}, {h - 1, 0}, {h - 1, w - 1}}};
    for (const auto& c : corners)
        if (open(c[0], c[1])) stack.push_back(c);

    while (!stack.empty()) {
        auto [y, x] = stack.back();
        stack.pop_back();
        if (!open(y, x)) continue;
        Index left = x, right = x;
        while (left > 0 && open(y, left - 1)) --left;
        while (right + 1 < w && open(y, right + 1)) ++right;
        for (Index xx = left; xx <= right; ++xx) r.background(y, xx) = 1;
        for (Index ny : {y - 1, y + 1}) {
            if (ny < 0 || ny >= h) continue;
            bool in_run = false;
            for (Index xx = left; xx <= right; ++xx) {
                if (open(ny, xx)) {
                    if (!in_run) stack.push_back({ny, xx});
                    in_run = true;
                } else {
                    in_run = false;
                }
            }
        }
    }
    r.filled = 1 - r.background;
    return r;
}

Components connected_components(const BinaryMask& mask) {
    const Index h = mask.rows(), w = mask.cols();
    Components c;
    c.labels = Grid<std::int32_t>::Zero(h, w);
    std::queue<std::array<Index, 2>> q;
    std::int32_t next = 0;
    for (Index y0 = 0; y0 < h; ++y0) {
        for (Index x0 = 0; x0 < w; ++x0) {
            if (mask(y0, x0) == 0 || c.labels(y0, x0) != 0) continue;
            const std::int32_t label = ++next;
            Index area = 0;
            c.labels(y0, x0) = label;
            q.push({y0, x0});
            while (!q.empty()) {
                auto [y, x] = q.front();
                q.pop();
                ++area;
                const std::array<std::array<Index, 2>, 4> nb{{{y - 1, x}, {y + 1, x}, {y, x - 1}, {y, x + 1}}};
                for (auto [ny, nx] : nb) {
                    if (ny < 0 || nx < 0 || ny >= h || nx >= w) continue;
                    if (mask(ny, nx) == 0 || c.labels(ny, nx) != 0) continue;
                    c.labels(ny, nx) = label;
                    q.push({ny, nx});
                }
            }
            c.areas.push_back(area);
        }
    }
    return c;
}

namespace {

BinaryMask drop_small_components(const BinaryMask& mask, Index min_area) {
    if (min_area <= 1) return mask;
    const auto cc = connected_components(mask);
    BinaryMask out = mask;
    for (Index i = 0; i < out.size(); ++i) {
        const auto l = cc.labels.data()[i];
        if (l > 0 && cc.areas[static_cast<std::size_t>(l - 1)] < min_area) out.data()[i] = 0;
    }
    return out;
}

}  // namespace

BinaryMask lung_region(const BinaryMask& body_with_holes, const BinaryMask& filled_body, Index min_area) {
    require_same_shape(body_with_holes, filled_body, "lung_region");
    if (((body_with_holes != 0) && (filled_body == 0)).any())
        throw InvalidArgument("lung_region: filled body must contain the raw body");
    const BinaryMask holes = ((filled_body != 0) && (body_with_holes == 0)).cast<std::uint8_t>();
    return drop_small_components(holes, min_area);
}

RegionMask common_mask(const RegionMask& uldct_mask, const RegionMask& ndct_mask) {
    require_same_shape(uldct_mask.labels, ndct_mask.labels, "common_mask");
    // Codes are 0/1/2 for Background/Body/Lung; rank them Background < Lung < Body.
    auto rank = [](const Grid<std::uint8_t>& l) {
        return (l == 1).select(Grid<std::uint8_t>::Constant(l.rows(), l.cols(), 2), (l == 2).cast<std::uint8_t>());
    };
    const Grid<std::uint8_t> top = rank(uldct_mask.labels).max(rank(ndct_mask.labels));
    RegionMask out;
    out.labels = (top == 2).select(Grid<std::uint8_t>::Constant(top.rows(), top.cols(), 1),
                                   (top == 1).cast<std::uint8_t>() * std::uint8_t(2));
    return out;
}

RegionMask segment(const Image& img, const SegmentationParams& params) {
    const auto otsu = otsu_threshold(img, params.bins);
    const BinaryMask raw = binarize(img, otsu.threshold);
    const auto ff = flood_fill_background(raw);

    const auto min_body = static_cast<Index>(std::ceil(params.min_body_fraction * static_cast<double>(img.size())));
    const BinaryMask filled = drop_small_components(ff.filled, min_body);
    const BinaryMask body_raw = (raw != 0 && filled != 0).cast<std::uint8_t>();
    const BinaryMask lung = lung_region(body_raw, filled, params.min_lung_area);

    RegionMask out(img.height(), img.width());
    for (Index i = 0; i < img.size(); ++i) {
        Region r = Region::Background;
        if (lung.data()[i]) r = Region::Lung;
        else if (filled.data()[i]) r = Region::Body;
        out.labels.data()[i] = static_cast<std::uint8_t>(r);
    }
    return out;
}

}  // namespace ctpurify
