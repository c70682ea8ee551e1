#pragma once

#include "ctpurify/core.hpp"

namespace ctpurify {

/// Modified (high-contrast) Shepp-Logan head phantom, values in [0, 1].
Image shepp_logan(Index size);

struct LungPhantomOptions {
    Index size = 256;
    std::uint64_t seed = 0;  ///< vessel layout
    /// Rigid shift in pixels and lung scale, to mimic motion between two acquisitions.
    double shift_x = 0.0;
    double shift_y = 0.0;
    double lung_scale = 1.0;
};

struct LungPhantom {
    Image image;
    RegionMask truth;  ///< Lung excludes vessel pixels, which count as Body
};

/// Chest-like slice: body ellipse (0.5) with two dark lungs (0.05) carrying vessel segments
/// (0.7), and rib arcs (0.9) inside the body wall. Pixels are sampled at their centers.
LungPhantom lung_phantom(const LungPhantomOptions& opts);

inline constexpr Index kMinPhantomSize = 64;

}  // namespace ctpurify
