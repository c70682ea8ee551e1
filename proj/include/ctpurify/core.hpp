#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctpurify {

using Index = Eigen::Index;

/// Row-major 2-D grid; rows are image lines (y), columns are x.
template <typename Scalar>
using Grid = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Meta = std::map<std::string, std::string>;

// ---------------------------------------------------------------------------
// Errors. Each class maps to its own CLI exit code.

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : Error {
    using Error::Error;
};
struct FormatError : Error {
    using Error::Error;
};
struct InvalidArgument : Error {
    using Error::Error;
};
struct DimensionMismatch : Error {
    using Error::Error;
};
struct ConstantImageError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct ManifestError : Error {
    using Error::Error;
};
struct ExternalToolError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------

/// Scalar image in normalized intensity units. Pipeline outputs stay in [0, 1].
template <typename Scalar>
struct BasicImage {
    Grid<Scalar> pixels;
    Meta meta;

    BasicImage() = default;
    explicit BasicImage(Grid<Scalar> p, Meta m = {}) : pixels(std::move(p)), meta(std::move(m)) {}
    BasicImage(Index height, Index width, Scalar fill = Scalar(0))
        : pixels(Grid<Scalar>::Constant(height, width, fill)) {}

    Index width() const { return pixels.cols(); }
    Index height() const { return pixels.rows(); }
    Index size() const { return pixels.size(); }
};

using Image = BasicImage<float>;

enum class Region : std::uint8_t { Background = 0, Body = 1, Lung = 2 };

inline const char* region_name(Region r) {
    switch (r) {
        case Region::Background: return "background";
        case Region::Body: return "body";
        case Region::Lung: return "lung";
    }
    return "unknown";
}

inline constexpr Region kAllRegions[] = {Region::Background, Region::Body, Region::Lung};

/// 0/1 per pixel.
using BinaryMask = Grid<std::uint8_t>;

/// Three-way labeling; codes are the on-disk format.
struct RegionMask {
    Grid<std::uint8_t> labels;

    RegionMask() = default;
    RegionMask(Index height, Index width, Region fill = Region::Background)
        : labels(Grid<std::uint8_t>::Constant(height, width, static_cast<std::uint8_t>(fill))) {}

    Index width() const { return labels.cols(); }
    Index height() const { return labels.rows(); }
    Region at(Index y, Index x) const { return static_cast<Region>(labels(y, x)); }
    void set(Index y, Index x, Region r) { labels(y, x) = static_cast<std::uint8_t>(r); }
    Index count(Region r) const { return (labels == static_cast<std::uint8_t>(r)).count(); }
};

/// Parallel-beam acquisition parameters. num_bins == 0 means "image diagonal, rounded up".
struct ProjectionGeometry {
    int num_angles = 360;
    int num_bins = 0;
    double bin_spacing = 1.0;
    double angle_start = 0.0;
    double angle_end = std::numbers::pi;
    std::vector<double> explicit_angles;

    void validate() const {
        if (num_angles < 1 && explicit_angles.empty())
            throw InvalidArgument("projection geometry needs at least one angle");
        if (num_bins < 0) throw InvalidArgument("num_bins must be >= 0");
        if (!(bin_spacing > 0.0)) throw InvalidArgument("bin_spacing must be positive");
        if (explicit_angles.empty() && !(angle_end > angle_start))
            throw InvalidArgument("angle range must be non-empty");
        for (std::size_t i = 1; i < explicit_angles.size(); ++i)
            if (!(explicit_angles[i] > explicit_angles[i - 1]))
                throw InvalidArgument("angles must be strictly increasing");
    }

    std::vector<double> angles() const {
        if (!explicit_angles.empty()) return explicit_angles;
        std::vector<double> out(static_cast<std::size_t>(num_angles));
        const double step = (angle_end - angle_start) / num_angles;
        for (int a = 0; a < num_angles; ++a) out[static_cast<std::size_t>(a)] = angle_start + step * a;
        return out;
    }

    int angle_count() const {
        return explicit_angles.empty() ? num_angles : static_cast<int>(explicit_angles.size());
    }

    /// Detector width for a square image of side `size`.
    int bins_for(Index size) const {
        if (num_bins > 0) return num_bins;
        return static_cast<int>(std::ceil(std::sqrt(2.0) * static_cast<double>(size) / bin_spacing));
    }
};

/// Radon-domain data: one row per angle, one column per detector bin.
template <typename Scalar>
struct BasicSinogram {
    std::vector<double> angles;
    double bin_spacing = 1.0;
    Grid<Scalar> data;

    Index num_angles() const { return data.rows(); }
    Index num_bins() const { return data.cols(); }
};

using Sinogram = BasicSinogram<float>;

/// Dose-calibrated photon-counting noise parameters.
struct NoiseModel {
    double dose_fraction = 0.02;
    double incident_photons_n0 = 5e4;
    double electronic_sigma = 2.0;
    double mu_scale = 4.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(dose_fraction > 0.0 && dose_fraction <= 1.0))
            throw InvalidArgument("dose_fraction must be in (0, 1]");
        if (!(incident_photons_n0 > 0.0)) throw InvalidArgument("incident_photons_n0 must be positive");
        if (!(electronic_sigma >= 0.0)) throw InvalidArgument("electronic_sigma must be >= 0");
        if (!(mu_scale > 0.0)) throw InvalidArgument("mu_scale must be positive");
    }
};

enum class Split { Train, Val, Test };

const char* split_name(Split s);
Split parse_split(const std::string& s);

struct PairEntry {
    std::string pair_id;
    std::string uldct_path;
    std::string ndct_path;
    Split split = Split::Train;
};

struct PairManifest {
    int format_version = 1;
    std::vector<PairEntry> entries;

    std::size_t count(Split s) const;
};

struct SplitFractions {
    double train = 0.70;
    double val = 0.15;
    double test = 0.15;
};

/// Deterministic shuffle + split. train = round(f_train * n), val = floor(f_val * n),
/// test takes whatever is left (4310 entries at 70/15/15 -> 3017/646/647).
PairManifest split_manifest(std::vector<PairEntry> entries, const SplitFractions& fractions, std::uint64_t seed);

template <typename Scalar>
bool all_in_unit_range(const Grid<Scalar>& g) {
    return g.allFinite() && (g >= Scalar(0)).all() && (g <= Scalar(1)).all();
}

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionMismatch(std::string(what) + ": dimension mismatch (" + std::to_string(a.cols()) + "x" +
                                std::to_string(a.rows()) + " vs " + std::to_string(b.cols()) + "x" +
                                std::to_string(b.rows()) + ")");
}

}  // namespace ctpurify
