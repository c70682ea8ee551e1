#pragma once

#include "ctpurify/config.hpp"
#include "ctpurify/metrics.hpp"

#include <filesystem>
#include <map>
#include <optional>

namespace ctpurify {

struct PairRecord {
    std::string pair_id;
    Split split = Split::Train;
    std::size_t index = 0;
    bool ok = false;
    std::string error;
    std::array<Index, 3> region_counts{0, 0, 0};  ///< by Region code, common mask
    /// Image name ("uldct", "ndct", "input", "label") -> stats over the common mask.
    std::map<std::string, std::vector<RegionStats>> stats;
    /// std(uLDCT lung) / std(label lung); label pairs only.
    std::optional<double> lung_noise_reduction_ratio;
    std::vector<std::string> warnings;
};

struct RunReport {
    std::vector<PairRecord> records;  ///< manifest order

    std::size_t failures() const;
    std::string to_json() const;
};

/// Raised in strict mode; names the first failing pair in manifest order.
struct PipelineAbort : Error {
    PipelineAbort(std::string pair, const std::string& why)
        : Error("pair '" + pair + "' failed: " + why), pair_id(std::move(pair)) {}
    std::string pair_id;
};

/// Train entries -> out/train/<id>/{input,target}.f32 + mask.u8; val/test entries ->
/// out/<split>/<id>/label.f32 + mask.u8. Writes out/report.json and out/config.json.
/// Pair i uses noise seed base_seed XOR i, so the result does not depend on `jobs`.
RunReport run_pipeline(const PairManifest& manifest, const PipelineConfig& cfg, const std::filesystem::path& out_dir,
                       int jobs = 1);

struct PhantomDatasetOptions {
    std::size_t pairs = 10;
    Index size = 256;
    std::uint64_t seed = 1;
    double max_shift = 2.0;        ///< pixels, uniform in [-max_shift, max_shift]
    double lung_scale_jitter = 0.03;
};

/// Paired lung phantoms standing in for a clinical dataset: NDCT is the clean phantom, uLDCT a
/// slightly moved copy passed through simulate_uldct with `noise`. Writes
/// `dir/<pair_id>/{ndct,uldct}.f32` and `dir/manifest.json` split by `fractions`.
PairManifest write_phantom_dataset(const std::filesystem::path& dir, const PhantomDatasetOptions& opts,
                                   const NoiseModel& noise, const ProjectionGeometry& geom,
                                   const SplitFractions& fractions);

/// Fraction of pixels where two masks carry the same label.
double mask_agreement(const RegionMask& a, const RegionMask& b);

}  // namespace ctpurify
