#pragma once

#include "ctpurify/core.hpp"
#include "ctpurify/purification.hpp"
#include "ctpurify/segmentation.hpp"

#include <filesystem>
#include <memory>
#include <optional>

namespace ctpurify {

struct DenoiserSpec {
    enum class Kind { Gaussian, External };
    Kind kind = Kind::Gaussian;
    double sigma = 1.0;
    std::string command;

    std::unique_ptr<WeakDenoiser> make() const;
};

/// Everything one run depends on. Defaults are the documented desk-scale run.
struct PipelineConfig {
    ProjectionGeometry geometry;
    NoiseModel noise;  ///< noise.seed is ignored; pairs use base_seed XOR index
    SegmentationParams segmentation;
    DenoiserSpec denoiser;
    SplitFractions split;
    std::uint64_t base_seed = 20240601;
    bool strict = false;
    /// Non-strict runs still exit 0 when failed / total stays below this fraction.
    double failure_tolerance = 0.0;

    void validate() const;
};

/// Parse a config JSON document on top of the defaults. Unknown keys are a ConfigError.
/// `seed_given` reports whether the document set "seed".
PipelineConfig parse_config(const std::string& text, bool* seed_given = nullptr);
PipelineConfig load_config(const std::filesystem::path& path, bool* seed_given = nullptr);

/// Canonical JSON of the effective config (stable key order, full defaults).
std::string dump_config(const PipelineConfig& cfg);

}  // namespace ctpurify
