#pragma once

#include "ctpurify/core.hpp"

#include <array>
#include <filesystem>
#include <memory>

namespace ctpurify {

/// Where a fused pixel came from.
enum class Source { Uldct, Ndct, NoisedNdct, WeakDenoisedUldct };

const char* source_name(Source s);

/// Indexed by Region code.
using Provenance = std::array<Source, 3>;

/// Training input (uLDCT background, noised NDCT elsewhere) with its clean target.
struct PurifiedPair {
    Image input;
    Image target;
    RegionMask mask;
    Provenance provenance{Source::Uldct, Source::NoisedNdct, Source::NoisedNdct};
};

/// Evaluation label (NDCT outside the lungs, weak-denoised uLDCT inside).
struct LabelImage {
    Image label;
    RegionMask mask;
    Provenance provenance{Source::Ndct, Source::Ndct, Source::WeakDenoisedUldct};
};

class WeakDenoiser {
public:
    virtual ~WeakDenoiser() = default;
    /// Same shape out as in, values in [0, 1], deterministic.
    virtual Image denoise(const Image& img) const = 0;
    virtual std::string descriptor() const = 0;
};

/// Separable Gaussian blur, half-sample reflective borders, taps truncated at 3 sigma.
class GaussianDenoiser final : public WeakDenoiser {
public:
    explicit GaussianDenoiser(double sigma);
    Image denoise(const Image& img) const override;
    std::string descriptor() const override;
    /// Normalized taps for offsets -radius..radius.
    const std::vector<double>& kernel() const { return kernel_; }
    double sigma() const { return sigma_; }

private:
    double sigma_;
    std::vector<double> kernel_;
};

/// Runs `<command> <in.f32> <out.f32>` through the shell. The child must exit 0 and write a
/// float32 image of the input's dimensions (its sidecar is optional).
class ExternalDenoiser final : public WeakDenoiser {
public:
    explicit ExternalDenoiser(std::string command);
    Image denoise(const Image& img) const override;
    std::string descriptor() const override;

private:
    std::string command_;
};

std::unique_ptr<WeakDenoiser> gaussian_baseline_denoiser(double sigma);

/// Mask-guided fusion only: Background from `uldct`, Body and Lung from `noised`.
PurifiedPair build_training_pair(const Image& uldct, const Image& ndct, const RegionMask& mask, const Image& noised);

/// Full training-pair construction: noised = simulate_uldct(ndct, model, geom).
PurifiedPair build_training_pair(const Image& uldct, const Image& ndct, const RegionMask& mask,
                                 const NoiseModel& model, const ProjectionGeometry& geom);

/// Lung from wd.denoise(uldct), everything else from `ndct`.
LabelImage build_label(const Image& uldct, const Image& ndct, const RegionMask& mask, const WeakDenoiser& wd);

/// Which label-side modules are active; both on gives build_label().
struct LabelModules {
    bool remove_background = true;
    bool remove_noise = true;
};

/// Label ablations. Body always comes from NDCT. With remove_background the background takes
/// NDCT and the lung is separate; without it background and lung are one unstructured region
/// (as a plain OR of binarized masks leaves them). That region, or the lung alone, takes the
/// weak-denoised uLDCT when remove_noise is on and the raw uLDCT otherwise.
LabelImage build_label_variant(const Image& uldct, const Image& ndct, const RegionMask& mask, const WeakDenoiser& wd,
                               const LabelModules& modules);

struct SimulatedPair {
    std::string pair_id;
    std::size_t index = 0;  ///< position in the manifest
    std::uint64_t seed = 0;
    Image simulated;
    Image ndct;
};

/// Simulated (uLDCT, NDCT) pairs for every train entry, seeded base_seed XOR manifest index.
/// Written to `out_dir/<pair_id>/{simulated,ndct}.f32` when out_dir is non-empty.
std::vector<SimulatedPair> train_weak_denoiser_data(const PairManifest& manifest, const NoiseModel& model,
                                                    const ProjectionGeometry& geom,
                                                    const std::filesystem::path& out_dir = {});

inline std::uint64_t pair_seed(std::uint64_t base_seed, std::size_t index) {
    return base_seed ^ static_cast<std::uint64_t>(index);
}

}  // namespace ctpurify
