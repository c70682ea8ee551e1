#pragma once

#include "ctpurify/core.hpp"

#include <filesystem>

namespace ctpurify {

namespace fs = std::filesystem;

/// How stored intensities become [0, 1] values on load.
enum class Normalize {
    DeclaredRange,  ///< min-max over the range the file declares (sidecar or PGM maxval), then clamp
    DataRange,      ///< min-max over the values actually present
};

/// Sidecar path for a data file: `a/b/name.f32` -> `a/b/name.json`.
fs::path sidecar_path(const fs::path& data_path);

/// Reads `.f32` (raw little-endian float32 + sidecar) or `.pgm` (16-bit binary PGM).
/// meta gains `source_path`, `raw_intensity_min` and `raw_intensity_max`.
Image load_image(const fs::path& path, Normalize policy = Normalize::DeclaredRange);

/// Writes `.f32` losslessly or `.pgm` quantized to 16 bits; both get a sidecar.
void save_image(const Image& img, const fs::path& path, bool overwrite = true);

void save_mask(const RegionMask& mask, const fs::path& path, bool overwrite = true);
RegionMask load_mask(const fs::path& path);

void save_sinogram(const Sinogram& sino, const fs::path& path, bool overwrite = true);
Sinogram load_sinogram(const fs::path& path);

/// Manifest JSON. Relative paths are resolved against the manifest's directory.
/// With `check_files`, missing image files are a ManifestError naming the pair.
PairManifest load_manifest(const fs::path& path, bool check_files = true);
void save_manifest(const PairManifest& manifest, const fs::path& path);

/// Whole-file helpers used by the writers above.
std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text, bool overwrite = true);

}  // namespace ctpurify
