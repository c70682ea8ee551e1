#include "ctpurify/purification.hpp"

#include "ctpurify/io.hpp"
#include "ctpurify/tomography.hpp"

#include <atomic>
#include <cstdlib>
#include <random>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

namespace ctpurify {

const char* source_name(Source s) {
    switch (s) {
        case Source::Uldct: return "uldct";
        case Source::Ndct: return "ndct";
        case Source::NoisedNdct: return "noised_ndct";
        case Source::WeakDenoisedUldct: return "weak_denoised_uldct";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------

GaussianDenoiser::GaussianDenoiser(double sigma) : sigma_(sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("gaussian denoiser: sigma must be positive");
    const auto radius = static_cast<int>(std::ceil(3.0 * sigma));
    kernel_.resize(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double v = std::exp(-0.5 * k * k / (sigma * sigma));
        kernel_[static_cast<std::size_t>(k + radius)] = v;
        sum += v;
    }
    for (auto& v : kernel_) v /= sum;
}

namespace {

// Half-sample symmetric reflection: -1 -> 0, n -> n - 1.
Index reflect(Index i, Index n) {
    const Index period = 2 * n;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - 1 - i;
}

}  // namespace

Image GaussianDenoiser::denoise(const Image& img) const {
    const Index h = img.height(), w = img.width();
    const auto radius = static_cast<Index>(kernel_.size() / 2);
    const Grid<double> src = img.pixels.cast<double>();
    Grid<double> tmp(h, w), dst(h, w);
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) {
            double acc = 0.0;
            for (Index k = -radius; k <= radius; ++k)
                acc += kernel_[static_cast<std::size_t>(k + radius)] * src(y, reflect(x + k, w));
            tmp(y, x) = acc;
        }
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) {
            double acc = 0.0;
            for (Index k = -radius; k <= radius; ++k)
                acc += kernel_[static_cast<std::size_t>(k + radius)] * tmp(reflect(y + k, h), x);
            dst(y, x) = acc;
        }
    Image out(dst.max(0.0).min(1.0).cast<float>(), img.meta);
    out.meta["stage"] = "weak_denoised";
    return out;
}

std::string GaussianDenoiser::descriptor() const {
    std::ostringstream os;
    os << "gaussian(sigma=" << sigma_ << ")";
    return os.str();
}

std::unique_ptr<WeakDenoiser> gaussian_baseline_denoiser(double sigma) {
    return std::make_unique<GaussianDenoiser>(sigma);
}

// ---------------------------------------------------------------------------

ExternalDenoiser::ExternalDenoiser(std::string command) : command_(std::move(command)) {
    if (command_.empty()) throw InvalidArgument("external denoiser: empty command");
}

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    return out + "'";
}

struct TempDir {
    fs::path path;
    TempDir() {
        static std::atomic<unsigned> counter{0};
        std::random_device rd;
        for (int attempt = 0; attempt < 100; ++attempt) {
            auto p = fs::temp_directory_path() /
                     ("ctpurify-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" + std::to_string(rd()));
            if (fs::create_directory(p)) {
                path = p;
                return;
            }
        }
        throw IoError("could not create a temporary directory");
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

}  // namespace

Image ExternalDenoiser::denoise(const Image& img) const {
    TempDir tmp;
    const auto in = tmp.path / "in.f32";
    const auto out = tmp.path / "out.f32";
    save_image(img, in);

    const std::string cmd = command_ + " " + shell_quote(in.string()) + " " + shell_quote(out.string());
    const int status = std::system(cmd.c_str());
    if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0)
        throw ExternalToolError("external denoiser '" + command_ + "' failed (status " + std::to_string(status) + ")");
    if (!fs::exists(out)) throw ExternalToolError("external denoiser '" + command_ + "' wrote no output");
    if (!fs::exists(sidecar_path(out))) fs::copy_file(sidecar_path(in), sidecar_path(out));

    Image result = load_image(out);
    if (result.width() != img.width() || result.height() != img.height())
        throw DimensionMismatch("external denoiser output does not match input dimensions");
    result.meta = img.meta;
    result.meta["stage"] = "weak_denoised";
    return result;
}

std::string ExternalDenoiser::descriptor() const { return "external(" + command_ + ")"; }

// ---------------------------------------------------------------------------

namespace {

/// out[p] = sources[mask[p]][p]; pixels are copied, never recomputed.
Grid<float> fuse(const RegionMask& mask, const std::array<const Image*, 3>& by_region) {
    Grid<float> out(mask.height(), mask.width());
    for (Index i = 0; i < out.size(); ++i) out.data()[i] = by_region[mask.labels.data()[i]]->pixels.data()[i];
    return out;
}

void check_inputs(const Image& uldct, const Image& ndct, const RegionMask& mask, const char* what) {
    require_same_shape(uldct.pixels, ndct.pixels, what);
    require_same_shape(uldct.pixels, mask.labels, what);
    if ((mask.labels > 2).any()) throw InvalidArgument(std::string(what) + ": mask has codes outside {0,1,2}");
}

}  // namespace

PurifiedPair build_training_pair(const Image& uldct, const Image& ndct, const RegionMask& mask, const Image& noised) {
    check_inputs(uldct, ndct, mask, "build_training_pair");
    require_same_shape(uldct.pixels, noised.pixels, "build_training_pair");
    PurifiedPair p;
    p.input = Image(fuse(mask, {&uldct, &noised, &noised}));
    p.input.meta["stage"] = "ipv2_uldct";
    p.target = ndct;
    p.mask = mask;
    return p;
}

PurifiedPair build_training_pair(const Image& uldct, const Image& ndct, const RegionMask& mask,
                                 const NoiseModel& model, const ProjectionGeometry& geom) {
    check_inputs(uldct, ndct, mask, "build_training_pair");
    const Image noised = simulate_uldct(ndct, model, geom);
    auto p = build_training_pair(uldct, ndct, mask, noised);
    p.input.meta["noise_seed"] = std::to_string(model.seed);
    return p;
}

LabelImage build_label(const Image& uldct, const Image& ndct, const RegionMask& mask, const WeakDenoiser& wd) {
    return build_label_variant(uldct, ndct, mask, wd, LabelModules{});
}

LabelImage build_label_variant(const Image& uldct, const Image& ndct, const RegionMask& mask, const WeakDenoiser& wd,
                               const LabelModules& modules) {
    check_inputs(uldct, ndct, mask, "build_label");
    LabelImage l;
    l.mask = mask;

    Image wden;
    if (modules.remove_noise) {
        wden = wd.denoise(uldct);
        require_same_shape(wden.pixels, uldct.pixels, "build_label (weak denoiser output)");
    }
    const Image* unstructured = modules.remove_noise ? &wden : &uldct;
    const Source unstructured_src = modules.remove_noise ? Source::WeakDenoisedUldct : Source::Uldct;

    std::array<const Image*, 3> src{&ndct, &ndct, unstructured};
    l.provenance = {Source::Ndct, Source::Ndct, unstructured_src};
    if (!modules.remove_background) {
        src[static_cast<std::size_t>(Region::Background)] = unstructured;
        l.provenance[static_cast<std::size_t>(Region::Background)] = unstructured_src;
    }
    l.label = Image(fuse(mask, src));
    l.label.meta["stage"] = "ipv2_ndct";
    if (modules.remove_noise) l.label.meta["weak_denoiser"] = wd.descriptor();
    return l;
}

std::vector<SimulatedPair> train_weak_denoiser_data(const PairManifest& manifest, const NoiseModel& model,
                                                    const ProjectionGeometry& geom, const fs::path& out_dir) {
    if (manifest.count(Split::Train) == 0) throw InvalidArgument("train_weak_denoiser_data: empty train split");
    std::vector<SimulatedPair> out;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        const auto& e = manifest.entries[i];
        if (e.split != Split::Train) continue;
        SimulatedPair sp;
        sp.pair_id = e.pair_id;
        sp.index = i;
        sp.seed = pair_seed(model.seed, i);
        sp.ndct = load_image(e.ndct_path);
        NoiseModel m = model;
        m.seed = sp.seed;
        sp.simulated = simulate_uldct(sp.ndct, m, geom);
        sp.simulated.meta["noise_seed"] = std::to_string(sp.seed);
        if (!out_dir.empty()) {
            const auto dir = out_dir / e.pair_id;
            fs::create_directories(dir);
            save_image(sp.simulated, dir / "simulated.f32");
            save_image(sp.ndct, dir / "ndct.f32");
        }
        out.push_back(std::move(sp));
    }
    return out;
}

}  // namespace ctpurify
