// ctpurify: command-line front end for the purification toolkit.

#include "ctpurify/config.hpp"
#include "ctpurify/io.hpp"
#include "ctpurify/metrics.hpp"
#include "ctpurify/phantom.hpp"
#include "ctpurify/pipeline.hpp"
#include "ctpurify/purification.hpp"
#include "ctpurify/segmentation.hpp"
#include "ctpurify/tomography.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>

namespace {

using namespace ctpurify;
using nlohmann::json;

// Exit codes, one per error class.
enum Exit : int {
    kOk = 0,
    kUnknown = 1,
    kUsage = 2,
    kIo = 3,
    kFormat = 4,
    kInvalid = 5,
    kDimension = 6,
    kConstant = 7,
    kConfig = 8,
    kManifest = 9,
    kExternal = 10,
    kStrictAbort = 11,
    kPairFailures = 12,
};

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    bool strict = false;
    std::string out;
};

PipelineConfig effective_config(const Globals& g) {
    bool seed_in_file = false;
    PipelineConfig cfg = g.config_path.empty() ? PipelineConfig{} : load_config(g.config_path, &seed_in_file);
    if (g.seed) {
        cfg.base_seed = *g.seed;
    } else if (!seed_in_file) {
        if (const char* env = std::getenv("CTPURIFY_SEED"); env && *env) {
            try {
                cfg.base_seed = std::stoull(env);
            } catch (const std::exception&) {
                throw ConfigError(std::string("CTPURIFY_SEED is not an unsigned integer: '") + env + "'");
            }
        }
    }
    if (g.strict) cfg.strict = true;
    cfg.noise.seed = cfg.base_seed;
    return cfg;
}

fs::path require_out(const Globals& g) {
    if (g.out.empty()) throw InvalidArgument("--out is required");
    return g.out;
}

void ensure_parent(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

RegionMask mask_for_pair(const Image& uldct, const Image& ndct, const std::string& mask_path,
                         const PipelineConfig& cfg) {
    if (!mask_path.empty()) return load_mask(mask_path);
    return common_mask(segment(uldct, cfg.segmentation), segment(ndct, cfg.segmentation));
}

std::string counts_summary(const RegionMask& m) {
    return "background=" + std::to_string(m.count(Region::Background)) + " body=" +
           std::to_string(m.count(Region::Body)) + " lung=" + std::to_string(m.count(Region::Lung));
}

json stats_json(const std::vector<RegionStats>& list) {
    json rows = json::array();
    for (const auto& s : list)
        rows.push_back({{"region", region_name(s.region)}, {"pixel_count", s.pixel_count}, {"mean", s.mean},
                        {"std", s.std}, {"min", s.min}, {"max", s.max}});
    return rows;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ctpurify: purified training pairs and evaluation labels for ultra-low-dose CT denoising"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "Pipeline config (JSON)")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Base seed (overrides config and CTPURIFY_SEED)");
    app.add_option("--jobs", g.jobs, "Worker threads for `run`")->check(CLI::PositiveNumber);
    app.add_flag("--strict", g.strict, "Abort `run` on the first failing pair");
    app.add_option("--out", g.out, "Output file or directory");

    // phantom
    std::string kind = "lung";
    Index size = 256;
    bool noisy = false;
    std::size_t pairs = 0;
    double shift_x = 0, shift_y = 0, lung_scale = 1.0;
    auto* phantom = app.add_subcommand("phantom", "Generate a synthetic phantom (or a paired phantom dataset)");
    phantom->add_option("--kind", kind, "lung | shepp-logan")->check(CLI::IsMember({"lung", "shepp-logan"}));
    phantom->add_option("--size", size, "Side length in pixels");
    phantom->add_flag("--noisy", noisy, "Also write a simulated low-dose companion");
    phantom->add_option("--pairs", pairs, "Write N misaligned (uLDCT, NDCT) lung pairs plus manifest.json");
    phantom->add_option("--shift-x", shift_x, "Shift in pixels");
    phantom->add_option("--shift-y", shift_y, "Shift in pixels");
    phantom->add_option("--lung-scale", lung_scale, "Lung scale factor");

    // single stages
    std::string in_path, mask_path, uldct_path, ndct_path, ref_path, filter = "ramlak";
    Index out_size = 0;
    auto* seg = app.add_subcommand("segment", "Three-way region mask of one image");
    seg->add_option("--in", in_path)->required()->check(CLI::ExistingFile);

    auto* rad = app.add_subcommand("radon", "Parallel-beam sinogram of an image");
    rad->add_option("--in", in_path)->required()->check(CLI::ExistingFile);

    auto* irad = app.add_subcommand("iradon", "Filtered back-projection of a sinogram");
    irad->add_option("--in", in_path)->required()->check(CLI::ExistingFile);
    irad->add_option("--size", out_size, "Output side (default: from detector width)");
    irad->add_option("--filter", filter, "ramlak | none")->check(CLI::IsMember({"ramlak", "none"}));

    auto* noise = app.add_subcommand("add-noise", "Dose-calibrated noise: image -> simulated uLDCT, sinogram -> noisy sinogram");
    noise->add_option("--in", in_path)->required()->check(CLI::ExistingFile);

    auto* pair = app.add_subcommand("build-pair", "IPv2 training input from one (uLDCT, NDCT) pair");
    pair->add_option("--uldct", uldct_path)->required()->check(CLI::ExistingFile);
    pair->add_option("--ndct", ndct_path)->required()->check(CLI::ExistingFile);
    pair->add_option("--mask", mask_path, "Precomputed common mask")->check(CLI::ExistingFile);
    std::size_t pair_index = 0;
    pair->add_option("--index", pair_index, "Pair index for seed derivation (seed XOR index)");

    auto* label = app.add_subcommand("build-label", "IPv2 evaluation label from one (uLDCT, NDCT) pair");
    label->add_option("--uldct", uldct_path)->required()->check(CLI::ExistingFile);
    label->add_option("--ndct", ndct_path)->required()->check(CLI::ExistingFile);
    label->add_option("--mask", mask_path, "Precomputed common mask")->check(CLI::ExistingFile);

    auto* stats = app.add_subcommand("stats", "Per-region statistics of an image");
    stats->add_option("--in", in_path)->required()->check(CLI::ExistingFile);
    stats->add_option("--mask", mask_path)->required()->check(CLI::ExistingFile);
    stats->add_option("--reference", ref_path, "Also report per-region RMSE and W1 distance to this image")
        ->check(CLI::ExistingFile);

    std::string manifest_path;
    auto* run = app.add_subcommand("run", "Full pipeline over a manifest");
    run->add_option("--manifest", manifest_path)->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        const PipelineConfig cfg = effective_config(g);

        if (*phantom) {
            const fs::path out = require_out(g);
            if (size < kMinPhantomSize) throw InvalidArgument("phantom size must be at least " + std::to_string(kMinPhantomSize));
            if (pairs > 0) {
                PhantomDatasetOptions po;
                po.pairs = pairs;
                po.size = size;
                po.seed = cfg.base_seed;
                const auto m = write_phantom_dataset(out, po, cfg.noise, cfg.geometry, cfg.split);
                std::cout << "phantom dataset: " << m.entries.size() << " pairs (train " << m.count(Split::Train)
                          << ", val " << m.count(Split::Val) << ", test " << m.count(Split::Test) << ") -> "
                          << (out / "manifest.json").string() << "\n";
                return kOk;
            }
            fs::create_directories(out);
            Image clean;
            if (kind == "lung") {
                LungPhantomOptions o{size, cfg.base_seed, shift_x, shift_y, lung_scale};
                auto ph = lung_phantom(o);
                clean = std::move(ph.image);
                save_mask(ph.truth, out / "truth.u8");
            } else {
                clean = shepp_logan(size);
            }
            save_image(clean, out / "clean.f32");
            if (noisy) save_image(simulate_uldct(clean, cfg.noise, cfg.geometry), out / "noisy.f32");
            std::cout << "phantom " << kind << " " << size << "x" << size << (noisy ? " (+noisy)" : "") << " -> "
                      << out.string() << "\n";
        } else if (*seg) {
            const fs::path out = require_out(g);
            ensure_parent(out);
            const RegionMask m = segment(load_image(in_path), cfg.segmentation);
            save_mask(m, out);
            std::cout << "segment: " << counts_summary(m) << "\n";
        } else if (*rad) {
            const fs::path out = require_out(g);
            ensure_parent(out);
            const Sinogram s = radon(load_image(in_path), cfg.geometry);
            save_sinogram(s, out);
            std::cout << "radon: " << s.num_angles() << " angles x " << s.num_bins() << " bins\n";
        } else if (*irad) {
            const fs::path out = require_out(g);
            ensure_parent(out);
            const Sinogram s = load_sinogram(in_path);
            const Index n = out_size > 0 ? out_size
                                         : static_cast<Index>(std::floor(static_cast<double>(s.num_bins()) * s.bin_spacing / std::sqrt(2.0)));
            const Image img = iradon(s, filter == "none" ? ReconFilter::None : ReconFilter::RamLak, n);
            save_image(img, out);
            std::cout << "iradon: " << n << "x" << n << " (" << filter << ")\n";
        } else if (*noise) {
            const fs::path out = require_out(g);
            ensure_parent(out);
            const auto side = read_text(sidecar_path(in_path));
            if (json::parse(side).contains("num_angles")) {
                const Sinogram s = load_sinogram(in_path);
                const double radius = static_cast<double>(s.num_bins()) * s.bin_spacing / std::sqrt(2.0) / 2.0;
                save_sinogram(inject_noise_scaled(s, cfg.noise, radius), out);
                std::cout << "add-noise: sinogram, dose " << cfg.noise.dose_fraction << "\n";
            } else {
                save_image(simulate_uldct(load_image(in_path), cfg.noise, cfg.geometry), out);
                std::cout << "add-noise: image, dose " << cfg.noise.dose_fraction << "\n";
            }
        } else if (*pair) {
            const fs::path out = require_out(g);
            fs::create_directories(out);
            const Image u = load_image(uldct_path), n = load_image(ndct_path);
            const RegionMask m = mask_for_pair(u, n, mask_path, cfg);
            NoiseModel model = cfg.noise;
            model.seed = pair_seed(cfg.base_seed, pair_index);
            const auto p = build_training_pair(u, n, m, model, cfg.geometry);
            save_image(p.input, out / "input.f32");
            save_image(p.target, out / "target.f32");
            save_mask(p.mask, out / "mask.u8");
            std::cout << "build-pair: " << counts_summary(m) << "\n";
        } else if (*label) {
            const fs::path out = require_out(g);
            fs::create_directories(out);
            const Image u = load_image(uldct_path), n = load_image(ndct_path);
            const RegionMask m = mask_for_pair(u, n, mask_path, cfg);
            const auto wd = cfg.denoiser.make();
            const auto l = build_label(u, n, m, *wd);
            save_image(l.label, out / "label.f32");
            save_mask(l.mask, out / "mask.u8");
            std::cout << "build-label: " << counts_summary(m) << " denoiser=" << wd->descriptor() << "\n";
        } else if (*stats) {
            const Image img = load_image(in_path);
            const RegionMask m = load_mask(mask_path);
            json doc = {{"image", in_path}, {"regions", stats_json(region_stats(img, m))}};
            if (!ref_path.empty()) {
                const Image ref = load_image(ref_path);
                json cmp = json::object();
                for (Region r : kAllRegions) {
                    if (m.count(r) == 0) continue;
                    cmp[region_name(r)] = {{"rmse", rmse(img, ref, m, r)},
                                           {"wasserstein", wasserstein_1d(img, m, r, ref, m, r).distance}};
                }
                doc["reference"] = ref_path;
                doc["comparison"] = cmp;
            }
            const std::string text = doc.dump(2) + "\n";
            if (!g.out.empty()) {
                ensure_parent(g.out);
                write_text(g.out, text);
            }
            std::cout << text;
        } else if (*run) {
            const fs::path out = require_out(g);
            const PairManifest m = load_manifest(manifest_path, false);
            const RunReport report = run_pipeline(m, cfg, out, g.jobs);
            const std::size_t failed = report.failures();
            std::cout << "run: " << report.records.size() << " pairs, " << failed << " failed -> "
                      << (out / "report.json").string() << "\n";
            for (const auto& r : report.records)
                if (!r.ok) std::cerr << "pair '" << r.pair_id << "' failed: " << r.error << "\n";
            if (failed > 0) {
                const double frac = static_cast<double>(failed) / static_cast<double>(report.records.size());
                if (frac >= cfg.failure_tolerance) return kPairFailures;
            }
        }
    } catch (const PipelineAbort& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kStrictAbort;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const ManifestError& e) {
        std::cerr << "manifest error: " << e.what() << "\n";
        return kManifest;
    } catch (const ExternalToolError& e) {
        std::cerr << "external tool error: " << e.what() << "\n";
        return kExternal;
    } catch (const ConstantImageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConstant;
    } catch (const DimensionMismatch& e) {
        std::cerr << "dimension error: " << e.what() << "\n";
        return kDimension;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return kFormat;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIo;
    } catch (const InvalidArgument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return kInvalid;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIo;
    } catch (const json::exception& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return kFormat;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUnknown;
    }
    return kOk;
}
