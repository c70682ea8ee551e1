#include "ctpurify/pipeline.hpp"

#include "ctpurify/io.hpp"
#include "ctpurify/phantom.hpp"
#include "ctpurify/segmentation.hpp"
#include "ctpurify/tomography.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <iomanip>
#include <random>
#include <sstream>
#include <thread>

namespace ctpurify {

using nlohmann::json;

double mask_agreement(const RegionMask& a, const RegionMask& b) {
    require_same_shape(a.labels, b.labels, "mask_agreement");
    if (a.labels.size() == 0) return 1.0;
    return static_cast<double>((a.labels == b.labels).count()) / static_cast<double>(a.labels.size());
}

std::size_t RunReport::failures() const {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const auto& r) { return !r.ok; }));
}

std::string RunReport::to_json() const {
    json pairs = json::array();
    std::size_t train = 0, labels = 0;
    for (const auto& r : records) {
        json rec = {{"pair_id", r.pair_id}, {"split", split_name(r.split)}, {"index", r.index}, {"ok", r.ok}};
        if (!r.ok) rec["error"] = r.error;
        rec["region_pixel_counts"] = {{"background", r.region_counts[0]}, {"body", r.region_counts[1]}, {"lung", r.region_counts[2]}};
        json stats = json::object();
        for (const auto& [name, list] : r.stats) {
            json per = json::object();
            for (const auto& s : list)
                per[region_name(s.region)] = {{"pixel_count", s.pixel_count}, {"mean", s.mean}, {"std", s.std},
                                              {"min", s.min}, {"max", s.max}};
            stats[name] = per;
        }
        rec["stats"] = stats;
        rec["lung_noise_reduction_ratio"] = r.lung_noise_reduction_ratio ? json(*r.lung_noise_reduction_ratio) : json(nullptr);
        rec["warnings"] = r.warnings;
        pairs.push_back(rec);
        if (r.ok) (r.split == Split::Train ? train : labels) += 1;
    }
    const json j = {{"format_version", 1},
                    {"summary", {{"pairs", records.size()}, {"failed", failures()}, {"training_pairs", train}, {"labels", labels}}},
                    {"pairs", pairs}};
    return j.dump(2) + "\n";
}

namespace {

std::string percent(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << 100.0 * v << "%";
    return os.str();
}

PairRecord process_pair(const PairEntry& e, std::size_t index, const PipelineConfig& cfg, const WeakDenoiser& wd,
                        const fs::path& out_dir) {
    PairRecord rec;
    rec.pair_id = e.pair_id;
    rec.split = e.split;
    rec.index = index;

    const Image uldct = load_image(e.uldct_path);
    const Image ndct = load_image(e.ndct_path);
    require_same_shape(uldct.pixels, ndct.pixels, ("pair '" + e.pair_id + "'").c_str());

    const RegionMask m_uldct = segment(uldct, cfg.segmentation);
    const RegionMask m_ndct = segment(ndct, cfg.segmentation);
    const RegionMask mask = common_mask(m_uldct, m_ndct);
    for (Region r : kAllRegions) rec.region_counts[static_cast<std::size_t>(r)] = mask.count(r);

    const double agree = mask_agreement(m_uldct, m_ndct);
    if (agree < 0.95) rec.warnings.push_back("uLDCT and NDCT masks agree on only " + percent(agree) + " of pixels");
    if (mask.count(Region::Lung) == 0) rec.warnings.push_back("no lung region found");
    if (mask.count(Region::Body) == 0) rec.warnings.push_back("no body region found");

    rec.stats["uldct"] = region_stats(uldct, mask);
    rec.stats["ndct"] = region_stats(ndct, mask);

    const fs::path dir = out_dir / split_name(e.split) / e.pair_id;
    fs::create_directories(dir);
    if (e.split == Split::Train) {
        NoiseModel model = cfg.noise;
        model.seed = pair_seed(cfg.base_seed, index);
        auto pair = build_training_pair(uldct, ndct, mask, model, cfg.geometry);
        pair.input.meta["pair_id"] = e.pair_id;
        rec.stats["input"] = region_stats(pair.input, mask);
        save_image(pair.input, dir / "input.f32");
        save_image(pair.target, dir / "target.f32");
        save_mask(mask, dir / "mask.u8");
    } else {
        auto label = build_label(uldct, ndct, mask, wd);
        label.label.meta["pair_id"] = e.pair_id;
        rec.stats["label"] = region_stats(label.label, mask);
        const auto lung_in = region_stats(uldct, mask, Region::Lung);
        const auto lung_out = region_stats(label.label, mask, Region::Lung);
        if (lung_in && lung_out && lung_out->std > 0.0) rec.lung_noise_reduction_ratio = lung_in->std / lung_out->std;
        save_image(label.label, dir / "label.f32");
        save_mask(mask, dir / "mask.u8");
    }
    rec.ok = true;
    return rec;
}

}  // namespace

RunReport run_pipeline(const PairManifest& manifest, const PipelineConfig& cfg, const fs::path& out_dir, int jobs) {
    cfg.validate();
    if (manifest.entries.empty()) throw ManifestError("manifest has no entries");
    fs::create_directories(out_dir);
    const auto wd = cfg.denoiser.make();

    RunReport report;
    report.records.resize(manifest.entries.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};

    auto worker = [&]() {
        while (!stop.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= manifest.entries.size()) return;
            const auto& e = manifest.entries[i];
            PairRecord rec;
            try {
                rec = process_pair(e, i, cfg, *wd, out_dir);
            } catch (const std::exception& ex) {
                rec = PairRecord{};
                rec.pair_id = e.pair_id;
                rec.split = e.split;
                rec.index = i;
                rec.error = ex.what();
                if (cfg.strict) stop.store(true);
            }
            report.records[i] = std::move(rec);
        }
    };

    const auto n_threads = static_cast<std::size_t>(std::clamp<int>(jobs, 1, 256));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    if (cfg.strict)
        for (const auto& r : report.records)
            if (!r.ok && !r.error.empty()) throw PipelineAbort(r.pair_id, r.error);

    write_text(out_dir / "report.json", report.to_json());
    write_text(out_dir / "config.json", dump_config(cfg));
    return report;
}

PairManifest write_phantom_dataset(const fs::path& dir, const PhantomDatasetOptions& opts, const NoiseModel& noise,
                                   const ProjectionGeometry& geom, const SplitFractions& fractions) {
    if (opts.pairs == 0) throw InvalidArgument("phantom dataset needs at least one pair");
    fs::create_directories(dir);
    std::vector<PairEntry> entries;
    for (std::size_t k = 0; k < opts.pairs; ++k) {
        std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                          static_cast<std::uint32_t>(k)};
        std::mt19937_64 rng(seq);
        std::uniform_real_distribution<double> jitter(-1.0, 1.0);

        LungPhantomOptions po;
        po.size = opts.size;
        po.seed = opts.seed + k;
        const Image ndct = lung_phantom(po).image;
        po.shift_x = opts.max_shift * jitter(rng);
        po.shift_y = opts.max_shift * jitter(rng);
        po.lung_scale = 1.0 + opts.lung_scale_jitter * jitter(rng);
        NoiseModel m = noise;
        m.seed = rng();
        Image uldct = simulate_uldct(lung_phantom(po).image, m, geom);

        char id[32];
        std::snprintf(id, sizeof id, "pair_%03zu", k);
        const fs::path pd = dir / id;
        fs::create_directories(pd);
        save_image(ndct, pd / "ndct.f32");
        save_image(uldct, pd / "uldct.f32");
        entries.push_back({id, (fs::path(id) / "uldct.f32").string(), (fs::path(id) / "ndct.f32").string(), Split::Train});
    }
    auto manifest = split_manifest(std::move(entries), fractions, opts.seed);
    std::stable_sort(manifest.entries.begin(), manifest.entries.end(),
                     [](const PairEntry& a, const PairEntry& b) { return a.pair_id < b.pair_id; });
    save_manifest(manifest, dir / "manifest.json");
    return load_manifest(dir / "manifest.json");
}

}  // namespace ctpurify
