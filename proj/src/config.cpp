#include "ctpurify/config.hpp"

#include "ctpurify/io.hpp"

#include <nlohmann/json.hpp>

#include <set>

namespace ctpurify {

using nlohmann::json;

std::unique_ptr<WeakDenoiser> DenoiserSpec::make() const {
    if (kind == Kind::External) return std::make_unique<ExternalDenoiser>(command);
    return gaussian_baseline_denoiser(sigma);
}

void PipelineConfig::validate() const {
    try {
        geometry.validate();
        noise.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    if (segmentation.bins < 2) throw ConfigError("segmentation.bins must be >= 2");
    if (segmentation.min_lung_area < 0) throw ConfigError("segmentation.min_lung_area must be >= 0");
    if (segmentation.min_body_fraction < 0 || segmentation.min_body_fraction > 1)
        throw ConfigError("segmentation.min_body_fraction must be in [0, 1]");
    if (denoiser.kind == DenoiserSpec::Kind::Gaussian && !(denoiser.sigma > 0))
        throw ConfigError("denoiser.sigma must be positive");
    if (denoiser.kind == DenoiserSpec::Kind::External && denoiser.command.empty())
        throw ConfigError("external denoiser needs a command");
    const double sum = split.train + split.val + split.test;
    if (std::abs(sum - 1.0) > 1e-9 || split.train < 0 || split.val < 0 || split.test < 0)
        throw ConfigError("split fractions must be non-negative and sum to 1");
    if (failure_tolerance < 0 || failure_tolerance > 1) throw ConfigError("failure_tolerance must be in [0, 1]");
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError("'" + where + "' must be an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ConfigError("unknown config key '" + where + (where.empty() ? "" : ".") + k + "'");
}

template <typename T>
void read(const json& j, const char* key, T& dst, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        dst = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + where + key + "' has the wrong type");
    }
}

}  // namespace

PipelineConfig parse_config(const std::string& text, bool* seed_given) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    PipelineConfig c;
    check_keys(j, {"geometry", "noise", "segmentation", "denoiser", "split", "seed", "strict", "failure_tolerance"}, "");
    if (j.contains("geometry")) {
        const auto& g = j["geometry"];
        check_keys(g, {"num_angles", "num_bins", "bin_spacing", "angle_start", "angle_end"}, "geometry");
        read(g, "num_angles", c.geometry.num_angles, "geometry.");
        read(g, "num_bins", c.geometry.num_bins, "geometry.");
        read(g, "bin_spacing", c.geometry.bin_spacing, "geometry.");
        read(g, "angle_start", c.geometry.angle_start, "geometry.");
        read(g, "angle_end", c.geometry.angle_end, "geometry.");
    }
    if (j.contains("noise")) {
        const auto& n = j["noise"];
        check_keys(n, {"dose_fraction", "incident_photons_n0", "electronic_sigma", "mu_scale"}, "noise");
        read(n, "dose_fraction", c.noise.dose_fraction, "noise.");
        read(n, "incident_photons_n0", c.noise.incident_photons_n0, "noise.");
        read(n, "electronic_sigma", c.noise.electronic_sigma, "noise.");
        read(n, "mu_scale", c.noise.mu_scale, "noise.");
    }
    if (j.contains("segmentation")) {
        const auto& s = j["segmentation"];
        check_keys(s, {"bins", "min_lung_area", "min_body_fraction"}, "segmentation");
        read(s, "bins", c.segmentation.bins, "segmentation.");
        read(s, "min_lung_area", c.segmentation.min_lung_area, "segmentation.");
        read(s, "min_body_fraction", c.segmentation.min_body_fraction, "segmentation.");
    }
    if (j.contains("denoiser")) {
        const auto& d = j["denoiser"];
        check_keys(d, {"kind", "sigma", "command"}, "denoiser");
        std::string kind = "gaussian";
        read(d, "kind", kind, "denoiser.");
        if (kind == "gaussian") c.denoiser.kind = DenoiserSpec::Kind::Gaussian;
        else if (kind == "external") c.denoiser.kind = DenoiserSpec::Kind::External;
        else throw ConfigError("denoiser.kind must be 'gaussian' or 'external'");
        read(d, "sigma", c.denoiser.sigma, "denoiser.");
        read(d, "command", c.denoiser.command, "denoiser.");
    }
    if (j.contains("split")) {
        std::vector<double> f;
        read(j, "split", f, "");
        if (f.size() != 3) throw ConfigError("split must list three fractions");
        c.split = {f[0], f[1], f[2]};
    }
    read(j, "seed", c.base_seed, "");
    read(j, "strict", c.strict, "");
    read(j, "failure_tolerance", c.failure_tolerance, "");
    if (seed_given) *seed_given = j.contains("seed");
    c.validate();
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path, bool* seed_given) {
    std::string text;
    try {
        text = read_text(path);
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    return parse_config(text, seed_given);
}

std::string dump_config(const PipelineConfig& c) {
    json d = {{"kind", c.denoiser.kind == DenoiserSpec::Kind::Gaussian ? "gaussian" : "external"}};
    if (c.denoiser.kind == DenoiserSpec::Kind::Gaussian) d["sigma"] = c.denoiser.sigma;
    else d["command"] = c.denoiser.command;
    const json j = {
        {"geometry",
         {{"num_angles", c.geometry.num_angles},
          {"num_bins", c.geometry.num_bins},
          {"bin_spacing", c.geometry.bin_spacing},
          {"angle_start", c.geometry.angle_start},
          {"angle_end", c.geometry.angle_end}}},
        {"noise",
         {{"dose_fraction", c.noise.dose_fraction},
          {"incident_photons_n0", c.noise.incident_photons_n0},
          {"electronic_sigma", c.noise.electronic_sigma},
          {"mu_scale", c.noise.mu_scale}}},
        {"segmentation",
         {{"bins", c.segmentation.bins},
          {"min_lung_area", c.segmentation.min_lung_area},
          {"min_body_fraction", c.segmentation.min_body_fraction}}},
        {"denoiser", d},
        {"split", {c.split.train, c.split.val, c.split.test}},
        {"seed", c.base_seed},
        {"strict", c.strict},
        {"failure_tolerance", c.failure_tolerance},
    };
    return j.dump(2) + "\n";
}

}  // namespace ctpurify
