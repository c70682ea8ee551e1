#include "ctpurify/io.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace ctpurify {

using nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little, "raw float32 I/O assumes a little-endian host");

std::string lower_ext(const fs::path& p) {
    std::string e = p.extension().string();
    for (auto& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return e;
}

std::vector<char> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void check_writable(const fs::path& path, bool overwrite) {
    if (!overwrite && fs::exists(path)) throw IoError("refusing to overwrite '" + path.string() + "'");
    const auto parent = path.parent_path();
    if (!parent.empty() && !fs::is_directory(parent))
        throw IoError("parent directory of '" + path.string() + "' does not exist");
}

void write_bytes(const fs::path& path, const void* data, std::size_t n) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

json read_json(const fs::path& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw FormatError("malformed JSON in '" + path.string() + "': " + e.what());
    }
}

template <typename T>
T json_field(const json& j, const char* key, const fs::path& where) {
    if (!j.contains(key)) throw FormatError("'" + where.string() + "' lacks field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw FormatError("'" + where.string() + "' field '" + key + "' has the wrong type");
    }
}

Grid<float> normalize(const Grid<double>& raw, double lo, double hi, Normalize policy) {
    if (policy == Normalize::DataRange) {
        lo = raw.minCoeff();
        hi = raw.maxCoeff();
    }
    if (!(hi > lo)) return Grid<float>::Zero(raw.rows(), raw.cols());
    const double scale = hi - lo;
    return ((raw - lo) / scale).max(0.0).min(1.0).cast<float>();
}

Image load_f32(const fs::path& path, Normalize policy) {
    const auto side = sidecar_path(path);
    if (!fs::exists(side)) throw FormatError("missing sidecar '" + side.string() + "'");
    const json meta = read_json(side);
    const auto w = json_field<Index>(meta, "width", side);
    const auto h = json_field<Index>(meta, "height", side);
    const double lo = meta.value("intensity_min", 0.0);
    const double hi = meta.value("intensity_max", 1.0);
    if (w <= 0 || h <= 0) throw FormatError("non-positive dimensions in '" + side.string() + "'");

    const auto bytes = read_bytes(path);
    if (bytes.size() != static_cast<std::size_t>(w * h) * sizeof(float))
        throw DimensionMismatch("'" + path.string() + "' holds " + std::to_string(bytes.size()) +
                                " bytes; sidecar declares " + std::to_string(w) + "x" + std::to_string(h));
    Grid<float> stored(h, w);
    std::memcpy(stored.data(), bytes.data(), bytes.size());
    if (!stored.allFinite()) throw FormatError("'" + path.string() + "' contains non-finite values");

    Image img(normalize(stored.cast<double>(), lo, hi, policy));
    if (meta.contains("meta") && meta["meta"].is_object())
        for (const auto& [k, v] : meta["meta"].items()) img.meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
    img.meta["raw_intensity_min"] = json(lo).dump();
    img.meta["raw_intensity_max"] = json(hi).dump();
    return img;
}

// Binary PGM ("P5"), 8- or 16-bit; 16-bit samples are big-endian.
Image load_pgm(const fs::path& path, Normalize policy) {
    const auto bytes = read_bytes(path);
    std::size_t pos = 0;
    auto next_token = [&]() {
        std::string tok;
        while (pos < bytes.size()) {
            const char c = bytes[pos];
            if (c == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                if (!tok.empty()) break;
                ++pos;
            } else {
                tok.push_back(c);
                ++pos;
            }
        }
        return tok;
    };
    if (next_token() != "P5") throw FormatError("'" + path.string() + "' is not a binary PGM");
    Index w = 0, h = 0;
    long maxval = 0;
    try {
        w = std::stol(next_token());
        h = std::stol(next_token());
        maxval = std::stol(next_token());
    } catch (const std::exception&) {
        throw FormatError("bad PGM header in '" + path.string() + "'");
    }
    ++pos;  // single whitespace before raster
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw FormatError("bad PGM header in '" + path.string() + "'");
    const std::size_t bps = maxval > 255 ? 2 : 1;
    if (bytes.size() - pos != static_cast<std::size_t>(w * h) * bps)
        throw FormatError("PGM raster size mismatch in '" + path.string() + "'");

    Grid<double> raw(h, w);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
    for (Index i = 0; i < raw.size(); ++i)
        raw.data()[i] = bps == 2 ? double((p[2 * i] << 8) | p[2 * i + 1]) : double(p[i]);

    Image img(normalize(raw, 0.0, static_cast<double>(maxval), policy));
    const auto side = sidecar_path(path);
    if (fs::exists(side)) {
        const json meta = read_json(side);
        if (meta.value("width", w) != w || meta.value("height", h) != h)
            throw DimensionMismatch("'" + path.string() + "' does not match its sidecar dimensions");
        if (meta.contains("meta") && meta["meta"].is_object())
            for (const auto& [k, v] : meta["meta"].items())
                img.meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    img.meta["raw_intensity_min"] = "0";
    img.meta["raw_intensity_max"] = std::to_string(maxval);
    return img;
}

json meta_json(const Meta& m) {
    json j = json::object();
    for (const auto& [k, v] : m) j[k] = v;
    return j;
}

}  // namespace

fs::path sidecar_path(const fs::path& data_path) {
    auto p = data_path;
    p.replace_extension(".json");
    return p;
}

std::string read_text(const fs::path& path) {
    const auto b = read_bytes(path);
    return {b.begin(), b.end()};
}

void write_text(const fs::path& path, const std::string& text, bool overwrite) {
    check_writable(path, overwrite);
    write_bytes(path, text.data(), text.size());
}

Image load_image(const fs::path& path, Normalize policy) {
    if (!fs::exists(path)) throw IoError("no such file '" + path.string() + "'");
    const auto ext = lower_ext(path);
    Image img;
    if (ext == ".f32")
        img = load_f32(path, policy);
    else if (ext == ".pgm")
        img = load_pgm(path, policy);
    else
        throw FormatError("unsupported image format '" + ext + "'");
    img.meta["source_path"] = path.string();
    return img;
}

void save_image(const Image& img, const fs::path& path, bool overwrite) {
    const auto ext = lower_ext(path);
    if (ext != ".f32" && ext != ".pgm") throw FormatError("unsupported image format '" + ext + "'");
    check_writable(path, overwrite);
    if (!img.pixels.allFinite()) throw InvalidArgument("save_image: non-finite pixels");

    json side = {{"width", img.width()}, {"height", img.height()}, {"intensity_min", 0.0}, {"intensity_max", 1.0}};
    if (ext == ".f32") {
        write_bytes(path, img.pixels.data(), static_cast<std::size_t>(img.size()) * sizeof(float));
    } else {
        std::string header = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n65535\n";
        std::vector<unsigned char> raster(static_cast<std::size_t>(img.size()) * 2);
        for (Index i = 0; i < img.size(); ++i) {
            const double v = std::clamp(static_cast<double>(img.pixels.data()[i]), 0.0, 1.0);
            const auto q = static_cast<std::uint16_t>(std::lround(v * 65535.0));
            raster[2 * i] = static_cast<unsigned char>(q >> 8);
            raster[2 * i + 1] = static_cast<unsigned char>(q & 0xff);
        }
        std::string blob = header;
        blob.append(reinterpret_cast<const char*>(raster.data()), raster.size());
        write_bytes(path, blob.data(), blob.size());
        side["intensity_max"] = 65535.0;
    }
    side["meta"] = meta_json(img.meta);
    write_text(sidecar_path(path), side.dump(2) + "\n", true);
}

void save_mask(const RegionMask& mask, const fs::path& path, bool overwrite) {
    check_writable(path, overwrite);
    write_bytes(path, mask.labels.data(), static_cast<std::size_t>(mask.labels.size()));
    const json side = {{"width", mask.width()},
                       {"height", mask.height()},
                       {"labels", {{"0", "background"}, {"1", "body"}, {"2", "lung"}}}};
    write_text(sidecar_path(path), side.dump(2) + "\n", true);
}

RegionMask load_mask(const fs::path& path) {
    const auto side = sidecar_path(path);
    if (!fs::exists(side)) throw FormatError("missing sidecar '" + side.string() + "'");
    const json meta = read_json(side);
    const auto w = json_field<Index>(meta, "width", side);
    const auto h = json_field<Index>(meta, "height", side);
    const auto bytes = read_bytes(path);
    if (w <= 0 || h <= 0 || bytes.size() != static_cast<std::size_t>(w * h))
        throw DimensionMismatch("'" + path.string() + "' does not match its sidecar dimensions");
    RegionMask m(h, w);
    std::memcpy(m.labels.data(), bytes.data(), bytes.size());
    if ((m.labels > 2).any()) throw FormatError("'" + path.string() + "' contains label codes outside {0,1,2}");
    return m;
}

void save_sinogram(const Sinogram& sino, const fs::path& path, bool overwrite) {
    check_writable(path, overwrite);
    write_bytes(path, sino.data.data(), static_cast<std::size_t>(sino.data.size()) * sizeof(float));
    const double start = sino.angles.empty() ? 0.0 : sino.angles.front();
    const double step = sino.angles.size() > 1 ? sino.angles[1] - sino.angles[0] : std::numbers::pi;
    const json side = {{"num_angles", sino.num_angles()},
                       {"num_bins", sino.num_bins()},
                       {"angle_range", {start, start + step * static_cast<double>(sino.angles.size())}},
                       {"bin_spacing", sino.bin_spacing},
                       {"angles", sino.angles}};
    write_text(sidecar_path(path), side.dump(2) + "\n", true);
}

Sinogram load_sinogram(const fs::path& path) {
    const auto side = sidecar_path(path);
    if (!fs::exists(side)) throw FormatError("missing sidecar '" + side.string() + "'");
    const json meta = read_json(side);
    const auto na = json_field<Index>(meta, "num_angles", side);
    const auto nb = json_field<Index>(meta, "num_bins", side);
    Sinogram s;
    s.bin_spacing = json_field<double>(meta, "bin_spacing", side);
    if (meta.contains("angles")) {
        s.angles = meta["angles"].get<std::vector<double>>();
    } else {
        const auto range = json_field<std::vector<double>>(meta, "angle_range", side);
        if (range.size() != 2) throw FormatError("angle_range must have two entries");
        for (Index a = 0; a < na; ++a) s.angles.push_back(range[0] + (range[1] - range[0]) / double(na) * double(a));
    }
    if (na <= 0 || nb <= 0 || static_cast<Index>(s.angles.size()) != na)
        throw FormatError("inconsistent sinogram geometry in '" + side.string() + "'");
    const auto bytes = read_bytes(path);
    if (bytes.size() != static_cast<std::size_t>(na * nb) * sizeof(float))
        throw DimensionMismatch("'" + path.string() + "' does not match its sidecar dimensions");
    s.data.resize(na, nb);
    std::memcpy(s.data.data(), bytes.data(), bytes.size());
    return s;
}

PairManifest load_manifest(const fs::path& path, bool check_files) {
    const json j = read_json(path);
    PairManifest m;
    m.format_version = j.value("format_version", 0);
    if (m.format_version != 1) throw ManifestError("unsupported manifest format_version " + std::to_string(m.format_version));
    if (!j.contains("entries") || !j["entries"].is_array()) throw ManifestError("manifest lacks an 'entries' array");

    const auto base = path.parent_path();
    std::set<std::string> seen;
    for (const auto& e : j["entries"]) {
        PairEntry p;
        try {
            p.pair_id = e.at("pair_id").get<std::string>();
            p.uldct_path = e.at("uldct_path").get<std::string>();
            p.ndct_path = e.at("ndct_path").get<std::string>();
            p.split = parse_split(e.at("split").get<std::string>());
        } catch (const json::exception& ex) {
            throw ManifestError(std::string("malformed manifest entry: ") + ex.what());
        }
        if (!seen.insert(p.pair_id).second) throw ManifestError("duplicate pair_id '" + p.pair_id + "'");
        for (auto* s : {&p.uldct_path, &p.ndct_path}) {
            fs::path fp(*s);
            if (fp.is_relative()) *s = (base / fp).lexically_normal().string();
            if (check_files && !fs::exists(*s))
                throw ManifestError("pair '" + p.pair_id + "': missing file '" + *s + "'");
        }
        m.entries.push_back(std::move(p));
    }
    return m;
}

void save_manifest(const PairManifest& manifest, const fs::path& path) {
    json entries = json::array();
    for (const auto& e : manifest.entries)
        entries.push_back({{"pair_id", e.pair_id},
                           {"uldct_path", e.uldct_path},
                           {"ndct_path", e.ndct_path},
                           {"split", split_name(e.split)}});
    const json j = {{"format_version", manifest.format_version}, {"entries", entries}};
    write_text(path, j.dump(2) + "\n", true);
}

}  // namespace ctpurify
