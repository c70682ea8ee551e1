#include "ctpurify/io.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

using namespace ctpurify;
using ctpurify::testing::TempDir;

namespace {

void write_pgm16(const fs::path& p, Index w, Index h, std::uint16_t value) {
    std::string blob = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n65535\n";
    for (Index i = 0; i < w * h; ++i) {
        blob.push_back(static_cast<char>(value >> 8));
        blob.push_back(static_cast<char>(value & 0xff));
    }
    write_text(p, blob);
}

}  // namespace

TEST(Pgm, AllZeroLoadsAsZero) {
    TempDir tmp;
    write_pgm16(tmp / "z.pgm", 7, 5, 0);
    const Image img = load_image(tmp / "z.pgm");
    EXPECT_EQ(img.width(), 7);
    EXPECT_EQ(img.height(), 5);
    EXPECT_TRUE((img.pixels == 0.0f).all());
}

TEST(Pgm, FullScaleLoadsAsOne) {
    TempDir tmp;
    write_pgm16(tmp / "f.pgm", 4, 4, 65535);
    EXPECT_TRUE((load_image(tmp / "f.pgm").pixels == 1.0f).all());
}

TEST(Pgm, EightBitFilesUseTheirMaxval) {
    TempDir tmp;
    std::string blob = "P5\n# comment\n2 1\n255\n";
    blob.push_back(static_cast<char>(0));
    blob.push_back(static_cast<char>(255));
    write_text(tmp / "e.pgm", blob);
    const Image img = load_image(tmp / "e.pgm");
    EXPECT_EQ(img.pixels(0, 0), 0.0f);
    EXPECT_EQ(img.pixels(0, 1), 1.0f);
    EXPECT_EQ(img.meta.at("raw_intensity_max"), "255");
}

TEST(Pgm, QuantizedRoundTripOn100RandomImages) {
    TempDir tmp;
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<Index> dim(1, 40);
    for (int t = 0; t < 100; ++t) {
        const Image img = ctpurify::testing::random_image(dim(rng), dim(rng), rng);
        const fs::path p = tmp / ("r" + std::to_string(t) + ".pgm");
        save_image(img, p);
        const Image back = load_image(p);
        ASSERT_EQ(back.width(), img.width());
        ASSERT_EQ(back.height(), img.height());
        for (Index i = 0; i < img.size(); ++i) {
            const long q = std::lround(static_cast<double>(img.pixels.data()[i]) * 65535.0);
            const auto expected = static_cast<float>(static_cast<double>(q) / 65535.0);
            ASSERT_TRUE(ctpurify::testing::bit_equal(back.pixels.data()[i], expected)) << "image " << t << " pixel " << i;
        }
        // Once quantized, a second trip is lossless.
        save_image(back, p);
        EXPECT_TRUE((load_image(p).pixels == back.pixels).all());
    }
}

TEST(F32, BitIdenticalRoundTrip) {
    TempDir tmp;
    std::mt19937_64 rng(5);
    Image img = ctpurify::testing::random_image(33, 17, rng);
    img.pixels(0, 0) = 0.0f;
    img.pixels(1, 0) = 1.0f;
    img.pixels(2, 0) = std::nextafter(0.0f, 1.0f);
    save_image(img, tmp / "a.f32");
    const Image back = load_image(tmp / "a.f32");
    for (Index i = 0; i < img.size(); ++i)
        ASSERT_TRUE(ctpurify::testing::bit_equal(back.pixels.data()[i], img.pixels.data()[i]));
}

TEST(F32, SidecarRecordsDimensions) {
    TempDir tmp;
    save_image(Image(256, 256, 0.25f), tmp / "s.f32");
    const auto side = nlohmann::json::parse(read_text(tmp / "s.json"));
    EXPECT_EQ(side["width"], 256);
    EXPECT_EQ(side["height"], 256);
}

TEST(F32, MetaTagsSurviveReload) {
    TempDir tmp;
    Image img(3, 3, 0.5f);
    img.meta["stage"] = "ipv2_uldct";
    save_image(img, tmp / "m.f32");
    const Image back = load_image(tmp / "m.f32");
    EXPECT_EQ(back.meta.at("stage"), "ipv2_uldct");
    EXPECT_EQ(back.meta.at("source_path"), (tmp / "m.f32").string());
    EXPECT_TRUE(back.meta.count("raw_intensity_min"));
}

TEST(F32, DeclaredRangeIsNormalized) {
    TempDir tmp;
    const float raw[4] = {-1000.0f, 0.0f, 1000.0f, 3000.0f};
    write_text(tmp / "hu.f32", std::string(reinterpret_cast<const char*>(raw), sizeof raw));
    write_text(tmp / "hu.json", R"({"width": 2, "height": 2, "intensity_min": -1000, "intensity_max": 1000})");
    const Image img = load_image(tmp / "hu.f32");
    EXPECT_FLOAT_EQ(img.pixels(0, 0), 0.0f);
    EXPECT_FLOAT_EQ(img.pixels(0, 1), 0.5f);
    EXPECT_FLOAT_EQ(img.pixels(1, 0), 1.0f);
    EXPECT_FLOAT_EQ(img.pixels(1, 1), 1.0f);
    const Image dr = load_image(tmp / "hu.f32", Normalize::DataRange);
    EXPECT_FLOAT_EQ(dr.pixels(1, 1), 1.0f);
    EXPECT_FLOAT_EQ(dr.pixels(0, 1), 0.25f);
}

TEST(F32, Errors) {
    TempDir tmp;
    EXPECT_THROW(load_image(tmp / "missing.f32"), IoError);
    write_text(tmp / "x.bmp", "BM");
    EXPECT_THROW(load_image(tmp / "x.bmp"), FormatError);
    write_text(tmp / "nosc.f32", std::string(16, '\0'));
    EXPECT_THROW(load_image(tmp / "nosc.f32"), FormatError);
    write_text(tmp / "bad.f32", std::string(12, '\0'));
    write_text(tmp / "bad.json", R"({"width": 2, "height": 2})");
    EXPECT_THROW(load_image(tmp / "bad.f32"), DimensionMismatch);

    save_image(Image(2, 2), tmp / "keep.f32");
    EXPECT_THROW(save_image(Image(2, 2), tmp / "keep.f32", false), IoError);
    EXPECT_THROW(save_image(Image(2, 2), tmp / "no" / "dir.f32"), IoError);
}

TEST(Pgm, SidecarDimensionMismatch) {
    TempDir tmp;
    write_pgm16(tmp / "d.pgm", 3, 3, 7);
    write_text(tmp / "d.json", R"({"width": 4, "height": 3})");
    EXPECT_THROW(load_image(tmp / "d.pgm"), DimensionMismatch);
}

TEST(Mask, RoundTripAndCodeValidation) {
    TempDir tmp;
    RegionMask m(5, 6);
    m.set(1, 2, Region::Body);
    m.set(3, 4, Region::Lung);
    save_mask(m, tmp / "m.u8");
    const RegionMask back = load_mask(tmp / "m.u8");
    EXPECT_TRUE((back.labels == m.labels).all());

    write_text(tmp / "bad.u8", std::string(30, '\x03'));
    write_text(tmp / "bad.json", R"({"width": 6, "height": 5})");
    EXPECT_THROW(load_mask(tmp / "bad.u8"), FormatError);
}

TEST(Sinogram, RoundTripKeepsGeometry) {
    TempDir tmp;
    Sinogram s;
    s.angles = {0.0, 0.5, 1.0};
    s.bin_spacing = 0.75;
    s.data = Grid<float>::Random(3, 8).abs();
    save_sinogram(s, tmp / "s.f32");
    const Sinogram back = load_sinogram(tmp / "s.f32");
    EXPECT_EQ(back.angles, s.angles);
    EXPECT_DOUBLE_EQ(back.bin_spacing, 0.75);
    EXPECT_TRUE((back.data == s.data).all());
}

TEST(Manifest, RoundTripResolvesRelativePaths) {
    TempDir tmp;
    fs::create_directories(tmp / "a");
    save_image(Image(2, 2), tmp / "a/u.f32");
    save_image(Image(2, 2), tmp / "a/n.f32");
    PairManifest m;
    m.entries.push_back({"a", "a/u.f32", "a/n.f32", Split::Val});
    save_manifest(m, tmp / "manifest.json");
    const PairManifest back = load_manifest(tmp / "manifest.json");
    ASSERT_EQ(back.entries.size(), 1u);
    EXPECT_EQ(back.entries[0].split, Split::Val);
    EXPECT_EQ(fs::path(back.entries[0].uldct_path), tmp / "a/u.f32");
}

TEST(Manifest, Errors) {
    TempDir tmp;
    write_text(tmp / "v2.json", R"({"format_version": 2, "entries": []})");
    EXPECT_THROW(load_manifest(tmp / "v2.json"), ManifestError);
    write_text(tmp / "dup.json", R"({"format_version": 1, "entries": [
        {"pair_id": "x", "uldct_path": "u", "ndct_path": "n", "split": "train"},
        {"pair_id": "x", "uldct_path": "u", "ndct_path": "n", "split": "test"}]})");
    EXPECT_THROW(load_manifest(tmp / "dup.json", false), ManifestError);
    write_text(tmp / "miss.json", R"({"format_version": 1, "entries": [
        {"pair_id": "lost_pair", "uldct_path": "u.f32", "ndct_path": "n.f32", "split": "train"}]})");
    try {
        load_manifest(tmp / "miss.json");
        FAIL() << "expected ManifestError";
    } catch (const ManifestError& e) {
        EXPECT_NE(std::string(e.what()).find("lost_pair"), std::string::npos);
    }
    EXPECT_NO_THROW(load_manifest(tmp / "miss.json", false));
}

TEST(Sidecar, ReplacesExtension) { EXPECT_EQ(sidecar_path("a/b/img.f32"), fs::path("a/b/img.json")); }
