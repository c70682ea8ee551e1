#include "ctpurify/metrics.hpp"
#include "ctpurify/phantom.hpp"
#include "ctpurify/tomography.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace ctpurify;

namespace {

Grid<double> random_grid(Index n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Grid<double> g(n, n);
    for (Index i = 0; i < g.size(); ++i) g.data()[i] = u(rng);
    return g;
}

Grid<double> disk(Index n, double radius) {
    Grid<double> g = Grid<double>::Zero(n, n);
    const double c = (static_cast<double>(n) - 1) / 2;
    for (Index y = 0; y < n; ++y)
        for (Index x = 0; x < n; ++x)
            if (std::hypot(static_cast<double>(x) - c, static_cast<double>(y) - c) <= radius) g(y, x) = 1.0;
    return g;
}

BasicSinogram<double> constant_sinogram(Index samples, double p) {
    BasicSinogram<double> s;
    s.angles = {0.0};
    s.data = Grid<double>::Constant(1, samples, p);
    return s;
}

struct Moments {
    double mean, var;
};

Moments moments(const Grid<double>& g) {
    const double mean = g.mean();
    return {mean, (g - mean).square().sum() / static_cast<double>(g.size() - 1)};
}

double circle_rmse(const Image& a, const Image& b) {
    const Index n = a.height();
    const double c = (static_cast<double>(n) - 1) / 2;
    double se = 0;
    Index cnt = 0;
    for (Index y = 0; y < n; ++y)
        for (Index x = 0; x < n; ++x)
            if (std::hypot(static_cast<double>(x) - c, static_cast<double>(y) - c) <= n / 2.0) {
                const double d = static_cast<double>(a.pixels(y, x)) - static_cast<double>(b.pixels(y, x));
                se += d * d;
                ++cnt;
            }
    return std::sqrt(se / static_cast<double>(cnt));
}

}  // namespace

TEST(Radon, ZeroImageGivesZeroSinogram) {
    ProjectionGeometry g;
    g.num_angles = 30;
    const Sinogram s = radon(Image(40, 40), g);
    EXPECT_EQ(s.num_angles(), 30);
    EXPECT_EQ(s.num_bins(), g.bins_for(40));
    EXPECT_TRUE((s.data == 0.0f).all());
}

TEST(Radon, Linearity) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    ProjectionGeometry g;
    g.num_angles = 45;
    for (int t = 0; t < 5; ++t) {
        const Grid<double> x = random_grid(32, rng), y = random_grid(32, rng);
        const double a = coef(rng), b = coef(rng);
        const auto lhs = radon<double>((a * x + b * y).eval(), g);
        const auto rx = radon<double>(x, g), ry = radon<double>(y, g);
        EXPECT_LT((lhs.data - (a * rx.data + b * ry.data)).abs().maxCoeff(), 1e-9);
    }
}

TEST(Radon, PerAngleMassConservation) {
    std::mt19937_64 rng(2);
    ProjectionGeometry g;
    g.num_angles = 90;
    for (int t = 0; t < 5; ++t) {
        const Grid<double> x = random_grid(48, rng);
        const auto s = radon<double>(x, g);
        const double mass = x.sum();
        for (Index a = 0; a < s.num_angles(); ++a) EXPECT_LT(std::abs(s.data.row(a).sum() - mass) / mass, 0.005);
    }
}

TEST(Radon, DiskProjectionsAgreeWithinInterpolationTolerance) {
    ProjectionGeometry g;
    g.num_angles = 180;
    const auto s = radon<double>(disk(96, 30.0), g);
    const double peak = s.data.row(0).maxCoeff();
    EXPECT_NEAR(peak, 2 * 30.0, 2.0);
    for (Index a = 1; a < s.num_angles(); ++a) EXPECT_LT((s.data.row(a) - s.data.row(0)).abs().maxCoeff() / peak, 0.05);
    // Quarter turns map the pixel grid onto itself.
    EXPECT_LT((s.data.row(90) - s.data.row(0).reverse()).abs().maxCoeff(), 1e-9);
}

TEST(Radon, NonSquareIsPaddedToSquare) {
    Image img(20, 40, 0.0f);
    img.pixels.block(5, 10, 10, 20) = 1.0f;
    ProjectionGeometry g;
    g.num_angles = 8;
    const Sinogram s = radon(img, g);
    EXPECT_EQ(s.num_bins(), g.bins_for(40));
    EXPECT_NEAR(s.data.row(0).cast<double>().sum(), 200.0, 1.0);
}

TEST(Radon, NonNegativeForNonNegativeInput) {
    std::mt19937_64 rng(3);
    ProjectionGeometry g;
    g.num_angles = 20;
    const auto s = radon<double>(random_grid(30, rng), g);
    EXPECT_GE(s.data.minCoeff(), -1e-9);
}

TEST(Iradon, ZeroSinogramGivesZeroImage) {
    Sinogram s;
    s.angles = ProjectionGeometry{}.angles();
    s.data = Grid<float>::Zero(360, 50);
    EXPECT_TRUE((iradon(s, ReconFilter::RamLak, 35).pixels == 0.0f).all());
}

TEST(Iradon, SheppLoganRoundTrip) {
    const Image sl = shepp_logan(128);
    ProjectionGeometry g;
    const Sinogram s = radon(sl, g);
    const Image rec = iradon(s, g, ReconFilter::RamLak, 128);
    const Image blur = iradon(s, g, ReconFilter::None, 128);
    EXPECT_TRUE(all_in_unit_range(rec.pixels));
    EXPECT_LT(circle_rmse(rec, sl), 0.07);
    EXPECT_GT(circle_rmse(blur, sl), circle_rmse(rec, sl));
}

TEST(Iradon, PointObjectIsBlurredWithoutFilter) {
    Grid<double> pt = Grid<double>::Zero(64, 64);
    pt(32, 32) = 1.0;
    ProjectionGeometry g;
    const auto s = radon<double>(pt, g);
    const Grid<double> ramp = backproject<double>(s, ReconFilter::RamLak, 64);
    const Grid<double> plain = backproject<double>(s, ReconFilter::None, 64);
    EXPECT_LT((ramp - pt).square().sum(), (plain / plain.maxCoeff() - pt).square().sum());
    // Unfiltered back-projection spreads the point into a 1/r halo.
    EXPECT_GT(plain(32, 42) / plain(32, 32), 0.05);
    EXPECT_LT(std::abs(ramp(32, 42)) / ramp(32, 32), 0.02);
}

TEST(Iradon, ShapeMismatchIsAnError) {
    ProjectionGeometry g;
    g.num_angles = 10;
    const Sinogram s = radon(Image(32, 32), g);
    ProjectionGeometry other = g;
    other.num_angles = 11;
    EXPECT_THROW(iradon(s, other, ReconFilter::RamLak, 32), DimensionMismatch);
    EXPECT_THROW(iradon(s, g, ReconFilter::RamLak, 40), DimensionMismatch);
    EXPECT_THROW(iradon(s, ReconFilter::RamLak, 0), InvalidArgument);
}

TEST(Noise, VarianceMatchesDeltaMethod) {
    for (double sigma_e : {0.0, 2.0, 5.0}) {
        NoiseModel m;
        m.electronic_sigma = sigma_e;
        m.seed = 42;
        const double p = 0.5;
        const auto noisy = inject_noise(constant_sinogram(100000, p), m);
        const double lambda = m.dose_fraction * m.incident_photons_n0 * std::exp(-p * m.mu_scale);
        const double predicted = (lambda + sigma_e * sigma_e) / (lambda * lambda) / (m.mu_scale * m.mu_scale);
        const auto mo = moments(noisy.data);
        EXPECT_NEAR(mo.var / predicted, 1.0, 0.10) << "sigma_e " << sigma_e;
        EXPECT_LT(std::abs(mo.mean - p) / p, 0.02);
    }
}

TEST(Noise, HalvingDoseDoublesVariance) {
    NoiseModel m;
    m.electronic_sigma = 0.0;
    m.seed = 5;
    const auto full = moments(inject_noise(constant_sinogram(100000, 0.3), m).data);
    m.dose_fraction /= 2;
    const auto half = moments(inject_noise(constant_sinogram(100000, 0.3), m).data);
    EXPECT_NEAR(half.var / full.var, 2.0, 0.2);
}

TEST(Noise, VanishesAtHugePhotonCount) {
    NoiseModel m;
    m.dose_fraction = 1.0;
    m.incident_photons_n0 = 1e12;
    m.electronic_sigma = 0.0;
    m.seed = 9;
    std::mt19937_64 rng(1);
    ProjectionGeometry g;
    g.num_angles = 30;
    const auto s = radon<double>(random_grid(32, rng), g);
    const auto unit = field_radius(32);
    const auto noisy = inject_noise_scaled(s, m, unit);
    EXPECT_LT((noisy.data - s.data).abs().maxCoeff(), 1e-3 * unit);
    const auto direct = inject_noise(constant_sinogram(1000, 1.5), m);
    EXPECT_LT((direct.data - 1.5).abs().maxCoeff(), 1e-3);
}

TEST(Noise, DeterministicUnderSeed) {
    NoiseModel m;
    m.seed = 123;
    const auto a = inject_noise(constant_sinogram(5000, 0.2), m);
    const auto b = inject_noise(constant_sinogram(5000, 0.2), m);
    EXPECT_TRUE((a.data == b.data).all());
    m.seed = 124;
    EXPECT_FALSE((inject_noise(constant_sinogram(5000, 0.2), m).data == a.data).all());
}

TEST(Noise, Errors) {
    NoiseModel m;
    EXPECT_THROW(inject_noise(constant_sinogram(4, -0.1), m), InvalidArgument);
    m.dose_fraction = 0;
    EXPECT_THROW(inject_noise(constant_sinogram(4, 0.1), m), InvalidArgument);
    EXPECT_THROW(inject_noise_scaled(constant_sinogram(4, 0.1), NoiseModel{}, 0.0), InvalidArgument);
}

TEST(SimulateUldct, AddsNoiseInLungsAndIsDeterministic) {
    LungPhantomOptions o;
    o.size = 128;
    o.seed = 3;
    const auto ph = lung_phantom(o);
    NoiseModel m;
    m.seed = 8;
    const ProjectionGeometry g;
    const Image a = simulate_uldct(ph.image, m, g);
    const Image b = simulate_uldct(ph.image, m, g);
    EXPECT_TRUE((a.pixels == b.pixels).all());
    EXPECT_TRUE(all_in_unit_range(a.pixels));
    EXPECT_GT(region_stats(a, ph.truth, Region::Lung)->std, region_stats(ph.image, ph.truth, Region::Lung)->std);
}

TEST(SimulateUldct, LowerDoseLeavesLargerBodyResidual) {
    LungPhantomOptions o;
    o.size = 128;
    const auto ph = lung_phantom(o);
    NoiseModel low, high;
    low.seed = high.seed = 21;
    high.dose_fraction = 0.5;
    const ProjectionGeometry g;
    const double r_low = rmse(simulate_uldct(ph.image, low, g), ph.image, ph.truth, Region::Body);
    const double r_high = rmse(simulate_uldct(ph.image, high, g), ph.image, ph.truth, Region::Body);
    EXPECT_GT(r_low, r_high);
}
