#pragma once

#include "ctpurify/core.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <complex>
#include <random>

namespace ctpurify {

enum class ReconFilter { RamLak, None };

namespace detail {

/// Center `img` in a zero square of side max(rows, cols).
template <typename Scalar>
Grid<Scalar> pad_to_square(const Grid<Scalar>& img) {
    const Index n = std::max(img.rows(), img.cols());
    if (img.rows() == n && img.cols() == n) return img;
    Grid<Scalar> out = Grid<Scalar>::Zero(n, n);
    out.block((n - img.rows()) / 2, (n - img.cols()) / 2, img.rows(), img.cols()) = img;
    return out;
}

/// Bilinear sample with zero outside the grid.
template <typename Scalar>
Scalar bilinear(const Grid<Scalar>& g, double x, double y) {
    const double fx0 = std::floor(x), fy0 = std::floor(y);
    const auto x0 = static_cast<Index>(fx0), y0 = static_cast<Index>(fy0);
    const double ax = x - fx0, ay = y - fy0;
    const Index w = g.cols(), h = g.rows();
    double acc = 0.0;
    auto add = [&](Index yy, Index xx, double wgt) {
        if (xx >= 0 && yy >= 0 && xx < w && yy < h) acc += wgt * static_cast<double>(g(yy, xx));
    };
    add(y0, x0, (1 - ax) * (1 - ay));
    add(y0, x0 + 1, ax * (1 - ay));
    add(y0 + 1, x0, (1 - ax) * ay);
    add(y0 + 1, x0 + 1, ax * ay);
    return static_cast<Scalar>(acc);
}

/// Parameter interval [lo, hi] of the line p + s*d inside the open box (-1, n)^2.
inline bool clip_ray(double px, double py, double dx, double dy, double n, double& lo, double& hi) {
    auto slab = [&](double p, double d) {
        if (std::abs(d) < 1e-15) return p > -1.0 && p < n;
        double a = (-1.0 - p) / d, b = (n - p) / d;
        if (a > b) std::swap(a, b);
        lo = std::max(lo, a);
        hi = std::min(hi, b);
        return true;
    };
    return slab(px, dx) && slab(py, dy) && lo <= hi;
}

/// Frequency response of the band-limited Ram-Lak kernel for a padded length `len`.
template <typename Scalar>
std::vector<Scalar> ramlak_response(Index len, double spacing) {
    const double pi = std::numbers::pi;
    std::vector<Scalar> h(static_cast<std::size_t>(len), Scalar(0));
    for (Index i = 0; i < len; ++i) {
        const Index n = i <= len / 2 ? i : i - len;
        double v = 0.0;
        if (n == 0) v = 0.25 / (spacing * spacing);
        else if (n % 2 != 0) v = -1.0 / (pi * pi * double(n) * double(n) * spacing * spacing);
        h[static_cast<std::size_t>(i)] = static_cast<Scalar>(v);
    }
    Eigen::FFT<Scalar> fft;
    std::vector<std::complex<Scalar>> spec;
    fft.fwd(spec, h);
    std::vector<Scalar> resp(static_cast<std::size_t>(len));
    for (std::size_t i = 0; i < resp.size(); ++i) resp[i] = spec[i].real() * static_cast<Scalar>(spacing);
    return resp;
}

}  // namespace detail

/// Sample spacing along each ray, in pixels.
inline constexpr double kRayStep = 0.5;

/// Parallel-beam line integrals. Each ray is sampled every kRayStep pixels with bilinear
/// interpolation; rows follow geom.angles(), bins are centered on the image center.
template <typename Scalar>
BasicSinogram<Scalar> radon(const Grid<Scalar>& image, const ProjectionGeometry& geom) {
    geom.validate();
    const Grid<Scalar> img = detail::pad_to_square(image);
    const Index n = img.rows();
    const int nb = geom.bins_for(n);
    const double center = (static_cast<double>(n) - 1.0) / 2.0;
    const double det_center = (static_cast<double>(nb) - 1.0) / 2.0;

    BasicSinogram<Scalar> sino;
    sino.angles = geom.angles();
    sino.bin_spacing = geom.bin_spacing;
    sino.data = Grid<Scalar>::Zero(static_cast<Index>(sino.angles.size()), nb);

    for (Index a = 0; a < sino.num_angles(); ++a) {
        const double th = sino.angles[static_cast<std::size_t>(a)];
        const double c = std::cos(th), s = std::sin(th);
        for (Index b = 0; b < nb; ++b) {
            const double t = (static_cast<double>(b) - det_center) * geom.bin_spacing;
            const double px = center + t * c, py = center + t * s;
            double lo = -1e300, hi = 1e300;
            if (!detail::clip_ray(px, py, -s, c, static_cast<double>(n), lo, hi)) continue;
            const auto k0 = static_cast<Index>(std::floor(lo / kRayStep));
            const auto k1 = static_cast<Index>(std::ceil(hi / kRayStep));
            double acc = 0.0;
            for (Index k = k0; k <= k1; ++k) {
                const double sk = static_cast<double>(k) * kRayStep;
                acc += static_cast<double>(detail::bilinear(img, px - sk * s, py + sk * c));
            }
            sino.data(a, b) = static_cast<Scalar>(acc * kRayStep);
        }
    }
    return sino;
}

/// Filtered back-projection without clamping; `out_size` is the square output side.
template <typename Scalar>
Grid<Scalar> backproject(const BasicSinogram<Scalar>& sino, ReconFilter filter, Index out_size) {
    if (sino.num_angles() < 1 || sino.num_bins() < 1) throw InvalidArgument("backproject: empty sinogram");
    if (static_cast<Index>(sino.angles.size()) != sino.num_angles())
        throw DimensionMismatch("backproject: angle list does not match sinogram rows");
    if (out_size < 1) throw InvalidArgument("backproject: out_size must be positive");

    const Index nb = sino.num_bins();
    Grid<Scalar> filtered = sino.data;
    if (filter == ReconFilter::RamLak) {
        Index len = 64;
        while (len < 2 * nb) len *= 2;
        const auto resp = detail::ramlak_response<Scalar>(len, sino.bin_spacing);
        Eigen::FFT<Scalar> fft;
        std::vector<Scalar> row(static_cast<std::size_t>(len));
        std::vector<std::complex<Scalar>> spec;
        std::vector<Scalar> back;
        for (Index a = 0; a < sino.num_angles(); ++a) {
            std::fill(row.begin(), row.end(), Scalar(0));
            for (Index b = 0; b < nb; ++b) row[static_cast<std::size_t>(b)] = sino.data(a, b);
            fft.fwd(spec, row);
            for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= resp[i];
            fft.inv(back, spec);
            for (Index b = 0; b < nb; ++b) filtered(a, b) = back[static_cast<std::size_t>(b)];
        }
    }

    const double center = (static_cast<double>(out_size) - 1.0) / 2.0;
    const double det_center = (static_cast<double>(nb) - 1.0) / 2.0;
    const double weight = std::numbers::pi / static_cast<double>(sino.num_angles());
    Grid<double> acc = Grid<double>::Zero(out_size, out_size);
    for (Index a = 0; a < sino.num_angles(); ++a) {
        const double th = sino.angles[static_cast<std::size_t>(a)];
        const double c = std::cos(th) / sino.bin_spacing, s = std::sin(th) / sino.bin_spacing;
        for (Index y = 0; y < out_size; ++y) {
            const double base = (static_cast<double>(y) - center) * s + det_center;
            for (Index x = 0; x < out_size; ++x) {
                const double pos = base + (static_cast<double>(x) - center) * c;
                const double f = std::floor(pos);
                const auto i0 = static_cast<Index>(f);
                const double frac = pos - f;
                double v = 0.0;
                if (i0 >= 0 && i0 < nb) v += (1.0 - frac) * static_cast<double>(filtered(a, i0));
                if (i0 + 1 >= 0 && i0 + 1 < nb) v += frac * static_cast<double>(filtered(a, i0 + 1));
                acc(y, x) += v;
            }
        }
    }
    return (acc * weight).cast<Scalar>();
}

/// Dose-calibrated Beer-Lambert photon noise, applied element by element in row-major order:
/// counts ~ Poisson(d * N0 * exp(-mu * p)) + Normal(0, sigma_e^2), floored at 1, then log-transformed back.
template <typename Scalar>
BasicSinogram<Scalar> inject_noise(const BasicSinogram<Scalar>& sino, const NoiseModel& model) {
    model.validate();
    if (!sino.data.allFinite()) throw InvalidArgument("inject_noise: non-finite sinogram");
    if ((sino.data < Scalar(-1e-9)).any()) throw InvalidArgument("inject_noise: negative line integrals");

    std::mt19937_64 rng(model.seed);
    std::normal_distribution<double> electronic(0.0, model.electronic_sigma);
    const double blank = model.dose_fraction * model.incident_photons_n0;

    BasicSinogram<Scalar> out = sino;
    for (Index i = 0; i < out.data.size(); ++i) {
        const double p = std::max(0.0, static_cast<double>(sino.data.data()[i]));
        const double lambda = blank * std::exp(-p * model.mu_scale);
        double counts = 0.0;
        if (lambda > 0.0) counts = static_cast<double>(std::poisson_distribution<std::int64_t>(lambda)(rng));
        if (model.electronic_sigma > 0.0) counts += electronic(rng);
        counts = std::max(counts, 1.0);
        out.data.data()[i] = static_cast<Scalar>(-std::log(counts / blank) / model.mu_scale);
    }
    return out;
}

/// inject_noise on line integrals expressed in units of `length_unit` pixels; the result is
/// returned in pixel units again.
template <typename Scalar>
BasicSinogram<Scalar> inject_noise_scaled(const BasicSinogram<Scalar>& sino, const NoiseModel& model, double length_unit) {
    if (!(length_unit > 0.0)) throw InvalidArgument("inject_noise: length unit must be positive");
    BasicSinogram<Scalar> scaled = sino;
    scaled.data /= static_cast<Scalar>(length_unit);
    auto noisy = inject_noise(scaled, model);
    noisy.data *= static_cast<Scalar>(length_unit);
    return noisy;
}

/// Field radius (half the image side) that simulate_uldct uses as the length unit.
inline double field_radius(Index image_size) { return static_cast<double>(image_size) / 2.0; }

// Float-image entry points.
Sinogram radon(const Image& img, const ProjectionGeometry& geom);
/// Filtered back-projection clamped to [0, 1].
Image iradon(const Sinogram& sino, ReconFilter filter, Index out_size);
/// As above, after checking the sinogram shape against `geom` for an `out_size` image.
Image iradon(const Sinogram& sino, const ProjectionGeometry& geom, ReconFilter filter, Index out_size);

/// radon -> inject_noise -> iradon. Line integrals are divided by half the image side before the
/// noise step, so mu_scale acts on a field of radius 1.
Image simulate_uldct(const Image& ndct, const NoiseModel& model, const ProjectionGeometry& geom);

}  // namespace ctpurify
