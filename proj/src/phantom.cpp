#include "ctpurify/phantom.hpp"

#include <array>
#include <random>

namespace ctpurify {

namespace {

struct Ellipse {
    double value, a, b, x0, y0, phi_deg;

    bool contains(double x, double y) const {
        const double phi = phi_deg * std::numbers::pi / 180.0;
        const double dx = x - x0, dy = y - y0;
        const double u = dx * std::cos(phi) + dy * std::sin(phi);
        const double v = -dx * std::sin(phi) + dy * std::cos(phi);
        return (u * u) / (a * a) + (v * v) / (b * b) <= 1.0;
    }
};

// Pixel center in [-1, 1]^2, y pointing up.
std::array<double, 2> unit_coords(Index row, Index col, Index n) {
    const double s = static_cast<double>(n);
    return {(static_cast<double>(col) + 0.5) / s * 2.0 - 1.0, 1.0 - (static_cast<double>(row) + 0.5) / s * 2.0};
}

double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
    const double vx = bx - ax, vy = by - ay;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = px - (ax + t * vx), dy = py - (ay + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

Image shepp_logan(Index size) {
    if (size < 1) throw InvalidArgument("shepp_logan: size must be positive");
    static const std::array<Ellipse, 10> kEllipses{{
        {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
        {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
        {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
        {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
        {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
        {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
        {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
        {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
        {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
        {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
    }};
    Image img(size, size);
    for (Index r = 0; r < size; ++r)
        for (Index c = 0; c < size; ++c) {
            const auto [x, y] = unit_coords(r, c, size);
            double v = 0.0;
            for (const auto& e : kEllipses)
                if (e.contains(x, y)) v += e.value;
            img.pixels(r, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
    img.meta["phantom"] = "shepp-logan";
    return img;
}

LungPhantom lung_phantom(const LungPhantomOptions& opts) {
    const Index n = opts.size;
    if (n < kMinPhantomSize)
        throw InvalidArgument("lung_phantom: size must be at least " + std::to_string(kMinPhantomSize));

    constexpr double kBody = 0.5, kLung = 0.05, kVessel = 0.7, kRib = 0.9;
    const double sx = opts.shift_x * 2.0 / static_cast<double>(n);
    const double sy = -opts.shift_y * 2.0 / static_cast<double>(n);
    const Ellipse body{kBody, 0.85, 0.65, sx, sy, 0.0};
    const double ls = opts.lung_scale;
    const std::array<Ellipse, 2> lungs{{{kLung, 0.24 * ls, 0.40 * ls, -0.38 + sx, -0.02 + sy, 8.0},
                                        {kLung, 0.24 * ls, 0.40 * ls, 0.38 + sx, -0.02 + sy, -8.0}}};

    // Vessels: a star of branches from one hilum point per lung. Branch tips stay inside 0.65x of the
    // lung and branches are at least 40 degrees apart, so no lung pixel is ever enclosed.
    struct Segment {
        double ax, ay, bx, by;
    };
    std::vector<Segment> vessels;
    std::vector<std::array<double, 2>> hubs;
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const auto& lung : lungs) {
        const double phi = lung.phi_deg * std::numbers::pi / 180.0;
        auto to_world = [&](double u, double v) {
            return std::array<double, 2>{lung.x0 + u * std::cos(phi) - v * std::sin(phi),
                                         lung.y0 + u * std::sin(phi) + v * std::cos(phi)};
        };
        const double medial = lung.x0 < body.x0 ? 1.0 : -1.0;
        const double hu = medial * 0.35 * lung.a, hv = (unit(rng) - 0.5) * 0.3 * lung.b;
        hubs.push_back(to_world(hu, hv));
        const double base = 2.0 * std::numbers::pi * unit(rng);
        for (int k = 0; k < 4; ++k) {
            const double t = base + k * std::numbers::pi / 2 + (unit(rng) - 0.5) * std::numbers::pi / 4.5;
            // Longest reach from the hub along t that stays inside 0.65x of the lung.
            const double ea = 0.65 * lung.a, eb = 0.65 * lung.b, du = std::cos(t), dv = std::sin(t);
            const double qa = du * du / (ea * ea) + dv * dv / (eb * eb);
            const double qb = 2.0 * (hu * du / (ea * ea) + hv * dv / (eb * eb));
            const double qc = hu * hu / (ea * ea) + hv * hv / (eb * eb) - 1.0;
            const double reach = (-qb + std::sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa);
            const double len = reach * (0.5 + 0.5 * unit(rng));
            const auto hub = to_world(hu, hv), tip = to_world(hu + len * du, hv + len * dv);
            vessels.push_back({hub[0], hub[1], tip[0], tip[1]});
        }
    }
    const double pixel = 2.0 / static_cast<double>(n);
    const double vessel_half_width = std::max(0.75, static_cast<double>(n) / 256.0) * pixel;
    // Branches converge at the hub; a node disc covers the narrow wedges between them.
    const double hub_radius = std::min((2.0 * vessel_half_width + 2.0 * pixel) / std::sin(40.0 * std::numbers::pi / 180.0),
                                       0.25 * lungs[0].a);

    // Rib arcs: a band of the body ellipse between 0.88x and 0.93x, in angular segments.
    auto in_rib = [&](double x, double y) {
        const double u = (x - body.x0) / body.a, v = (y - body.y0) / body.b;
        const double r = std::sqrt(u * u + v * v);
        if (r < 0.88 || r > 0.93) return false;
        double ang = std::atan2(v, u) * 180.0 / std::numbers::pi;
        if (ang < 0) ang += 360.0;
        return std::fmod(ang + 5.0, 30.0) < 12.0;
    };

    LungPhantom out;
    out.image = Image(n, n);
    out.truth = RegionMask(n, n);
    for (Index r = 0; r < n; ++r)
        for (Index c = 0; c < n; ++c) {
            const auto [x, y] = unit_coords(r, c, n);
            if (!body.contains(x, y)) continue;
            double v = kBody;
            Region label = Region::Body;
            if (in_rib(x, y)) v = kRib;
            for (const auto& lung : lungs)
                if (lung.contains(x, y)) {
                    v = kLung;
                    label = Region::Lung;
                    for (const auto& h : hubs)
                        if (std::hypot(x - h[0], y - h[1]) <= hub_radius) {
                            v = kVessel;
                            label = Region::Body;
                        }
                    for (const auto& s : vessels)
                        if (segment_distance(x, y, s.ax, s.ay, s.bx, s.by) <= vessel_half_width) {
                            v = kVessel;
                            label = Region::Body;
                        }
                }
            out.image.pixels(r, c) = static_cast<float>(v);
            out.truth.set(r, c, label);
        }
    out.image.meta["phantom"] = "lung";
    out.image.meta["phantom_seed"] = std::to_string(opts.seed);
    return out;
}

}  // namespace ctpurify
