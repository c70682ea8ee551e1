#pragma once

#include "ctpurify/core.hpp"
#include "ctpurify/io.hpp"

#include <atomic>
#include <cstring>
#include <deque>
#include <fstream>
#include <random>
#include <unistd.h>

namespace ctpurify::testing {

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("ctpurify_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline Image random_image(Index h, Index w, std::mt19937_64& rng) {
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    Image img(h, w);
    for (Index i = 0; i < img.size(); ++i) img.pixels.data()[i] = u(rng);
    return img;
}

inline bool bit_equal(float a, float b) {
    std::uint32_t x, y;
    std::memcpy(&x, &a, 4);
    std::memcpy(&y, &b, 4);
    return x == y;
}

inline std::string file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// FNV-1a over the relative paths and contents of every regular file under `root`.
inline std::uint64_t tree_hash(const fs::path& root) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root));
    std::sort(files.begin(), files.end());
    std::uint64_t h = 1469598103934665603ull;
    auto feed = [&](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
        h ^= 0xff;
        h *= 1099511628211ull;
    };
    for (const auto& f : files) {
        feed(f.generic_string());
        feed(file_bytes(root / f));
    }
    return h;
}

/// Background = 0-pixels reachable from a corner through 4-neighbour 0-pixels (queue BFS).
inline BinaryMask bfs_background(const BinaryMask& m) {
    const Index h = m.rows(), w = m.cols();
    BinaryMask seen = BinaryMask::Zero(h, w);
    std::deque<std::pair<Index, Index>> q;
    auto push = [&](Index y, Index x) {
        if (y < 0 || x < 0 || y >= h || x >= w) return;
        if (m(y, x) != 0 || seen(y, x)) return;
        seen(y, x) = 1;
        q.emplace_back(y, x);
    };
    push(0, 0);
    push(0, w - 1);
    push(h - 1, 0);
    push(h - 1, w - 1);
    while (!q.empty()) {
        auto [y, x] = q.front();
        q.pop_front();
        push(y - 1, x);
        push(y + 1, x);
        push(y, x - 1);
        push(y, x + 1);
    }
    return seen;
}

/// Exhaustive Otsu: between-class variance w0*w1*(m0-m1)^2 with bin-center intensities,
/// first maximum wins. Returns the chosen edge index k (threshold k / bins).
inline int brute_force_otsu_edge(const Image& img, int bins) {
    std::vector<double> hist(static_cast<std::size_t>(bins), 0.0);
    for (Index i = 0; i < img.size(); ++i) {
        int b = static_cast<int>(std::floor(static_cast<double>(img.pixels.data()[i]) * bins));
        b = std::min(std::max(b, 0), bins - 1);
        hist[static_cast<std::size_t>(b)] += 1.0;
    }
    const double n = static_cast<double>(img.size());
    int best = -1;
    long double best_var = -1;
    for (int k = 1; k < bins; ++k) {
        long double c0 = 0, c1 = 0, s0 = 0, s1 = 0;
        for (int b = 0; b < bins; ++b) {
            const long double center = (b + 0.5L) / bins;
            if (b < k) {
                c0 += hist[static_cast<std::size_t>(b)];
                s0 += hist[static_cast<std::size_t>(b)] * center;
            } else {
                c1 += hist[static_cast<std::size_t>(b)];
                s1 += hist[static_cast<std::size_t>(b)] * center;
            }
        }
        if (c0 == 0 || c1 == 0) continue;
        const long double diff = s0 / c0 - s1 / c1;
        const long double var = (c0 / n) * (c1 / n) * diff * diff;
        // Equal class partitions produce equal variances; compare with a relative guard so
        // rounding in the oracle cannot break the lower-edge tie rule.
        if (var > best_var * (1 + 1e-15L)) {
            best_var = var;
            best = k;
        }
    }
    return best;
}

/// A binary mask with random rectangles and rings, so holes and corner components occur often.
inline BinaryMask random_blob_mask(Index h, Index w, std::mt19937_64& rng) {
    BinaryMask m = BinaryMask::Zero(h, w);
    std::uniform_int_distribution<int> shapes(1, 8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int count = shapes(rng);
    for (int s = 0; s < count; ++s) {
        const double cy = u(rng) * static_cast<double>(h), cx = u(rng) * static_cast<double>(w);
        const double r_out = 2.0 + u(rng) * static_cast<double>(std::min(h, w)) / 2.0;
        const double r_in = u(rng) < 0.6 ? r_out * (0.3 + 0.5 * u(rng)) : 0.0;
        for (Index y = 0; y < h; ++y)
            for (Index x = 0; x < w; ++x) {
                const double d = std::hypot(static_cast<double>(y) - cy, static_cast<double>(x) - cx);
                if (d <= r_out && d >= r_in) m(y, x) = 1;
            }
    }
    const double speckle = u(rng) * 0.3;
    for (Index i = 0; i < m.size(); ++i)
        if (u(rng) < speckle) m.data()[i] ^= 1;
    return m;
}

}  // namespace ctpurify::testing
