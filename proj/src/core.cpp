#include "ctpurify/core.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace ctpurify {

const char* split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "train";
}

Split parse_split(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    throw ManifestError("unknown split '" + s + "'");
}

std::size_t PairManifest::count(Split s) const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [s](const PairEntry& e) { return e.split == s; }));
}

PairManifest split_manifest(std::vector<PairEntry> entries, const SplitFractions& fractions, std::uint64_t seed) {
    if (entries.empty()) throw InvalidArgument("split_manifest: empty entry list");
    const double total = fractions.train + fractions.val + fractions.test;
    if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("split_manifest: fractions must sum to 1");
    if (fractions.train < 0 || fractions.val < 0 || fractions.test < 0)
        throw InvalidArgument("split_manifest: fractions must be non-negative");

    std::set<std::string> seen;
    for (const auto& e : entries)
        if (!seen.insert(e.pair_id).second) throw ManifestError("duplicate pair_id '" + e.pair_id + "'");

    std::mt19937_64 rng(seed);
    std::shuffle(entries.begin(), entries.end(), rng);

    const auto n = static_cast<double>(entries.size());
    // The epsilon absorbs representation error such as 0.7 * 4310 = 3016.9999...
    auto n_train = static_cast<std::size_t>(std::floor(fractions.train * n + 0.5 + 1e-9));
    auto n_val = static_cast<std::size_t>(std::floor(fractions.val * n + 1e-9));
    n_train = std::min(n_train, entries.size());
    n_val = std::min(n_val, entries.size() - n_train);

    PairManifest out;
    out.entries = std::move(entries);
    for (std::size_t i = 0; i < out.entries.size(); ++i) {
        out.entries[i].split = i < n_train ? Split::Train : (i < n_train + n_val ? Split::Val : Split::Test);
    }
    return out;
}

}  // namespace ctpurify
