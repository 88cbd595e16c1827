#pragma once

// Brute-force reference computations. They work from raw records and plain
// loops rather than the library's data structures.

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fn/catalog_types.hpp"
#include "fn/taxonomy.hpp"

namespace fn::testing::oracle {

/// Label of `name` at `rank`, or its own name when no ranked node lies on the path.
inline std::string rank_label(const std::vector<taxonomy::TaxonRecord>& recs, const std::string& name,
                              taxonomy::Rank rank) {
    std::map<std::string, const taxonomy::TaxonRecord*> by_name;
    for (const auto& r : recs) by_name[r.name] = &r;
    const auto* start = by_name.at(name);
    if (!start->parent) return start->name;
    std::vector<const taxonomy::TaxonRecord*> path;
    for (const auto* cur = start; cur; cur = cur->parent ? by_name.at(*cur->parent) : nullptr) path.push_back(cur);
    for (const auto* r : path) {
        if (r->rank != taxonomy::Rank::unranked && static_cast<int>(r->rank) <= static_cast<int>(rank)) return r->name;
    }
    const taxonomy::TaxonRecord* coarsest = nullptr;
    for (const auto* r : path) {
        if (r->rank != taxonomy::Rank::unranked && (!coarsest || r->rank < coarsest->rank)) coarsest = r;
    }
    return coarsest ? coarsest->name : start->name;
}

inline std::set<std::string> subtree(const std::vector<taxonomy::TaxonRecord>& recs, const std::string& name) {
    std::set<std::string> out{name};
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& r : recs) {
            if (r.parent && out.count(*r.parent) && out.insert(r.name).second) grew = true;
        }
    }
    return out;
}

/// bin -> count for integer-valued per-image quantities.
inline std::map<std::int64_t, std::int64_t> tally(const std::vector<std::int64_t>& values) {
    std::map<std::int64_t, std::int64_t> out;
    for (auto v : values) ++out[v];
    return out;
}

inline std::vector<std::int64_t> instances(const std::vector<catalog::ImageEntry>& snap) {
    std::vector<std::int64_t> out;
    for (const auto& e : snap) out.push_back(static_cast<std::int64_t>(e.localizations.size()));
    return out;
}

inline std::vector<std::int64_t> concepts(const std::vector<catalog::ImageEntry>& snap,
                                          const std::vector<taxonomy::TaxonRecord>& recs, taxonomy::Rank rank) {
    std::vector<std::int64_t> out;
    for (const auto& e : snap) {
        std::set<std::string> labels;
        for (const auto& l : e.localizations) labels.insert(rank_label(recs, l.concept_name, rank));
        out.push_back(static_cast<std::int64_t>(labels.size()));
    }
    return out;
}

/// Per-bin counts over edges 10^(-5 + k/4), k = 0..20; clamped at both ends.
struct Sizes {
    std::vector<std::int64_t> counts = std::vector<std::int64_t>(20, 0);
    std::int64_t excluded = 0;
};

inline Sizes sizes(const std::vector<catalog::ImageEntry>& snap) {
    Sizes out;
    for (const auto& e : snap) {
        for (const auto& l : e.localizations) {
            if (!e.image.width_px || !e.image.height_px) {
                ++out.excluded;
                continue;
            }
            const double f = (l.bbox.width * l.bbox.height) /
                             (static_cast<double>(*e.image.width_px) * static_cast<double>(*e.image.height_px));
            int bin = 0;
            for (int k = 1; k < 20; ++k)
                if (f >= std::pow(10.0, (k - 20) / 4.0)) bin = k;
            ++out.counts[static_cast<std::size_t>(bin)];
        }
    }
    return out;
}

}  // namespace fn::testing::oracle
