#pragma once

// Random fixtures shared by unit and acceptance tests.

#include <random>
#include <string>
#include <vector>

#include "fn/catalog_types.hpp"
#include "fn/taxonomy.hpp"

namespace fn::testing {

inline taxonomy::Rank nearest_rank(const std::vector<taxonomy::TaxonRecord>& recs, std::size_t i) {
    for (std::optional<std::size_t> cur = i; cur;) {
        if (taxonomy::is_ranked(recs[*cur].rank)) return recs[*cur].rank;
        if (!recs[*cur].parent) break;
        cur = std::stoul(recs[*cur].parent->substr(1));
    }
    return taxonomy::Rank::unranked;
}

/// Valid random tree of `n` nodes named t0..t{n-1}; t0 is the root. About a
/// fifth of the nodes are unranked; ranked nodes are always strictly finer
/// than their nearest ranked ancestor.
inline std::vector<taxonomy::TaxonRecord> random_taxonomy(std::mt19937_64& rng, std::size_t n) {
    using taxonomy::Rank;
    std::vector<taxonomy::TaxonRecord> recs;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    recs.push_back({"t0", coin(rng) < 0.5 ? Rank::unranked : Rank::kingdom, std::nullopt, {}});
    for (std::size_t i = 1; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        const std::size_t parent = pick(rng);
        const Rank above = nearest_rank(recs, parent);
        const int lo = taxonomy::is_ranked(above) ? static_cast<int>(above) + 1 : 0;
        Rank rank = Rank::unranked;
        if (lo <= static_cast<int>(Rank::species) && coin(rng) > 0.2) {
            // Bias toward the next rank down so deep chains appear.
            std::uniform_int_distribution<int> step(lo, std::min(lo + 2, static_cast<int>(Rank::species)));
            rank = static_cast<Rank>(step(rng));
        }
        recs.push_back({"t" + std::to_string(i), rank, "t" + std::to_string(parent), {}});
    }
    return recs;
}

/// Random non-overlapping supercategory map with up to `labels` labels.
inline taxonomy::SupercategoryMap random_supercategories(std::mt19937_64& rng, const taxonomy::ConceptTree& tree,
                                                         std::size_t labels) {
    using taxonomy::NodeId;
    std::vector<taxonomy::SupercategoryMap::Entry> entries;
    for (std::size_t l = 0; l < labels; ++l) entries.push_back({"s" + std::to_string(l), {}});
    std::vector<std::pair<NodeId, std::size_t>> taken;
    std::uniform_int_distribution<std::uint32_t> node(0, static_cast<std::uint32_t>(tree.size() - 1));
    std::uniform_int_distribution<std::size_t> label(0, labels - 1);
    for (std::size_t attempt = 0; attempt < labels * 3; ++attempt) {
        const NodeId n{node(rng)};
        const std::size_t l = label(rng);
        bool clash = false;
        for (const auto& [other, ol] : taken) {
            if (ol != l && (tree.is_ancestor_or_self(other, n) || tree.is_ancestor_or_self(n, other))) clash = true;
        }
        if (clash) continue;
        taken.emplace_back(n, l);
        entries[l].roots.push_back(tree.name(n));
    }
    return taxonomy::SupercategoryMap(std::move(entries));
}

/// Up to `max_images` images with 0..5 boxes of random concepts drawn from
/// the tree; about a fifth lack dimensions. Uuids are "img-NN".
inline std::vector<catalog::ImageEntry> random_snapshot(std::mt19937_64& rng, const taxonomy::ConceptTree& tree,
                                                        std::size_t max_images) {
    std::uniform_int_distribution<std::size_t> count(1, max_images);
    std::uniform_int_distribution<int> boxes(0, 5), dim(1, 64);
    std::uniform_int_distribution<std::uint32_t> node(0, static_cast<std::uint32_t>(tree.size() - 1));
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::vector<catalog::ImageEntry> out(count(rng));
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto& e = out[i];
        e.image.uuid = "img-" + std::string(i < 10 ? "0" : "") + std::to_string(i);
        e.image.image_url = e.image.uuid + ".png";
        const int w = dim(rng), h = dim(rng);
        if (coin(rng) > 0.2) {
            e.image.width_px = w;
            e.image.height_px = h;
        }
        for (int b = boxes(rng); b > 0; --b) {
            catalog::Localization l;
            l.uuid = e.image.uuid + "-" + std::to_string(b);
            l.concept_name = tree.name(taxonomy::NodeId{node(rng)});
            std::uniform_int_distribution<int> bx(0, w - 1), by(0, h - 1);
            l.bbox.x = bx(rng);
            l.bbox.y = by(rng);
            std::uniform_int_distribution<int> bw(1, w - static_cast<int>(l.bbox.x)), bh(1, h - static_cast<int>(l.bbox.y));
            l.bbox.width = bw(rng);
            l.bbox.height = bh(rng);
            e.localizations.push_back(l);
        }
    }
    return out;
}

}  // namespace fn::testing
