#include "fn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "fn/util/csv.hpp"
#include "fn/util/strings.hpp"

namespace fn::stats {

namespace {

void require_nonempty(Snapshot s) {
    if (s.empty()) throw StatsError(ErrorKind::empty_snapshot, "snapshot has no images");
}

Histogram integer_histogram(const std::vector<std::int64_t>& values) {
    Histogram h;
    const std::int64_t max = values.empty() ? 0 : *std::max_element(values.begin(), values.end());
    for (std::int64_t k = 0; k <= max + 1; ++k) h.edges.push_back(static_cast<double>(k));
    h.counts.assign(static_cast<std::size_t>(max + 1), 0);
    for (auto v : values) ++h.counts[static_cast<std::size_t>(v)];
    h.total = static_cast<std::int64_t>(values.size());
    return h;
}

std::string label_at(const taxonomy::ConceptTree& tree, std::string_view concept_name, taxonomy::Rank rank) {
    auto id = tree.find(concept_name);
    if (!id) {
        throw StatsError(ErrorKind::unresolvable_concept, "unresolvable concept: " + std::string(concept_name));
    }
    try {
        return tree.rank_label(*id, rank);
    } catch (const taxonomy::TaxonomyError& e) {
        if (e.kind() != taxonomy::ErrorKind::no_rank) throw;
        return tree.name(*id);
    }
}

}  // namespace

std::vector<double> Histogram::percent() const {
    std::vector<double> out(counts.size(), 0.0);
    if (total == 0) return out;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        out[i] = 100.0 * static_cast<double>(counts[i]) / static_cast<double>(total);
    }
    return out;
}

Histogram instances_per_image(Snapshot snapshot) {
    require_nonempty(snapshot);
    std::vector<std::int64_t> n;
    n.reserve(snapshot.size());
    for (const auto& e : snapshot) n.push_back(static_cast<std::int64_t>(e.localizations.size()));
    return integer_histogram(n);
}

std::vector<std::int64_t> distinct_concepts(Snapshot snapshot, const taxonomy::ConceptTree& tree,
                                            taxonomy::Rank rank) {
    std::map<std::string, std::string> memo;
    std::vector<std::int64_t> out;
    out.reserve(snapshot.size());
    for (const auto& e : snapshot) {
        std::unordered_set<std::string> labels;
        for (const auto& l : e.localizations) {
            auto it = memo.find(l.concept_name);
            if (it == memo.end()) it = memo.emplace(l.concept_name, label_at(tree, l.concept_name, rank)).first;
            labels.insert(it->second);
        }
        out.push_back(static_cast<std::int64_t>(labels.size()));
    }
    return out;
}

Histogram concepts_per_image(Snapshot snapshot, const taxonomy::ConceptTree& tree, taxonomy::Rank rank) {
    require_nonempty(snapshot);
    return integer_histogram(distinct_concepts(snapshot, tree, rank));
}

Means mean_instances_and_concepts(Snapshot snapshot, const taxonomy::ConceptTree& tree, taxonomy::Rank rank) {
    require_nonempty(snapshot);
    const auto concepts = distinct_concepts(snapshot, tree, rank);
    std::int64_t boxes = 0, labels = 0;
    for (const auto& e : snapshot) boxes += static_cast<std::int64_t>(e.localizations.size());
    for (auto c : concepts) labels += c;
    const auto n = static_cast<double>(snapshot.size());
    return {static_cast<double>(boxes) / n, static_cast<double>(labels) / n};
}

std::vector<double> relative_size_edges() {
    std::vector<double> edges;
    for (int k = 0; k <= kSizeBins; ++k) edges.push_back(std::pow(10.0, -5.0 + k / 4.0));
    edges.back() = 1.0;
    return edges;
}

SizeDistribution relative_size_distribution(Snapshot snapshot) {
    require_nonempty(snapshot);
    SizeDistribution out;
    out.histogram.edges = relative_size_edges();
    out.histogram.counts.assign(kSizeBins, 0);
    const auto& edges = out.histogram.edges;
    for (const auto& e : snapshot) {
        if (!e.image.width_px || !e.image.height_px) {
            out.excluded += static_cast<std::int64_t>(e.localizations.size());
            continue;
        }
        const double area = static_cast<double>(*e.image.width_px) * static_cast<double>(*e.image.height_px);
        for (const auto& l : e.localizations) {
            const double f = l.bbox.width * l.bbox.height / area;
            auto bin = std::upper_bound(edges.begin(), edges.end(), f) - edges.begin() - 1;
            bin = std::clamp<std::ptrdiff_t>(bin, 0, kSizeBins - 1);
            ++out.histogram.counts[static_cast<std::size_t>(bin)];
            ++out.histogram.total;
        }
    }
    return out;
}

std::uint64_t SplitMix64::next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t SplitMix64::uniform(std::uint64_t bound) {
    // reject the low 2^64 mod bound values so every residue is equally likely
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t x = next();
        if (x >= threshold) return x % bound;
    }
}

std::set<std::string> level_concepts(const taxonomy::ConceptTree& tree, std::string_view concept_name,
                                     taxonomy::Rank rank) {
    const auto level = tree.find(label_at(tree, concept_name, rank));
    std::set<std::string> out;
    for (auto d : tree.descendants(*level)) out.insert(tree.name(d));
    return out;
}

std::vector<std::string> coverage_sample(Snapshot snapshot, const taxonomy::ConceptTree& tree,
                                         std::string_view concept_name, taxonomy::Rank rank, std::size_t n,
                                         std::uint64_t seed) {
    const auto names = level_concepts(tree, concept_name, rank);
    std::vector<std::string> candidates;
    for (const auto& e : snapshot) {
        for (const auto& l : e.localizations) {
            auto id = tree.find(l.concept_name);
            if (id && names.count(tree.name(*id))) {
                candidates.push_back(e.image.uuid);
                break;
            }
        }
    }
    if (candidates.empty()) {
        throw StatsError(ErrorKind::no_candidates, "no images annotated under " + std::string(concept_name));
    }
    std::sort(candidates.begin(), candidates.end());
    const std::size_t k = std::min(n, candidates.size());
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + rng.uniform(candidates.size() - i);
        std::swap(candidates[i], candidates[j]);
    }
    candidates.resize(k);
    return candidates;
}

CoverageReport coverage_recall(std::span<const ReviewedImage> reviewed, const std::set<std::string>& target) {
    CoverageReport report;
    double sum_target = 0, sum_other = 0;
    for (const auto& r : reviewed) {
        std::unordered_set<std::string> complete_ids;
        ImageCoverage c;
        c.image = r.image;
        for (const auto& a : r.complete) {
            complete_ids.insert(a.id);
            ++(target.count(a.concept_name) ? c.complete_target : c.complete_other);
        }
        for (const auto& a : r.existing) {
            if (!complete_ids.count(a.id)) {
                throw StatsError(ErrorKind::inconsistent,
                                 "expert set for image " + r.image + " lacks existing annotation " + a.id);
            }
            ++(target.count(a.concept_name) ? c.existing_target : c.existing_other);
        }
        sum_target += c.complete_target ? static_cast<double>(c.existing_target) / c.complete_target : 1.0;
        sum_other += c.complete_other ? static_cast<double>(c.existing_other) / c.complete_other : 1.0;
        report.images.push_back(std::move(c));
    }
    if (!reviewed.empty()) {
        report.recall_target = sum_target / static_cast<double>(reviewed.size());
        report.recall_other = sum_other / static_cast<double>(reviewed.size());
    }
    return report;
}

std::vector<ReviewedImage> parse_review_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    try {
        rows = util::parse_csv(text);
    } catch (const util::CsvError& e) {
        throw StatsError(ErrorKind::invalid, std::string("review sheet: ") + e.what());
    }
    const std::vector<std::string> header{"image", "annotation", "concept", "existing"};
    if (rows.empty()) throw StatsError(ErrorKind::invalid, "review sheet: missing header");
    std::vector<std::string> got;
    for (const auto& h : rows[0]) got.push_back(util::to_lower(util::trim(h)));
    if (got != header) throw StatsError(ErrorKind::invalid, "review sheet header must be image,annotation,concept,existing");

    std::vector<ReviewedImage> out;
    std::map<std::string, std::size_t> index;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const auto existing = row.size() == 4 ? util::parse_bool(row[3]) : std::nullopt;
        if (row.size() != 4 || util::trim(row[0]).empty() || util::trim(row[1]).empty() || !existing) {
            throw StatsError(ErrorKind::invalid, "review sheet row " + std::to_string(r + 1) + " is malformed");
        }
        const std::string image(util::trim(row[0]));
        auto [it, fresh] = index.emplace(image, out.size());
        if (fresh) out.push_back({image, {}, {}});
        Annotation a{std::string(util::trim(row[1])), std::string(util::trim(row[2]))};
        if (*existing) out[it->second].existing.push_back(a);
        out[it->second].complete.push_back(std::move(a));
    }
    return out;
}

}  // namespace fn::stats
