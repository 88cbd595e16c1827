#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fn/catalog_types.hpp"
#include "fn/taxonomy.hpp"

namespace fn::stats {

enum class ErrorKind { empty_snapshot, unresolvable_concept, no_candidates, inconsistent, no_decodable_images, invalid };

class StatsError : public std::runtime_error {
public:
    StatsError(ErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

using Snapshot = std::span<const catalog::ImageEntry>;

/// Bin i covers [edges[i], edges[i+1]).
struct Histogram {
    std::vector<double> edges;
    std::vector<std::int64_t> counts;
    std::int64_t total = 0;

    /// Percent of total per bin; all zero when total is 0.
    std::vector<double> percent() const;
};

/// Bins [k, k+1) for k = 0..max. Images without boxes land in bin 0.
Histogram instances_per_image(Snapshot snapshot);

/// Distinct rank_label values per image, in snapshot order. A concept whose
/// lineage has no ranked node counts under its own name.
std::vector<std::int64_t> distinct_concepts(Snapshot snapshot, const taxonomy::ConceptTree& tree,
                                            taxonomy::Rank rank);
Histogram concepts_per_image(Snapshot snapshot, const taxonomy::ConceptTree& tree, taxonomy::Rank rank);

struct Means {
    double instances = 0;
    double concepts = 0;
};
Means mean_instances_and_concepts(Snapshot snapshot, const taxonomy::ConceptTree& tree, taxonomy::Rank rank);

inline constexpr int kSizeBins = 20;
inline constexpr double kSizeMin = 1e-5;

/// 21 edges 10^(-5 + k/4). The last bin also holds 1.0; fractions below
/// 1e-5 are clamped into the first bin.
std::vector<double> relative_size_edges();

struct SizeDistribution {
    Histogram histogram;
    std::int64_t excluded = 0;  // localizations on images without known dimensions
};
SizeDistribution relative_size_distribution(Snapshot snapshot);

/// SplitMix64. next(), bounded draws by rejection on the low residue, and
/// split() seeding a child from the parent's next output.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    /// Uniform in [0, bound); bound > 0.
    std::uint64_t uniform(std::uint64_t bound);
    SplitMix64 split() { return SplitMix64(next()); }

private:
    std::uint64_t state_;
};

/// Canonical names of every node under rank_label(concept, rank).
std::set<std::string> level_concepts(const taxonomy::ConceptTree& tree, std::string_view concept_name,
                                     taxonomy::Rank rank);

/// Candidates are images with any localization in level_concepts, ordered by
/// image uuid; the first min(n, |candidates|) positions of a partial
/// Fisher-Yates shuffle driven by SplitMix64(seed) are returned as uuids.
std::vector<std::string> coverage_sample(Snapshot snapshot, const taxonomy::ConceptTree& tree,
                                         std::string_view concept_name, taxonomy::Rank rank, std::size_t n = 50,
                                         std::uint64_t seed = 0);

struct Annotation {
    std::string id;
    std::string concept_name;
};

/// One reviewed image: what was there before, and the expert-completed set.
struct ReviewedImage {
    std::string image;
    std::vector<Annotation> existing;
    std::vector<Annotation> complete;
};

struct ImageCoverage {
    std::string image;
    std::int64_t existing_target = 0;
    std::int64_t complete_target = 0;
    std::int64_t existing_other = 0;
    std::int64_t complete_other = 0;
};

struct CoverageReport {
    std::vector<ImageCoverage> images;
    double recall_target = 1;
    double recall_other = 1;
};

/// Per-image recall averaged over images; 0/0 counts as 1 (nothing to find).
/// Throws StatsError{inconsistent} when an existing annotation id is absent
/// from the expert set of the same image.
CoverageReport coverage_recall(std::span<const ReviewedImage> reviewed, const std::set<std::string>& target);

/// Review sheet with columns image,annotation,concept,existing. Every row is
/// part of the expert-complete set; rows with existing=true were present
/// before review. Throws StatsError{invalid} naming the row on bad input.
std::vector<ReviewedImage> parse_review_csv(std::string_view text);

}  // namespace fn::stats
