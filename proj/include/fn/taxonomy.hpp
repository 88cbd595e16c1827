#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fn::taxonomy {

/// Biological ranks from coarsest to finest. `unranked` covers equipment,
/// debris, geological features and grouping nodes; it is incomparable with
/// every other rank.
enum class Rank : std::uint8_t { kingdom, phylum, klass, order, family, genus, species, unranked };

std::string_view rank_name(Rank r);
std::optional<Rank> parse_rank(std::string_view s);

constexpr bool is_ranked(Rank r) { return r != Rank::unranked; }

/// True when `a` is strictly coarser than `b`; false whenever either is unranked.
constexpr bool coarser(Rank a, Rank b) { return is_ranked(a) && is_ranked(b) && a < b; }

enum class ErrorKind {
    parse,
    empty,
    cycle,
    duplicate_name,
    multiple_roots,
    unknown_parent,
    rank_inversion,
    not_found,
    no_rank,
    configuration,
    provider,
};

std::string_view error_kind_name(ErrorKind k);

class TaxonomyError : public std::runtime_error {
public:
    TaxonomyError(ErrorKind kind, std::string node, const std::string& message)
        : std::runtime_error(message), kind_(kind), node_(std::move(node)) {}
    ErrorKind kind() const { return kind_; }
    /// Offending node or looked-up name.
    const std::string& node() const { return node_; }

private:
    ErrorKind kind_;
    std::string node_;
};

struct NodeId {
    std::uint32_t value = 0;
    friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

struct TaxonomyNode {
    std::string name;
    Rank rank = Rank::unranked;
    std::optional<NodeId> parent;
    std::vector<std::string> aliases;
};

/// Unvalidated node description, as read from a file or a provider.
struct TaxonRecord {
    std::string name;
    Rank rank = Rank::unranked;
    std::optional<std::string> parent;
    std::vector<std::string> aliases;
    friend bool operator==(const TaxonRecord&, const TaxonRecord&) = default;
};

/// Immutable, validated concept hierarchy. Safe for concurrent reads.
class ConceptTree {
public:
    /// Validates and links the records. Throws TaxonomyError naming the
    /// offending node on duplicates, unknown parents, multiple roots,
    /// cycles, or rank inversions.
    static ConceptTree build(std::vector<TaxonRecord> records);

    std::size_t size() const { return nodes_.size(); }
    NodeId root() const { return root_; }
    const TaxonomyNode& node(NodeId id) const { return nodes_.at(id.value); }
    const std::string& name(NodeId id) const { return node(id).name; }
    std::optional<NodeId> parent(NodeId id) const { return node(id).parent; }
    const std::vector<NodeId>& children(NodeId id) const { return children_.at(id.value); }

    /// Case-insensitive exact match on names and aliases. No fuzzy matching.
    std::optional<NodeId> find(std::string_view name) const;

    /// Like find(), but throws TaxonomyError{not_found}.
    NodeId resolve(std::string_view name) const;

    /// Self-inclusive subtree in pre-order.
    std::vector<NodeId> descendants(NodeId id) const;

    bool is_ancestor_or_self(NodeId ancestor, NodeId node) const;

    /// Label of `node` at `target` rank: the ancestor-or-self holding that
    /// rank, else the deepest ranked ancestor-or-self coarser than target.
    /// The root always labels as itself.
    std::string rank_label(NodeId node, Rank target) const;

    /// Distinguishes trees for map validation.
    std::uint64_t identity() const { return identity_; }

    std::vector<TaxonRecord> records() const;

private:
    std::vector<TaxonomyNode> nodes_;
    std::vector<std::vector<NodeId>> children_;
    std::unordered_map<std::string, NodeId> index_;  // lower-cased names and aliases
    NodeId root_{};
    std::uint64_t identity_ = 0;
};

/// Reads the tab-separated node format:
///   name<TAB>rank<TAB>parent-name<TAB>alias1|alias2
/// Blank lines and lines starting with '#' are skipped; trailing columns may
/// be omitted. The root has an empty parent field.
std::vector<TaxonRecord> parse_taxonomy_text(std::string_view text);
std::string format_taxonomy_text(const std::vector<TaxonRecord>& records);

ConceptTree load_taxonomy_file(const std::filesystem::path& path);

class TaxonomyProvider;
/// Walks the provider breadth-first from `root_name`.
ConceptTree load_taxonomy(TaxonomyProvider& provider, std::string_view root_name);

/// Coarse labels defined as unions of subtrees.
class SupercategoryMap {
public:
    struct Entry {
        std::string label;
        std::vector<std::string> roots;
    };

    SupercategoryMap() = default;
    explicit SupercategoryMap(std::vector<Entry> entries) : entries_(std::move(entries)) {}

    /// Format: label<TAB>root1|root2 per line; '#' comments.
    static SupercategoryMap parse(std::string_view text);

    const std::vector<Entry>& entries() const { return entries_; }

    /// Resolves every root and rejects subtrees claimed by two labels.
    /// Throws TaxonomyError{configuration}.
    void validate(const ConceptTree& tree);

    bool validated_for(const ConceptTree& tree) const {
        return validated_identity_ && *validated_identity_ == tree.identity();
    }

    /// Unique label whose roots contain an ancestor-or-self of `node`.
    /// Throws TaxonomyError{configuration} if not validated for `tree`.
    std::optional<std::string> supercategory_of(const ConceptTree& tree, NodeId node) const;

private:
    std::vector<Entry> entries_;
    std::vector<std::pair<NodeId, std::size_t>> resolved_roots_;  // root → entry index
    std::optional<std::uint64_t> validated_identity_;
};

/// Holds the live tree; reload swaps it atomically for new readers while
/// existing holders keep their snapshot.
class TaxonomyHandle {
public:
    explicit TaxonomyHandle(std::shared_ptr<const ConceptTree> tree) : tree_(std::move(tree)) {}
    std::shared_ptr<const ConceptTree> get() const {
        std::lock_guard lock(mu_);
        return tree_;
    }
    void reload(std::shared_ptr<const ConceptTree> tree) {
        std::lock_guard lock(mu_);
        tree_ = std::move(tree);
    }

private:
    mutable std::mutex mu_;
    std::shared_ptr<const ConceptTree> tree_;
};

}  // namespace fn::taxonomy
