#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fn/taxonomy.hpp"

namespace fn::taxonomy {

/// Name-lookup seam over a taxonomic authority.
class TaxonomyProvider {
public:
    virtual ~TaxonomyProvider() = default;

    /// Canonical record for a name or alias (case-insensitive), or nullopt.
    virtual std::optional<TaxonRecord> lookup(std::string_view name) = 0;

    /// Direct children of the named node, in tree order. Empty for leaves
    /// and for unknown names.
    virtual std::vector<TaxonRecord> children(std::string_view name) = 0;

    std::optional<std::string> parent(std::string_view name) {
        auto rec = lookup(name);
        return rec ? rec->parent : std::nullopt;
    }
};

/// Serves lookups from an in-memory tree (typically file-backed).
class LocalTaxonomyProvider final : public TaxonomyProvider {
public:
    explicit LocalTaxonomyProvider(std::shared_ptr<const ConceptTree> tree) : tree_(std::move(tree)) {}

    std::optional<TaxonRecord> lookup(std::string_view name) override;
    std::vector<TaxonRecord> children(std::string_view name) override;

private:
    std::shared_ptr<const ConceptTree> tree_;
};

/// Client for a WoRMS-style HTTP name lookup:
///   GET <base>/taxa?name=<urlencoded>   -> 200 {"name","rank","parent","aliases"} | 404
///   GET <base>/taxa?parent=<urlencoded> -> 200 [ {...}, ... ]
class RemoteTaxonomyProvider final : public TaxonomyProvider {
public:
    /// `base_url` like "http://host:port/prefix". Throws TaxonomyError{provider}
    /// on a malformed URL.
    explicit RemoteTaxonomyProvider(std::string base_url,
                                    std::chrono::milliseconds timeout = std::chrono::seconds(5));
    ~RemoteTaxonomyProvider() override;

    std::optional<TaxonRecord> lookup(std::string_view name) override;
    std::vector<TaxonRecord> children(std::string_view name) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct TaxaResponse {
    int status = 200;
    std::string body;  // JSON
};

/// Server half of the name-lookup contract, for any HTTP front end.
/// `params` are the decoded query parameters of a /taxa request.
TaxaResponse taxa_response(const ConceptTree& tree, const std::multimap<std::string, std::string>& params);

}  // namespace fn::taxonomy
