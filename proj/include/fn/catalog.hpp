#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fn/catalog_types.hpp"
#include "fn/store.hpp"
#include "fn/taxonomy.hpp"

namespace fn::catalog {

struct AddCounts {
    std::int64_t images = 0;
    std::int64_t localizations = 0;
};

/// Validation, taxonomy resolution and the verification state machine on top
/// of a CatalogStore. Thread-safe; the store serializes writes.
class Catalog {
public:
    Catalog(std::shared_ptr<CatalogStore> store, std::shared_ptr<taxonomy::TaxonomyHandle> taxonomy);

    /// Validates, stamps `modified` with the upload time and stores the
    /// collection. Idempotent on uuid. Returns the uuid.
    std::string upsert_collection(Collection c);

    /// All-or-nothing. Concepts are stored under their canonical node name;
    /// new localizations start unverified. Uuids are assigned when empty.
    AddCounts add_images(std::string_view collection_uuid, std::vector<ImageEntry> records);

    /// Collection upsert plus images in one transaction.
    AddCounts ingest(Collection c, std::vector<ImageEntry> records);

    /// Adds boxes to an image already in the catalog, validated as in
    /// add_images. Returns the stored localizations with their uuids.
    std::vector<Localization> add_localizations(std::string_view image_uuid, std::vector<Localization> locs);

    QueryPage query(const QueryFilter& filter);

    /// Every match in query order; paging fields are ignored.
    std::vector<ImageEntry> select(const QueryFilter& filter);

    Localization set_verification(std::string_view localization_uuid, Verification state, std::string_view verifier);

    std::optional<Collection> collection(std::string_view uuid) { return store_->collection(uuid); }
    std::optional<ImageEntry> image(std::string_view uuid) { return store_->image(uuid); }
    std::vector<AuditEntry> audit_log(std::optional<std::string_view> localization_uuid = std::nullopt) {
        return store_->audit_log(localization_uuid);
    }

    CatalogStore& store() { return *store_; }
    std::shared_ptr<const taxonomy::ConceptTree> taxonomy() const { return taxonomy_->get(); }

    /// Expands a filter's concept against the current tree. Throws
    /// CatalogError{validation | unresolvable_concept}.
    ResolvedFilter resolve_filter(const QueryFilter& filter) const;

private:
    void prepare_images(std::vector<ImageEntry>& records, const std::string& collection_uuid) const;
    void prepare_localizations(std::vector<Localization>& locs, const ImageRecord& image, const std::string& prefix,
                               std::vector<FieldError>& errors, bool& only_concept_errors) const;
    static void prepare_collection(Collection& c);

    std::shared_ptr<CatalogStore> store_;
    std::shared_ptr<taxonomy::TaxonomyHandle> taxonomy_;
};

}  // namespace fn::catalog
