#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fn/catalog_types.hpp"

namespace fn::catalog {

/// QueryFilter with the concept expanded to canonical node names.
struct ResolvedFilter {
    std::optional<std::vector<std::string>> concepts;
    std::optional<GeoBox> geo;
    std::optional<DepthRange> depth;
    std::optional<std::string> imaging_type;
    std::optional<std::string> contributor;
    std::optional<std::string> collection_uuid;
    std::optional<Verification> state;
    std::int64_t page = 1;
    std::int64_t page_size = kMaxPageSize;

    bool filters_localizations() const { return concepts.has_value() || state.has_value(); }
};

/// One atomic write: an optional collection upsert followed by images whose
/// uuids are already assigned.
struct WriteBatch {
    std::optional<Collection> collection;
    std::string collection_uuid;
    std::vector<ImageEntry> images;
};

struct StoreCounts {
    std::int64_t collections = 0;
    std::int64_t images = 0;
    std::int64_t localizations = 0;
    std::int64_t audit_entries = 0;
};

/// Persistence seam for the catalog. Implementations must make each call
/// atomic and give every read a consistent snapshot.
class CatalogStore {
public:
    virtual ~CatalogStore() = default;

    /// Throws CatalogError{not_found} for an unknown collection (when not
    /// upserting one) and {conflict} when an image URL already exists in it.
    virtual void write(const WriteBatch& batch) = 0;

    /// Appends localizations to an existing image; throws
    /// CatalogError{not_found} for an unknown image.
    virtual void add_localizations(std::string_view image_uuid, const std::vector<Localization>& locs) = 0;

    virtual std::optional<Collection> collection(std::string_view uuid) = 0;
    virtual std::optional<ImageEntry> image(std::string_view uuid) = 0;
    virtual std::vector<Collection> collections() = 0;
    virtual std::optional<Localization> localization(std::string_view uuid) = 0;

    /// Applies a verification transition and appends an audit entry, or
    /// throws CatalogError{not_found | illegal_transition} without writing.
    virtual Localization transition(std::string_view localization_uuid, Verification to,
                                    std::string_view verifier, std::string_view at) = 0;

    virtual std::vector<AuditEntry> audit_log(std::optional<std::string_view> localization_uuid = std::nullopt) = 0;

    /// Ordered by (timestamp, uuid); images without a timestamp sort first.
    virtual QueryPage query(const ResolvedFilter& filter) = 0;

    /// All matches in query order, ignoring paging.
    virtual std::vector<ImageEntry> select(const ResolvedFilter& filter) = 0;

    virtual StoreCounts counts() = 0;

    /// Content hash over every table in a fixed order.
    virtual std::uint64_t digest() = 0;

    /// Dangling references (localization→image, image→collection).
    virtual std::int64_t integrity_violations() = 0;
};

/// Embedded SQLite store in WAL mode. One writer connection, a small pool of
/// reader connections; each read runs inside its own transaction.
std::unique_ptr<CatalogStore> open_sqlite_store(const std::filesystem::path& path, std::size_t readers = 4);

}  // namespace fn::catalog
