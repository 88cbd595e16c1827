#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fn::catalog {

/// Pixel box, top-left origin, y increasing downward.
struct BoundingBox {
    double x = 0, y = 0, width = 0, height = 0;
    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

enum class Verification { unverified, verified, rejected };

std::string_view verification_name(Verification v);
std::optional<Verification> parse_verification(std::string_view s);

/// unverified→verified, unverified→rejected, verified↔rejected.
bool transition_allowed(Verification from, Verification to);

/// One upload unit, carrying Darwin Core collection metadata.
struct Collection {
    std::string uuid;
    std::string owner_institution;
    std::string rights_holder;
    std::string contributor_email;
    std::string record_type = "images";
    std::string modified;
    std::string url;
    std::string data_format;

    std::optional<std::string> bibliographic_citation;
    std::optional<std::string> access_rights;
    std::optional<std::string> basis_of_record;
    std::optional<std::string> dataset_language;

    std::optional<std::string> collection_code;
    std::optional<std::string> collection_id;
    std::optional<std::string> dataset_generalizations;
    std::optional<std::string> dataset_name;
    std::optional<std::string> dynamic_properties;
    std::optional<std::string> information_withheld;
    std::optional<std::string> institution_code;
    std::optional<std::string> institution_id;
    std::optional<std::string> references;

    friend bool operator==(const Collection&, const Collection&) = default;
};

enum class FieldTier { required, recommended, suggested };

struct RequiredCollectionField {
    std::string_view key;    // sidecar key and store column
    std::string_view label;  // human-readable name used in errors
    std::string Collection::*member;
};

struct OptionalCollectionField {
    std::string_view key;
    std::string_view label;
    FieldTier tier;
    std::optional<std::string> Collection::*member;
};

inline constexpr std::array<RequiredCollectionField, 8> kRequiredCollectionFields{{
    {"uuid", "UUID", &Collection::uuid},
    {"owner_institution", "owner's institution", &Collection::owner_institution},
    {"rights_holder", "rights holder", &Collection::rights_holder},
    {"contributor_email", "contributor's email", &Collection::contributor_email},
    {"record_type", "record type", &Collection::record_type},
    {"modified", "modified", &Collection::modified},
    {"url", "URL", &Collection::url},
    {"data_format", "data format", &Collection::data_format},
}};

inline constexpr std::array<OptionalCollectionField, 13> kOptionalCollectionFields{{
    {"bibliographic_citation", "bibliographic citation", FieldTier::recommended, &Collection::bibliographic_citation},
    {"access_rights", "access rights", FieldTier::recommended, &Collection::access_rights},
    {"basis_of_record", "basis of record", FieldTier::recommended, &Collection::basis_of_record},
    {"dataset_language", "dataset language", FieldTier::recommended, &Collection::dataset_language},
    {"collection_code", "collection code", FieldTier::suggested, &Collection::collection_code},
    {"collection_id", "collection ID", FieldTier::suggested, &Collection::collection_id},
    {"dataset_generalizations", "dataset generalizations", FieldTier::suggested,
     &Collection::dataset_generalizations},
    {"dataset_name", "dataset name", FieldTier::suggested, &Collection::dataset_name},
    {"dynamic_properties", "dynamic properties", FieldTier::suggested, &Collection::dynamic_properties},
    {"information_withheld", "information withheld", FieldTier::suggested, &Collection::information_withheld},
    {"institution_code", "institution code", FieldTier::suggested, &Collection::institution_code},
    {"institution_id", "institution ID", FieldTier::suggested, &Collection::institution_id},
    {"references", "references", FieldTier::suggested, &Collection::references},
}};

struct ImageRecord {
    std::string uuid;
    std::string collection_uuid;
    std::string image_url;
    std::optional<std::int64_t> width_px, height_px;
    std::optional<double> latitude, longitude;
    std::optional<double> depth_m;
    std::optional<std::string> timestamp;  // canonical ISO8601 UTC
    std::optional<std::string> imaging_type;
    std::optional<std::string> observer;
    std::optional<double> altitude_m;

    friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct Localization {
    std::string uuid;
    std::string image_uuid;
    std::string concept_name;
    std::optional<std::string> alt_concept;
    BoundingBox bbox;
    std::optional<bool> group_of, occluded, truncated;
    std::optional<std::string> observer;
    Verification verification = Verification::unverified;
    std::optional<std::string> verifier;

    friend bool operator==(const Localization&, const Localization&) = default;
};

struct ImageEntry {
    ImageRecord image;
    std::vector<Localization> localizations;
    friend bool operator==(const ImageEntry&, const ImageEntry&) = default;
};

struct AuditEntry {
    std::int64_t seq = 0;
    std::string localization_uuid;
    Verification from = Verification::unverified;
    Verification to = Verification::unverified;
    std::string verifier;
    std::string at;
};

struct GeoBox {
    double min_lat = -90, max_lat = 90, min_lon = -180, max_lon = 180;
};

struct DepthRange {
    double min_m = 0, max_m = 0;
};

inline constexpr std::int64_t kMaxPageSize = 1000;

struct QueryFilter {
    std::optional<std::string> concept_name;
    bool include_descendants = false;
    std::optional<GeoBox> geo;
    std::optional<DepthRange> depth;
    std::optional<std::string> imaging_type;
    std::optional<std::string> contributor;  // collection contributor email
    std::optional<std::string> collection_uuid;
    std::optional<Verification> state;
    std::int64_t page = 1;  // 1-based
    std::int64_t page_size = 100;
};

struct QueryPage {
    std::int64_t total = 0;
    std::int64_t page = 1;
    std::int64_t page_size = 0;
    std::vector<ImageEntry> items;
};

struct FieldError {
    std::string field;
    std::string message;
    friend bool operator==(const FieldError&, const FieldError&) = default;
};

enum class ErrorKind { validation, not_found, unresolvable_concept, illegal_transition, conflict, storage };

std::string_view error_kind_name(ErrorKind k);

class CatalogError : public std::runtime_error {
public:
    CatalogError(ErrorKind kind, const std::string& message, std::vector<FieldError> fields = {})
        : std::runtime_error(message), kind_(kind), fields_(std::move(fields)) {}
    ErrorKind kind() const { return kind_; }
    const std::vector<FieldError>& fields() const { return fields_; }

private:
    ErrorKind kind_;
    std::vector<FieldError> fields_;
};

/// Field-level checks; empty result means valid.
std::vector<FieldError> validate_collection(const Collection& c);
std::vector<FieldError> validate_image(const ImageRecord& img);
std::vector<FieldError> validate_bbox(const BoundingBox& box, std::optional<std::int64_t> width_px,
                                      std::optional<std::int64_t> height_px);
std::vector<FieldError> validate_filter(const QueryFilter& f);

}  // namespace fn::catalog
