#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fn/catalog.hpp"
#include "fn/taxonomy.hpp"

namespace fn::ingest {

// Column order of exported files. Input files may order columns freely and
// match names case-insensitively; only the first six are mandatory.
inline constexpr std::array<std::string_view, 19> kColumns{
    "image_url", "x",         "y",           "width",      "height",   "concept",   "altconcept",
    "latitude",  "longitude", "depth_m",     "timestamp",  "imaging_type", "observer", "altitude_m",
    "group_of",  "occluded",  "truncated",   "width_px",   "height_px"};

inline constexpr std::array<std::string_view, 6> kRequiredColumns{"image_url", "x", "y", "width", "height", "concept"};
inline constexpr std::array<std::string_view, 6> kRecommendedColumns{"latitude",     "longitude", "depth_m",
                                                                     "timestamp",    "imaging_type", "observer"};

/// Row numbers count the CSV header as row 1. Errors in the header or in the
/// metadata sidecar use row 0 for the sidecar and 1 for the header.
struct RowError {
    std::size_t row = 0;
    std::string field;
    std::string message;
};

struct Warning {
    std::size_t row = 0;  // 0 when the warning concerns the whole file
    std::string field;
    std::string message;
};

struct IngestReport {
    std::size_t rows_read = 0;
    std::size_t rows_accepted = 0;
    std::vector<RowError> errors;
    std::vector<Warning> warnings;

    bool ok() const { return errors.empty(); }
    /// Distinct data rows carrying at least one error.
    std::size_t error_rows() const;
    bool has_file_error() const;
};

struct ParsedCollection {
    catalog::Collection collection;
    std::vector<catalog::ImageEntry> images;
    IngestReport report;
    // CSV row of each image's first appearance and of each localization
    std::vector<std::size_t> image_rows;
    std::vector<std::vector<std::size_t>> localization_rows;
};

/// Parses `key=value` lines ('#' comments, blank lines ignored). Keys are the
/// snake_case field names of Collection, case-insensitive.
catalog::Collection parse_meta(std::string_view text, IngestReport& report);
std::string format_meta(const catalog::Collection& c);

/// Rows sharing an image URL merge into one image; image-level values that
/// disagree across rows keep the first and warn. A row whose box and concept
/// cells are all empty declares an image without localizations. With a tree,
/// concepts that do not resolve are row errors.
ParsedCollection parse_collection_csv(std::string_view meta_text, std::string_view csv_text,
                                      const taxonomy::ConceptTree* tree = nullptr);

/// One row per localization (or one bare row per box-less image), in the
/// given order, with the header in kColumns order.
std::string export_csv(const std::vector<catalog::ImageEntry>& images);

struct ExportedCollection {
    std::string meta;
    std::string csv;
};

/// Throws CatalogError{not_found} for an unknown collection.
ExportedCollection export_collection(catalog::Catalog& catalog, std::string_view collection_uuid);

struct IngestResult {
    IngestReport report;
    std::optional<std::string> collection_uuid;  // set when written
    catalog::AddCounts counts;
};

/// Parse, then write through the catalog in one transaction unless the report
/// has errors or `dry_run` is set. Catalog rejections are folded into the
/// report; the store is untouched whenever the report has errors.
IngestResult ingest(catalog::Catalog& catalog, std::string_view meta_text, std::string_view csv_text,
                    bool dry_run = false);

/// Order-insensitive canonical text of a collection's content, omitting uuids,
/// the upload timestamp and verification state. Two uploads carry the same
/// data exactly when their canonical texts are equal.
std::string canonical_content(const catalog::Collection& c, const std::vector<catalog::ImageEntry>& images);

}  // namespace fn::ingest
