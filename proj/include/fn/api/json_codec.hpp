#pragma once

#include <json.hpp>
#include <map>
#include <set>
#include <string>

#include "fn/catalog_types.hpp"
#include "fn/ingest.hpp"
#include "fn/stats.hpp"
#include "fn/taxonomy.hpp"

namespace fn::api {

using Json = nlohmann::json;

Json to_json(const catalog::Collection& c);
Json to_json(const catalog::ImageRecord& r);
Json to_json(const catalog::Localization& l);
Json to_json(const catalog::ImageEntry& e);
Json to_json(const catalog::QueryPage& p);
Json to_json(const catalog::FieldError& e);
Json to_json(const ingest::IngestReport& r);
Json to_json(const stats::Histogram& h);

/// Node view: name, rank, parent, aliases and direct children.
Json concept_json(const taxonomy::ConceptTree& tree, taxonomy::NodeId id);

/// Box submission: concept, x, y, width, height and optional altconcept,
/// group_of, occluded, truncated, observer. Throws CatalogError{validation}
/// naming the offending field.
catalog::Localization localization_from_json(const Json& j);

/// Image-listing filters from decoded query parameters: concept, descendants,
/// minlat, maxlat, minlon, maxlon, mindepth, maxdepth, imaging_type, state,
/// collection, contributor, page, page_size. Parameters neither listed nor in
/// `also_allowed`, and malformed values, throw CatalogError{validation}
/// naming the parameter.
catalog::QueryFilter filter_from_params(const std::multimap<std::string, std::string>& params,
                                        const std::set<std::string>& also_allowed = {});

/// {"error": {"kind", "message", "fields": [...]}}
Json error_json(std::string_view kind, std::string_view message, const std::vector<catalog::FieldError>& fields = {});

}  // namespace fn::api
