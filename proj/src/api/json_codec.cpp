#include "fn/api/json_codec.hpp"

#include <limits>

#include "fn/util/strings.hpp"

namespace fn::api {

namespace {

template <typename T>
Json opt(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

}  // namespace

Json to_json(const catalog::Collection& c) {
    Json j;
    for (const auto& f : catalog::kRequiredCollectionFields) j[std::string(f.key)] = c.*f.member;
    for (const auto& f : catalog::kOptionalCollectionFields) j[std::string(f.key)] = opt(c.*f.member);
    return j;
}

Json to_json(const catalog::ImageRecord& r) {
    return Json{{"uuid", r.uuid},
                {"collection_uuid", r.collection_uuid},
                {"image_url", r.image_url},
                {"width_px", opt(r.width_px)},
                {"height_px", opt(r.height_px)},
                {"latitude", opt(r.latitude)},
                {"longitude", opt(r.longitude)},
                {"depth_m", opt(r.depth_m)},
                {"timestamp", opt(r.timestamp)},
                {"imaging_type", opt(r.imaging_type)},
                {"observer", opt(r.observer)},
                {"altitude_m", opt(r.altitude_m)}};
}

Json to_json(const catalog::Localization& l) {
    return Json{{"uuid", l.uuid},
                {"image_uuid", l.image_uuid},
                {"concept", l.concept_name},
                {"altconcept", opt(l.alt_concept)},
                {"x", l.bbox.x},
                {"y", l.bbox.y},
                {"width", l.bbox.width},
                {"height", l.bbox.height},
                {"group_of", opt(l.group_of)},
                {"occluded", opt(l.occluded)},
                {"truncated", opt(l.truncated)},
                {"observer", opt(l.observer)},
                {"state", std::string(catalog::verification_name(l.verification))},
                {"verifier", opt(l.verifier)}};
}

Json to_json(const catalog::ImageEntry& e) {
    Json j = to_json(e.image);
    Json locs = Json::array();
    for (const auto& l : e.localizations) locs.push_back(to_json(l));
    j["localizations"] = std::move(locs);
    return j;
}

Json to_json(const catalog::QueryPage& p) {
    Json items = Json::array();
    for (const auto& e : p.items) items.push_back(to_json(e));
    return Json{{"total", p.total}, {"page", p.page}, {"page_size", p.page_size}, {"items", std::move(items)}};
}

Json to_json(const catalog::FieldError& e) { return Json{{"field", e.field}, {"message", e.message}}; }

Json to_json(const ingest::IngestReport& r) {
    Json errors = Json::array(), warnings = Json::array();
    for (const auto& e : r.errors) errors.push_back({{"row", e.row}, {"field", e.field}, {"message", e.message}});
    for (const auto& w : r.warnings) warnings.push_back({{"row", w.row}, {"field", w.field}, {"message", w.message}});
    return Json{{"rows_read", r.rows_read},
                {"rows_accepted", r.rows_accepted},
                {"errors", std::move(errors)},
                {"warnings", std::move(warnings)}};
}

Json to_json(const stats::Histogram& h) {
    return Json{{"edges", h.edges}, {"counts", h.counts}, {"percent", h.percent()}, {"total", h.total}};
}

Json concept_json(const taxonomy::ConceptTree& tree, taxonomy::NodeId id) {
    const auto& n = tree.node(id);
    Json children = Json::array();
    for (auto c : tree.children(id)) children.push_back(tree.name(c));
    return Json{{"name", n.name},
                {"rank", std::string(taxonomy::rank_name(n.rank))},
                {"parent", n.parent ? Json(tree.name(*n.parent)) : Json(nullptr)},
                {"aliases", n.aliases},
                {"children", std::move(children)}};
}

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& message) {
    throw catalog::CatalogError(catalog::ErrorKind::validation, field + ": " + message, {{field, message}});
}

double number_field(const Json& j, const char* key) {
    if (!j.contains(key)) invalid(key, "required");
    if (!j.at(key).is_number()) invalid(key, "must be a number");
    return j.at(key).get<double>();
}

template <typename T>
std::optional<T> optional_field(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    if constexpr (std::is_same_v<T, bool>) {
        if (!j.at(key).is_boolean()) invalid(key, "must be a boolean");
    } else {
        if (!j.at(key).is_string()) invalid(key, "must be a string");
    }
    return j.at(key).get<T>();
}

}  // namespace

catalog::Localization localization_from_json(const Json& j) {
    if (!j.is_object()) invalid("localization", "must be an object");
    catalog::Localization l;
    if (!j.contains("concept") || !j.at("concept").is_string()) invalid("concept", "required string");
    l.concept_name = j.at("concept").get<std::string>();
    l.bbox = {number_field(j, "x"), number_field(j, "y"), number_field(j, "width"), number_field(j, "height")};
    l.alt_concept = optional_field<std::string>(j, "altconcept");
    l.observer = optional_field<std::string>(j, "observer");
    l.group_of = optional_field<bool>(j, "group_of");
    l.occluded = optional_field<bool>(j, "occluded");
    l.truncated = optional_field<bool>(j, "truncated");
    return l;
}

catalog::QueryFilter filter_from_params(const std::multimap<std::string, std::string>& params,
                                        const std::set<std::string>& also_allowed) {
    catalog::QueryFilter f;
    std::optional<double> minlat, maxlat, minlon, maxlon, mindepth, maxdepth;
    auto num = [](const std::string& key, const std::string& v) {
        auto d = util::parse_double(util::trim(v));
        if (!d) invalid(key, "not a number: " + v);
        return *d;
    };
    auto integer = [](const std::string& key, const std::string& v) {
        auto d = util::parse_int(util::trim(v));
        if (!d) invalid(key, "not an integer: " + v);
        return static_cast<std::int64_t>(*d);
    };
    for (const auto& [key, value] : params) {
        if (key == "concept") {
            f.concept_name = value;
        } else if (key == "descendants") {
            auto b = util::parse_bool(value);
            if (!b) invalid(key, "expected true or false");
            f.include_descendants = *b;
        } else if (key == "minlat") {
            minlat = num(key, value);
        } else if (key == "maxlat") {
            maxlat = num(key, value);
        } else if (key == "minlon") {
            minlon = num(key, value);
        } else if (key == "maxlon") {
            maxlon = num(key, value);
        } else if (key == "mindepth") {
            mindepth = num(key, value);
        } else if (key == "maxdepth") {
            maxdepth = num(key, value);
        } else if (key == "imaging_type") {
            f.imaging_type = value;
        } else if (key == "state") {
            f.state = catalog::parse_verification(value);
            if (!f.state) invalid(key, "expected unverified, verified or rejected");
        } else if (key == "collection") {
            f.collection_uuid = value;
        } else if (key == "contributor") {
            f.contributor = value;
        } else if (key == "page") {
            f.page = integer(key, value);
        } else if (key == "page_size") {
            f.page_size = integer(key, value);
        } else if (!also_allowed.count(key)) {
            invalid(key, "unknown parameter");
        }
    }
    if (minlat || maxlat || minlon || maxlon) {
        f.geo = catalog::GeoBox{minlat.value_or(-90), maxlat.value_or(90), minlon.value_or(-180),
                                maxlon.value_or(180)};
    }
    if (mindepth || maxdepth) {
        f.depth = catalog::DepthRange{mindepth.value_or(-std::numeric_limits<double>::infinity()),
                                      maxdepth.value_or(std::numeric_limits<double>::infinity())};
    }
    return f;
}

Json error_json(std::string_view kind, std::string_view message, const std::vector<catalog::FieldError>& fields) {
    Json list = Json::array();
    for (const auto& e : fields) list.push_back(to_json(e));
    return Json{{"error", {{"kind", kind}, {"message", message}, {"fields", std::move(list)}}}};
}

}  // namespace fn::api
