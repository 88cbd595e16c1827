#include "fn/catalog.hpp"

#include <set>

#include "fn/util/strings.hpp"
#include "fn/util/time.hpp"
#include "fn/util/uuid.hpp"

namespace fn::catalog {

Catalog::Catalog(std::shared_ptr<CatalogStore> store, std::shared_ptr<taxonomy::TaxonomyHandle> taxonomy)
    : store_(std::move(store)), taxonomy_(std::move(taxonomy)) {}

void Catalog::prepare_collection(Collection& c) {
    if (auto errors = validate_collection(c); !errors.empty()) {
        std::string msg = "invalid collection: " + errors.front().message;
        throw CatalogError(ErrorKind::validation, msg, std::move(errors));
    }
    c.record_type = "images";
    c.modified = util::format_iso8601(util::now_utc());
}

void Catalog::prepare_images(std::vector<ImageEntry>& records, const std::string& collection_uuid) const {
    auto tree = taxonomy_->get();
    std::vector<FieldError> errors;
    bool only_concept_errors = true;
    std::set<std::string> urls;

    for (std::size_t i = 0; i < records.size(); ++i) {
        auto& img = records[i].image;
        const std::string prefix = "images[" + std::to_string(i) + "].";
        for (auto& e : validate_image(img)) {
            errors.push_back({prefix + e.field, e.message});
            only_concept_errors = false;
        }
        if (!urls.insert(img.image_url).second) {
            errors.push_back({prefix + "image_url", "duplicate image URL in batch: " + img.image_url});
            only_concept_errors = false;
        }
        if (img.uuid.empty()) img.uuid = util::make_uuid();
        img.collection_uuid = collection_uuid;
        if (img.timestamp) {
            if (auto ts = util::parse_iso8601(*img.timestamp)) img.timestamp = util::format_iso8601(*ts);
        }

        prepare_localizations(records[i].localizations, img, prefix, errors, only_concept_errors);
    }
    if (!errors.empty()) {
        const auto kind = only_concept_errors ? ErrorKind::unresolvable_concept : ErrorKind::validation;
        std::string msg = errors.front().message;
        if (errors.size() > 1) msg += " (and " + std::to_string(errors.size() - 1) + " more)";
        throw CatalogError(kind, msg, std::move(errors));
    }
}

void Catalog::prepare_localizations(std::vector<Localization>& locs, const ImageRecord& img, const std::string& prefix,
                                    std::vector<FieldError>& errors, bool& only_concept_errors) const {
    auto tree = taxonomy_->get();
    for (std::size_t j = 0; j < locs.size(); ++j) {
        auto& loc = locs[j];
        const std::string lp = prefix + "localizations[" + std::to_string(j) + "].";
        for (auto& e : validate_bbox(loc.bbox, img.width_px, img.height_px)) {
            errors.push_back({lp + e.field, e.message});
            only_concept_errors = false;
        }
        if (auto id = tree->find(loc.concept_name)) {
            loc.concept_name = tree->name(*id);
        } else {
            errors.push_back({lp + "concept", "unresolvable concept: " + loc.concept_name});
        }
        if (loc.uuid.empty()) loc.uuid = util::make_uuid();
        loc.image_uuid = img.uuid;
        loc.verification = Verification::unverified;
        loc.verifier.reset();
    }
}

std::string Catalog::upsert_collection(Collection c) {
    prepare_collection(c);
    store_->write(WriteBatch{c, c.uuid, {}});
    return c.uuid;
}

AddCounts Catalog::add_images(std::string_view collection_uuid, std::vector<ImageEntry> records) {
    const std::string uuid(collection_uuid);
    if (!store_->collection(uuid)) throw CatalogError(ErrorKind::not_found, "unknown collection " + uuid);
    prepare_images(records, uuid);
    AddCounts counts;
    counts.images = static_cast<std::int64_t>(records.size());
    for (const auto& r : records) counts.localizations += static_cast<std::int64_t>(r.localizations.size());
    store_->write(WriteBatch{std::nullopt, uuid, std::move(records)});
    return counts;
}

std::vector<Localization> Catalog::add_localizations(std::string_view image_uuid, std::vector<Localization> locs) {
    auto img = store_->image(image_uuid);
    if (!img) throw CatalogError(ErrorKind::not_found, "unknown image " + std::string(image_uuid));
    std::vector<FieldError> errors;
    bool only_concept_errors = true;
    prepare_localizations(locs, img->image, "", errors, only_concept_errors);
    if (!errors.empty()) {
        const auto kind = only_concept_errors ? ErrorKind::unresolvable_concept : ErrorKind::validation;
        std::string msg = errors.front().message;
        throw CatalogError(kind, msg, std::move(errors));
    }
    store_->add_localizations(image_uuid, locs);
    return locs;
}

AddCounts Catalog::ingest(Collection c, std::vector<ImageEntry> records) {
    prepare_collection(c);
    prepare_images(records, c.uuid);
    AddCounts counts;
    counts.images = static_cast<std::int64_t>(records.size());
    for (const auto& r : records) counts.localizations += static_cast<std::int64_t>(r.localizations.size());
    const std::string uuid = c.uuid;
    store_->write(WriteBatch{std::move(c), uuid, std::move(records)});
    return counts;
}

ResolvedFilter Catalog::resolve_filter(const QueryFilter& f) const {
    if (auto errors = validate_filter(f); !errors.empty()) {
        std::string msg = errors.front().message;
        throw CatalogError(ErrorKind::validation, msg, std::move(errors));
    }
    ResolvedFilter r;
    if (f.concept_name) {
        auto tree = taxonomy_->get();
        auto id = tree->find(*f.concept_name);
        if (!id) {
            throw CatalogError(ErrorKind::unresolvable_concept, "unresolvable concept: " + *f.concept_name,
                               {{"concept", "unresolvable concept: " + *f.concept_name}});
        }
        std::vector<std::string> names;
        if (f.include_descendants) {
            for (auto d : tree->descendants(*id)) names.push_back(tree->name(d));
        } else {
            names.push_back(tree->name(*id));
        }
        r.concepts = std::move(names);
    }
    r.geo = f.geo;
    r.depth = f.depth;
    r.imaging_type = f.imaging_type;
    r.contributor = f.contributor;
    r.collection_uuid = f.collection_uuid;
    r.state = f.state;
    r.page = f.page;
    r.page_size = f.page_size;
    return r;
}

QueryPage Catalog::query(const QueryFilter& filter) { return store_->query(resolve_filter(filter)); }

std::vector<ImageEntry> Catalog::select(const QueryFilter& filter) {
    QueryFilter f = filter;
    f.page = 1;
    f.page_size = 1;
    return store_->select(resolve_filter(f));
}

Localization Catalog::set_verification(std::string_view localization_uuid, Verification state,
                                       std::string_view verifier) {
    if (util::trim(verifier).empty()) {
        throw CatalogError(ErrorKind::validation, "verifier identity is required", {{"verifier", "required"}});
    }
    return store_->transition(localization_uuid, state, util::trim(verifier), util::format_iso8601(util::now_utc()));
}

}  // namespace fn::catalog
