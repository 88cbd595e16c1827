#include "fn/ingest.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <set>
#include <unordered_map>

#include "fn/util/csv.hpp"
#include "fn/util/strings.hpp"
#include "fn/util/time.hpp"

namespace fn::ingest {

using catalog::Collection;
using catalog::ImageEntry;
using catalog::Localization;

std::size_t IngestReport::error_rows() const {
    std::set<std::size_t> rows;
    for (const auto& e : errors)
        if (e.row >= 2) rows.insert(e.row);
    return rows.size();
}

bool IngestReport::has_file_error() const {
    return std::any_of(errors.begin(), errors.end(), [](const RowError& e) { return e.row < 2; });
}

Collection parse_meta(std::string_view text, IngestReport& report) {
    Collection c;
    c.record_type.clear();
    std::set<std::string> seen;
    for (const auto& raw : util::split(text, '\n')) {
        const auto line = util::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            report.warnings.push_back({0, std::string(line), "metadata line without '=' ignored"});
            continue;
        }
        const std::string key = util::to_lower(util::trim(line.substr(0, eq)));
        const std::string value(util::trim(line.substr(eq + 1)));
        if (!seen.insert(key).second) {
            report.warnings.push_back({0, key, "repeated metadata key; first value kept"});
            continue;
        }
        bool known = false;
        for (const auto& f : catalog::kRequiredCollectionFields) {
            if (f.key == key) {
                c.*f.member = value;
                known = true;
            }
        }
        for (const auto& f : catalog::kOptionalCollectionFields) {
            if (f.key == key) {
                if (!value.empty()) c.*f.member = value;
                known = true;
            }
        }
        if (!known) report.warnings.push_back({0, key, "unknown metadata key ignored"});
    }
    for (const auto& e : catalog::validate_collection(c)) report.errors.push_back({0, e.field, e.message});
    for (const auto& f : catalog::kOptionalCollectionFields) {
        if (f.tier == catalog::FieldTier::recommended && !(c.*f.member)) {
            report.warnings.push_back({0, std::string(f.key), "missing recommended field: " + std::string(f.label)});
        }
    }
    return c;
}

std::string format_meta(const Collection& c) {
    std::string out;
    for (const auto& f : catalog::kRequiredCollectionFields) {
        out += std::string(f.key) + "=" + c.*f.member + "\n";
    }
    for (const auto& f : catalog::kOptionalCollectionFields) {
        if (c.*f.member) out += std::string(f.key) + "=" + *(c.*f.member) + "\n";
    }
    return out;
}

namespace {

struct Row {
    const std::vector<std::string>& cells;
    const std::unordered_map<std::string, std::size_t>& columns;
    std::size_t number;
    std::vector<RowError>& errors;

    std::optional<std::string> text(std::string_view name) const {
        auto it = columns.find(std::string(name));
        if (it == columns.end()) return std::nullopt;
        auto v = util::trim(cells[it->second]);
        if (v.empty()) return std::nullopt;
        return std::string(v);
    }

    void error(std::string_view field, std::string message) const {
        errors.push_back({number, std::string(field), std::move(message)});
    }

    std::optional<double> number_of(std::string_view name) const {
        auto t = text(name);
        if (!t) return std::nullopt;
        auto v = util::parse_double(*t);
        if (!v) error(name, "not a number: " + *t);
        return v;
    }

    std::optional<std::int64_t> integer_of(std::string_view name) const {
        auto t = text(name);
        if (!t) return std::nullopt;
        auto v = util::parse_int(*t);
        if (!v) error(name, "not an integer: " + *t);
        return v ? std::optional<std::int64_t>(*v) : std::nullopt;
    }

    std::optional<bool> boolean_of(std::string_view name) const {
        auto t = text(name);
        if (!t) return std::nullopt;
        auto v = util::parse_bool(*t);
        if (!v) error(name, "expected true/false/1/0: " + *t);
        return v;
    }
};

template <typename T>
void merge_field(std::optional<T>& into, const std::optional<T>& from, std::string_view name, std::size_t row,
                 std::vector<Warning>& warnings) {
    if (!from) return;
    if (!into) {
        into = from;
    } else if (*into != *from) {
        warnings.push_back({row, std::string(name), "conflicts with an earlier row for the same image; first value kept"});
    }
}

void merge_image(catalog::ImageRecord& into, const catalog::ImageRecord& from, std::size_t row,
                 std::vector<Warning>& warnings) {
    merge_field(into.width_px, from.width_px, "width_px", row, warnings);
    merge_field(into.height_px, from.height_px, "height_px", row, warnings);
    merge_field(into.latitude, from.latitude, "latitude", row, warnings);
    merge_field(into.longitude, from.longitude, "longitude", row, warnings);
    merge_field(into.depth_m, from.depth_m, "depth_m", row, warnings);
    merge_field(into.timestamp, from.timestamp, "timestamp", row, warnings);
    merge_field(into.imaging_type, from.imaging_type, "imaging_type", row, warnings);
    merge_field(into.altitude_m, from.altitude_m, "altitude_m", row, warnings);
    // observer is per localization; the image keeps the first one seen
    if (!into.observer) into.observer = from.observer;
}

}  // namespace

ParsedCollection parse_collection_csv(std::string_view meta_text, std::string_view csv_text,
                                      const taxonomy::ConceptTree* tree) {
    ParsedCollection out;
    auto& report = out.report;
    out.collection = parse_meta(meta_text, report);

    std::vector<std::vector<std::string>> records;
    try {
        records = util::parse_csv(csv_text);
    } catch (const util::CsvError& e) {
        report.errors.push_back({e.record, "csv", e.what()});
        return out;
    }
    if (records.empty()) {
        report.errors.push_back({1, "header", "missing header row"});
        return out;
    }

    std::unordered_map<std::string, std::size_t> columns;
    for (std::size_t i = 0; i < records[0].size(); ++i) {
        const std::string name = util::to_lower(util::trim(records[0][i]));
        if (!columns.emplace(name, i).second) {
            report.errors.push_back({1, name, "duplicate column"});
        }
        if (std::find(kColumns.begin(), kColumns.end(), name) == kColumns.end()) {
            report.warnings.push_back({1, name, "unknown column ignored"});
        }
    }
    for (auto col : kRequiredColumns) {
        if (!columns.count(std::string(col))) {
            report.errors.push_back({1, std::string(col), "missing required column: " + std::string(col)});
        }
    }
    if (std::any_of(report.errors.begin(), report.errors.end(), [](const RowError& e) { return e.row == 1; })) {
        return out;
    }
    for (auto col : kRecommendedColumns) {
        if (!columns.count(std::string(col))) {
            report.warnings.push_back({0, std::string(col), "missing recommended column: " + std::string(col)});
        }
    }

    std::unordered_map<std::string, std::size_t> by_url;
    std::map<std::string, std::size_t> empty_recommended;
    report.rows_read = records.size() - 1;

    for (std::size_t r = 1; r < records.size(); ++r) {
        const std::size_t number = r + 1;
        std::vector<RowError> errors;
        Row row{records[r], columns, number, errors};
        if (records[r].size() != records[0].size()) {
            row.error("columns", "expected " + std::to_string(records[0].size()) + " fields, found " +
                                     std::to_string(records[r].size()));
            report.errors.insert(report.errors.end(), errors.begin(), errors.end());
            continue;
        }

        catalog::ImageRecord img;
        if (auto url = row.text("image_url")) {
            img.image_url = *url;
        } else {
            row.error("image_url", "image URL must be nonempty");
        }
        img.width_px = row.integer_of("width_px");
        img.height_px = row.integer_of("height_px");
        img.latitude = row.number_of("latitude");
        img.longitude = row.number_of("longitude");
        img.depth_m = row.number_of("depth_m");
        img.altitude_m = row.number_of("altitude_m");
        img.imaging_type = row.text("imaging_type");
        img.observer = row.text("observer");
        if (auto ts = row.text("timestamp")) {
            if (auto parsed = util::parse_iso8601(*ts)) {
                img.timestamp = util::format_iso8601(*parsed);
            } else {
                row.error("timestamp", "timestamp must be ISO8601: " + *ts);
            }
        }
        for (const auto& e : catalog::validate_image(img)) {
            if (e.field != "image_url" && e.field != "timestamp") row.error(e.field, e.message);
        }
        for (auto col : kRecommendedColumns) {
            if (columns.count(std::string(col)) && !row.text(col)) ++empty_recommended[std::string(col)];
        }

        const bool bare = !row.text("x") && !row.text("y") && !row.text("width") && !row.text("height") &&
                          !row.text("concept");
        std::optional<Localization> loc;
        if (!bare) {
            Localization l;
            auto coord = [&](std::string_view name, double& into) {
                if (auto v = row.number_of(name)) {
                    into = *v;
                } else if (!row.text(name)) {
                    row.error(name, "missing required value: " + std::string(name));
                }
            };
            coord("x", l.bbox.x);
            coord("y", l.bbox.y);
            coord("width", l.bbox.width);
            coord("height", l.bbox.height);
            if (auto c = row.text("concept")) {
                l.concept_name = *c;
                if (tree && !tree->find(*c)) row.error("concept", "unresolvable concept: " + *c);
            } else {
                row.error("concept", "missing required value: concept");
            }
            l.alt_concept = row.text("altconcept");
            l.group_of = row.boolean_of("group_of");
            l.occluded = row.boolean_of("occluded");
            l.truncated = row.boolean_of("truncated");
            l.observer = row.text("observer");

            auto width_px = img.width_px;
            auto height_px = img.height_px;
            if (auto it = by_url.find(img.image_url); it != by_url.end()) {
                const auto& prior = out.images[it->second].image;
                if (!width_px) width_px = prior.width_px;
                if (!height_px) height_px = prior.height_px;
            }
            if (std::none_of(errors.begin(), errors.end(), [](const RowError& e) {
                    return e.field == "x" || e.field == "y" || e.field == "width" || e.field == "height";
                })) {
                for (const auto& e : catalog::validate_bbox(l.bbox, width_px, height_px)) row.error(e.field, e.message);
            }
            loc = std::move(l);
        }

        if (!errors.empty()) {
            report.errors.insert(report.errors.end(), errors.begin(), errors.end());
            continue;
        }
        ++report.rows_accepted;
        auto [it, fresh] = by_url.emplace(img.image_url, out.images.size());
        if (fresh) {
            out.images.push_back({img, {}});
            out.image_rows.push_back(number);
            out.localization_rows.emplace_back();
        } else {
            merge_image(out.images[it->second].image, img, number, report.warnings);
        }
        if (loc) {
            out.images[it->second].localizations.push_back(std::move(*loc));
            out.localization_rows[it->second].push_back(number);
        }
    }
    for (const auto& [col, n] : empty_recommended) {
        report.warnings.push_back({0, col, std::to_string(n) + " row(s) without " + col});
    }
    return out;
}

namespace {

std::string opt(const std::optional<std::string>& v) { return v ? *v : std::string(); }
std::string opt(const std::optional<double>& v) { return v ? util::format_double(*v) : std::string(); }
std::string opt(const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : std::string(); }
std::string opt(const std::optional<bool>& v) { return v ? (*v ? "true" : "false") : std::string(); }

std::vector<std::string> image_cells(const catalog::ImageRecord& img) {
    return {img.image_url,  "", "", "", "", "", "", opt(img.latitude), opt(img.longitude), opt(img.depth_m),
            opt(img.timestamp), opt(img.imaging_type), opt(img.observer), opt(img.altitude_m), "", "", "",
            opt(img.width_px), opt(img.height_px)};
}

}  // namespace

std::string export_csv(const std::vector<ImageEntry>& images) {
    std::string out = util::csv_line(std::vector<std::string>(kColumns.begin(), kColumns.end()));
    for (const auto& e : images) {
        auto cells = image_cells(e.image);
        if (e.localizations.empty()) {
            out += util::csv_line(cells);
            continue;
        }
        for (const auto& l : e.localizations) {
            cells[1] = util::format_double(l.bbox.x);
            cells[2] = util::format_double(l.bbox.y);
            cells[3] = util::format_double(l.bbox.width);
            cells[4] = util::format_double(l.bbox.height);
            cells[5] = l.concept_name;
            cells[6] = opt(l.alt_concept);
            cells[12] = opt(l.observer);
            cells[14] = opt(l.group_of);
            cells[15] = opt(l.occluded);
            cells[16] = opt(l.truncated);
            out += util::csv_line(cells);
        }
    }
    return out;
}

ExportedCollection export_collection(catalog::Catalog& catalog, std::string_view collection_uuid) {
    auto c = catalog.collection(collection_uuid);
    if (!c) {
        throw catalog::CatalogError(catalog::ErrorKind::not_found,
                                    "unknown collection " + std::string(collection_uuid));
    }
    catalog::QueryFilter f;
    f.collection_uuid = std::string(collection_uuid);
    return {format_meta(*c), export_csv(catalog.select(f))};
}

IngestResult ingest(catalog::Catalog& catalog, std::string_view meta_text, std::string_view csv_text,
                    bool dry_run) {
    auto tree = catalog.taxonomy();
    auto parsed = parse_collection_csv(meta_text, csv_text, tree.get());
    IngestResult result;
    auto& report = parsed.report;

    // URLs already present in an existing collection of the same uuid
    if (report.ok() && catalog.collection(parsed.collection.uuid)) {
        catalog::QueryFilter f;
        f.collection_uuid = parsed.collection.uuid;
        std::set<std::string> existing;
        for (const auto& e : catalog.select(f)) existing.insert(e.image.image_url);
        for (std::size_t i = 0; i < parsed.images.size(); ++i) {
            if (existing.count(parsed.images[i].image.image_url)) {
                report.errors.push_back({parsed.image_rows[i], "image_url",
                                         "image URL already present in collection: " + parsed.images[i].image.image_url});
            }
        }
    }

    if (report.ok() && !dry_run) {
        try {
            result.counts = catalog.ingest(parsed.collection, parsed.images);
            result.collection_uuid = parsed.collection.uuid;
        } catch (const catalog::CatalogError& e) {
            static const std::regex path(R"(images\[(\d+)\]\.(?:localizations\[(\d+)\]\.)?(\w+))");
            if (e.fields().empty()) report.errors.push_back({0, "store", e.what()});
            for (const auto& fe : e.fields()) {
                std::smatch m;
                if (std::regex_match(fe.field, m, path)) {
                    const auto i = std::stoul(m[1].str());
                    std::size_t row = parsed.image_rows.at(i);
                    if (m[2].matched) row = parsed.localization_rows.at(i).at(std::stoul(m[2].str()));
                    report.errors.push_back({row, m[3].str(), fe.message});
                } else {
                    report.errors.push_back({0, fe.field, fe.message});
                }
            }
        }
    }
    if (!report.has_file_error()) report.rows_accepted = report.rows_read - report.error_rows();
    result.report = std::move(report);
    return result;
}

std::string canonical_content(const Collection& c, const std::vector<ImageEntry>& images) {
    std::string out = "collection\n";
    for (const auto& f : catalog::kRequiredCollectionFields) {
        if (f.key == "uuid" || f.key == "modified") continue;
        out += std::string(f.key) + "=" + c.*f.member + "\n";
    }
    for (const auto& f : catalog::kOptionalCollectionFields) {
        out += std::string(f.key) + "=" + opt(c.*f.member) + "\n";
    }
    std::vector<std::string> blocks;
    for (const auto& e : images) {
        const auto& i = e.image;
        std::string block = util::csv_line({"image", i.image_url, opt(i.width_px), opt(i.height_px), opt(i.latitude),
                                            opt(i.longitude), opt(i.depth_m), opt(i.timestamp), opt(i.imaging_type),
                                            opt(i.observer), opt(i.altitude_m)});
        std::vector<std::string> locs;
        for (const auto& l : e.localizations) {
            locs.push_back(util::csv_line({"box", util::format_double(l.bbox.x), util::format_double(l.bbox.y),
                                           util::format_double(l.bbox.width), util::format_double(l.bbox.height),
                                           l.concept_name, opt(l.alt_concept), opt(l.group_of), opt(l.occluded),
                                           opt(l.truncated), opt(l.observer)}));
        }
        std::sort(locs.begin(), locs.end());
        for (auto& l : locs) block += l;
        blocks.push_back(std::move(block));
    }
    std::sort(blocks.begin(), blocks.end());
    for (auto& b : blocks) out += b;
    return out;
}

}  // namespace fn::ingest
