#include <doctest.h>

#include <set>

#include "catalog_fixtures.hpp"
#include "fn/ingest.hpp"
#include "fn/util/csv.hpp"
#include "fn/util/strings.hpp"

using namespace fn::ingest;
using fn::testing::CatalogFixture;
using fn::testing::fixture;
using fn::testing::read_file;

namespace {

const std::string kMeta = read_file(fixture("aegina.meta"));

bool has_error(const IngestReport& r, std::size_t row, std::string_view field) {
    for (const auto& e : r.errors)
        if (e.row == row && e.field == field) return true;
    return false;
}

bool has_warning(const IngestReport& r, std::string_view field) {
    for (const auto& w : r.warnings)
        if (w.field == field) return true;
    return false;
}

std::string without_key(const std::string& meta, std::string_view key) {
    std::string out;
    for (const auto& line : fn::util::split(meta, '\n')) {
        if (line.rfind(std::string(key) + "=", 0) == 0) continue;
        out += line + "\n";
    }
    return out;
}

}  // namespace

TEST_CASE("single row becomes one image with one box") {
    auto p = parse_collection_csv(kMeta, read_file(fixture("aegina.csv")));
    CHECK(p.report.ok());
    REQUIRE(p.images.size() == 1);
    REQUIRE(p.images[0].localizations.size() == 1);
    const auto& l = p.images[0].localizations[0];
    CHECK(p.images[0].image.image_url == "url");
    CHECK(l.concept_name == "Aegina");
    CHECK(l.bbox == fn::catalog::BoundingBox{10, 20, 30, 40});
    CHECK(p.report.rows_read == 1);
    CHECK(p.report.rows_accepted == 1);
    CHECK(p.collection.owner_institution == "NOAA Ocean Exploration");
    // recommended columns absent: warned; suggested columns absent: silent
    for (auto col : kRecommendedColumns) CHECK(has_warning(p.report, col));
    CHECK_FALSE(has_warning(p.report, "group_of"));
    CHECK_FALSE(has_warning(p.report, "altconcept"));
}

TEST_CASE("missing required column is a file-level error") {
    for (auto col : kRequiredColumns) {
        std::vector<std::string> header;
        std::vector<std::string> row;
        const std::vector<std::pair<std::string, std::string>> cells{
            {"image_url", "url"}, {"x", "10"}, {"y", "20"}, {"width", "30"}, {"height", "40"}, {"concept", "Aegina"}};
        for (const auto& [h, v] : cells) {
            if (h == col) continue;
            header.push_back(h);
            row.push_back(v);
        }
        auto p = parse_collection_csv(kMeta, fn::util::csv_line(header) + fn::util::csv_line(row));
        CHECK_FALSE(p.report.ok());
        CHECK(has_error(p.report, 1, col));
        CHECK(p.report.has_file_error());
        CHECK(p.images.empty());
    }
}

TEST_CASE("rows sharing a URL merge") {
    const std::string csv =
        "image_url,x,y,width,height,concept,depth_m,observer\n"
        "a.png,1,2,3,4,Aegina,100,\n"
        "b.png,1,2,3,4,Aegina,,\n"
        "a.png,10,20,30,40,jelly,150,K. Barnard\n";
    auto p = parse_collection_csv(kMeta, csv);
    REQUIRE(p.images.size() == 2);
    CHECK(p.images[0].localizations.size() == 2);
    CHECK(p.images[0].image.depth_m == 100.0);  // first value wins
    CHECK(p.images[0].image.observer == "K. Barnard");
    CHECK(p.images[0].localizations[0].observer == std::nullopt);
    CHECK(p.images[0].localizations[1].observer == "K. Barnard");
    CHECK(p.image_rows == std::vector<std::size_t>{2, 3});
    CHECK(p.localization_rows[0] == std::vector<std::size_t>{2, 4});
    bool conflict = false;
    for (const auto& w : p.report.warnings) conflict |= (w.row == 4 && w.field == "depth_m");
    CHECK(conflict);
}

TEST_CASE("per-row errors carry row and field, and the invariant holds") {
    const std::string csv =
        "Image_URL,X,y,width,height,concept,latitude,longitude,timestamp,group_of,width_px,height_px\n"
        "ok.png,1,2,3,4,Aegina,36.8,-122,2020-01-01T00:00:00Z,true,100,100\n"
        "bad1.png,one,2,3,4,Aegina,,,,,,\n"
        "bad2.png,1,2,0,4,Aegina,,,,,,\n"
        "bad3.png,1,2,3,4,Aegina,91,,,,,\n"
        "bad4.png,1,2,3,4,Aegina,,,yesterday,,,\n"
        "bad5.png,90,2,30,4,Aegina,,,,,100,100\n"
        "bad6.png,1,2,3,4,Aegina,,,,maybe,,\n"
        "bad7.png,1,2,3,4,,,,,,,\n"
        "bad8.png,1,2,3,4,Aegina,,,,,-5,\n"
        "short.png,1,2\n"
        ",1,2,3,4,Aegina,,,,,,\n";
    auto p = parse_collection_csv(kMeta, csv);
    const auto& r = p.report;
    CHECK(r.rows_read == 11);
    CHECK(r.rows_accepted == 1);
    CHECK(r.rows_accepted + r.error_rows() == r.rows_read);
    CHECK(has_error(r, 3, "x"));
    CHECK(has_error(r, 4, "width"));
    CHECK(has_error(r, 5, "latitude"));
    CHECK(has_error(r, 6, "timestamp"));
    CHECK(has_error(r, 7, "width"));
    CHECK(has_error(r, 8, "group_of"));
    CHECK(has_error(r, 9, "concept"));
    CHECK(has_error(r, 10, "width_px"));
    CHECK(has_error(r, 11, "columns"));
    CHECK(has_error(r, 12, "image_url"));
    for (const auto& e : r.errors) CHECK_FALSE(e.field.empty());
    // deterministic
    CHECK(parse_collection_csv(kMeta, csv).report.errors.size() == r.errors.size());
}

TEST_CASE("concepts are checked against a tree when given") {
    auto tree = fn::taxonomy::load_taxonomy_file(fixture("taxonomy.tsv"));
    auto p = parse_collection_csv(kMeta, "image_url,x,y,width,height,concept\nu,1,1,1,1,Nonexistus fakeus\n", &tree);
    CHECK(has_error(p.report, 2, "concept"));
}

TEST_CASE("every required collection field omission is rejected by name") {
    for (const auto& f : fn::catalog::kRequiredCollectionFields) {
        auto p = parse_collection_csv(without_key(kMeta, f.key), read_file(fixture("aegina.csv")));
        CHECK_FALSE(p.report.ok());
        bool named = false;
        for (const auto& e : p.report.errors) named |= (e.row == 0 && e.field == f.key &&
                                                         e.message.find(std::string(f.label)) != std::string::npos);
        CHECK_MESSAGE(named, f.key);
    }
    auto p = parse_collection_csv(kMeta, read_file(fixture("aegina.csv")));
    CHECK(has_warning(p.report, "bibliographic_citation"));
    CHECK_FALSE(has_warning(p.report, "references"));  // suggested tier
}

TEST_CASE("ingest writes nothing when anything is wrong") {
    CatalogFixture fx;
    auto bad = ingest(fx.catalog, kMeta, "image_url,x,y,width,height\nu,1,1,1,1\n");
    CHECK_FALSE(bad.report.ok());
    CHECK_FALSE(bad.collection_uuid);
    bad = ingest(fx.catalog, kMeta, "image_url,x,y,width,height,concept\nu,1,1,1,1,Aegina\nv,1,1,1,1,Nonexistus\n");
    CHECK(has_error(bad.report, 3, "concept"));
    CHECK(bad.report.rows_accepted == 1);
    auto counts = fx.store->counts();
    CHECK(counts.collections == 0);
    CHECK(counts.images == 0);

    auto dry = ingest(fx.catalog, kMeta, read_file(fixture("aegina.csv")), true);
    CHECK(dry.report.ok());
    CHECK(fx.store->counts().collections == 0);

    auto good = ingest(fx.catalog, kMeta, read_file(fixture("aegina.csv")));
    CHECK(good.report.ok());
    CHECK(good.counts.images == 1);
    REQUIRE(good.collection_uuid);

    // the same URL again in the same collection names the row
    auto again = ingest(fx.catalog, kMeta, read_file(fixture("aegina.csv")));
    CHECK(has_error(again.report, 2, "image_url"));
    CHECK(fx.store->counts().images == 1);
}

TEST_CASE("export of an empty collection is header only") {
    CatalogFixture fx;
    auto uuid = fx.catalog.upsert_collection(fn::testing::sample_collection());
    auto out = export_collection(fx.catalog, uuid);
    CHECK(out.csv == "image_url,x,y,width,height,concept,altconcept,latitude,longitude,depth_m,timestamp,"
                     "imaging_type,observer,altitude_m,group_of,occluded,truncated,width_px,height_px\n");
    CHECK_THROWS_AS(export_collection(fx.catalog, "missing"), fn::catalog::CatalogError);
}

TEST_CASE("round trip over the fixture corpus") {
    for (int n = 1; n <= 20; ++n) {
        char stem[32];
        std::snprintf(stem, sizeof stem, "ingest/collection_%02d", n);
        const auto meta = read_file(fixture(std::string(stem) + ".meta"));
        const auto csv = read_file(fixture(std::string(stem) + ".csv"));
        CAPTURE(stem);

        CatalogFixture first;
        auto r1 = ingest(first.catalog, meta, csv);
        REQUIRE(r1.report.ok());
        REQUIRE(r1.collection_uuid);

        // independent count from the raw file
        auto raw = fn::util::parse_csv(csv);
        std::set<std::string> urls;
        std::size_t url_col = 0, concept_col = 0;
        for (std::size_t i = 0; i < raw[0].size(); ++i) {
            if (fn::util::iequals(raw[0][i], "image_url")) url_col = i;
            if (fn::util::iequals(raw[0][i], "concept")) concept_col = i;
        }
        std::int64_t boxes = 0;
        for (std::size_t i = 1; i < raw.size(); ++i) {
            urls.insert(raw[i][url_col]);
            boxes += raw[i][concept_col].empty() ? 0 : 1;
        }
        CHECK(r1.counts.images == static_cast<std::int64_t>(urls.size()));
        CHECK(r1.counts.localizations == boxes);

        auto exported = export_collection(first.catalog, *r1.collection_uuid);
        CatalogFixture second;
        auto r2 = ingest(second.catalog, exported.meta, exported.csv);
        REQUIRE(r2.report.ok());

        fn::catalog::QueryFilter f;
        const auto c1 = *first.catalog.collection(*r1.collection_uuid);
        const auto c2 = *second.catalog.collection(*r2.collection_uuid);
        CHECK(canonical_content(c1, first.catalog.select(f)) == canonical_content(c2, second.catalog.select(f)));

        if (n == 1) {
            // all optional fields populated: every column and metadata key appears
            auto header = fn::util::parse_csv(exported.csv)[0];
            CHECK(header.size() == kColumns.size());
            for (const auto& field : fn::catalog::kOptionalCollectionFields) {
                CHECK(exported.meta.find(std::string(field.key) + "=") != std::string::npos);
            }
        }
    }
}

TEST_CASE("canonical content ignores order and identifiers but not data") {
    auto p = parse_collection_csv(kMeta, "image_url,x,y,width,height,concept\na,1,1,1,1,Aegina\na,2,2,2,2,Aegina\nb,1,1,1,1,jelly\n");
    auto q = p;
    std::swap(q.images[0], q.images[1]);
    std::swap(q.images[1].localizations[0], q.images[1].localizations[1]);
    q.images[0].image.uuid = "other";
    q.collection.modified = "2000-01-01";
    CHECK(canonical_content(p.collection, p.images) == canonical_content(q.collection, q.images));
    q.images[0].localizations[0].bbox.x = 1.5;
    CHECK(canonical_content(p.collection, p.images) != canonical_content(q.collection, q.images));
}
