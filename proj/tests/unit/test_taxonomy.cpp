#include <doctest.h>

#include <algorithm>
#include <set>

#include "fn/taxonomy.hpp"
#include "generators.hpp"
#include "support.hpp"

using namespace fn::taxonomy;
using fn::testing::fixture;

namespace {

const ConceptTree& fixture_tree() {
    static const ConceptTree tree = load_taxonomy_file(fixture("taxonomy.tsv"));
    return tree;
}

ErrorKind build_error(std::vector<TaxonRecord> records, std::string* node = nullptr) {
    try {
        ConceptTree::build(std::move(records));
    } catch (const TaxonomyError& e) {
        if (node) *node = e.node();
        return e.kind();
    }
    FAIL("expected TaxonomyError");
    return ErrorKind::parse;
}

std::set<std::string> names(const ConceptTree& t, const std::vector<NodeId>& ids) {
    std::set<std::string> out;
    for (auto id : ids) out.insert(t.name(id));
    return out;
}

}  // namespace

TEST_CASE("single root loads as a one-node tree") {
    auto tree = ConceptTree::build({TaxonRecord{"object", Rank::unranked, std::nullopt, {}}});
    CHECK(tree.size() == 1);
    CHECK(tree.name(tree.root()) == "object");
    CHECK(tree.children(tree.root()).empty());
}

TEST_CASE("fixture chain from kingdom to species loads and resolves") {
    const auto& t = fixture_tree();
    const auto species = t.resolve("Bathochordaeus mcnutti");
    std::vector<std::string> chain;
    for (std::optional<NodeId> cur = species; cur; cur = t.parent(*cur)) chain.push_back(t.name(*cur));
    const std::vector<std::string> expected{"Bathochordaeus mcnutti", "Bathochordaeus", "Oikopleuridae", "Copelata",
                                            "Appendicularia", "Chordata", "Animalia", "object"};
    CHECK(chain == expected);
    CHECK(t.node(species).rank == Rank::species);
}

TEST_CASE("load errors name the offending node") {
    std::string node;
    SUBCASE("parent names a descendant") {
        CHECK(build_error({{"object", Rank::unranked, std::nullopt, {}},
                           {"A", Rank::unranked, "B", {}},
                           {"B", Rank::unranked, "A", {}}},
                          &node) == ErrorKind::cycle);
        CHECK((node == "A" || node == "B"));
    }
    SUBCASE("self parent") {
        CHECK(build_error({{"object", Rank::unranked, std::nullopt, {}}, {"A", Rank::unranked, "A", {}}}, &node) ==
              ErrorKind::cycle);
        CHECK(node == "A");
    }
    SUBCASE("no root at all is a cycle") {
        CHECK(build_error({{"A", Rank::unranked, "B", {}}, {"B", Rank::unranked, "A", {}}}) == ErrorKind::cycle);
    }
    SUBCASE("duplicate name, case-insensitive") {
        CHECK(build_error({{"object", Rank::unranked, std::nullopt, {}}, {"OBJECT", Rank::unranked, "object", {}}},
                          &node) == ErrorKind::duplicate_name);
        CHECK(node == "OBJECT");
    }
    SUBCASE("alias colliding with a name") {
        CHECK(build_error({{"object", Rank::unranked, std::nullopt, {}},
                           {"Medusae", Rank::unranked, "object", {"Object"}}},
                          &node) == ErrorKind::duplicate_name);
        CHECK(node == "Medusae");
    }
    SUBCASE("multiple roots") {
        CHECK(build_error({{"a", Rank::unranked, std::nullopt, {}}, {"b", Rank::unranked, std::nullopt, {}}}, &node) ==
              ErrorKind::multiple_roots);
        CHECK(node == "b");
    }
    SUBCASE("rank inversion") {
        CHECK(build_error({{"Aegina", Rank::genus, std::nullopt, {}}, {"Aeginidae", Rank::family, "Aegina", {}}},
                          &node) == ErrorKind::rank_inversion);
        CHECK(node == "Aeginidae");
    }
    SUBCASE("rank inversion across an unranked node") {
        CHECK(build_error({{"Aegina", Rank::genus, std::nullopt, {}},
                           {"group", Rank::unranked, "Aegina", {}},
                           {"Hydrozoa", Rank::klass, "group", {}}},
                          &node) == ErrorKind::rank_inversion);
        CHECK(node == "Hydrozoa");
    }
    SUBCASE("equal ranks are an inversion") {
        CHECK(build_error({{"a", Rank::genus, std::nullopt, {}}, {"b", Rank::genus, "a", {}}}) ==
              ErrorKind::rank_inversion);
    }
    SUBCASE("unknown parent") {
        CHECK(build_error({{"object", Rank::unranked, std::nullopt, {}}, {"x", Rank::unranked, "nowhere", {}}},
                          &node) == ErrorKind::unknown_parent);
        CHECK(node == "x");
    }
    SUBCASE("empty") { CHECK(build_error({}) == ErrorKind::empty); }
}

TEST_CASE("text format parsing") {
    auto recs = parse_taxonomy_text("# comment\n\nroot\t\t\t\nchild\tgenus\troot\ta|b\r\n");
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].rank == Rank::unranked);
    CHECK(!recs[0].parent);
    CHECK(recs[1].parent == "root");
    CHECK(recs[1].aliases == std::vector<std::string>{"a", "b"});
    CHECK_THROWS_AS(parse_taxonomy_text("x\tsubgenus\t\t\n"), TaxonomyError);

    auto again = parse_taxonomy_text(format_taxonomy_text(recs));
    CHECK(again == recs);
}

TEST_CASE("resolve is case-insensitive over names and aliases") {
    const auto& t = fixture_tree();
    CHECK(t.name(t.resolve("bathochordaeus mcnutti")) == "Bathochordaeus mcnutti");
    CHECK(t.name(t.resolve("jelly")) == "Medusae");
    CHECK(t.name(t.resolve("  JELLYFISH ")) == "Medusae");
    try {
        t.resolve("Nonexistus fakeus");
        FAIL("expected not found");
    } catch (const TaxonomyError& e) {
        CHECK(e.kind() == ErrorKind::not_found);
        CHECK(e.node() == "Nonexistus fakeus");
    }
    // no fuzzy matching
    CHECK_FALSE(t.find("Bathochordeus mcnutti"));
}

TEST_CASE("descendants") {
    const auto& t = fixture_tree();
    CHECK(names(t, t.descendants(t.resolve("Bathochordaeus mcnutti"))) ==
          std::set<std::string>{"Bathochordaeus mcnutti"});
    CHECK(t.descendants(t.root()).size() == t.size());
    CHECK(names(t, t.descendants(t.resolve("Bathochordaeus"))) ==
          std::set<std::string>{"Bathochordaeus", "Bathochordaeus mcnutti", "Bathochordaeus charon"});
}

TEST_CASE("rank_label back-propagates and coarsens") {
    const auto& t = fixture_tree();
    const auto label = [&](const char* n, Rank r) { return t.rank_label(t.resolve(n), r); };

    CHECK(label("Bathochordaeus mcnutti", Rank::genus) == "Bathochordaeus");
    CHECK(label("Bathochordaeus mcnutti", Rank::species) == "Bathochordaeus mcnutti");
    CHECK(label("Bathochordaeus mcnutti", Rank::order) == "Copelata");
    CHECK(label("Bathochordaeus", Rank::species) == "Bathochordaeus");
    for (Rank r : {Rank::kingdom, Rank::phylum, Rank::klass, Rank::order, Rank::family, Rank::genus, Rank::species}) {
        CHECK(t.rank_label(t.root(), r) == "object");
    }
    // missing family/order: next coarser ranked ancestor
    CHECK(label("Strongylocentrotus fragilis", Rank::family) == "Echinoidea");
    CHECK(label("Paragorgia", Rank::family) == "Alcyonacea");
    // unranked node in the middle is skipped
    CHECK(label("Aegina citrea", Rank::klass) == "Hydrozoa");
    CHECK(label("Medusae", Rank::genus) == "Cnidaria");
    // pure unranked chain
    CHECK_THROWS_AS(label("equipment", Rank::genus), TaxonomyError);
    CHECK_THROWS_AS(t.rank_label(t.root(), Rank::unranked), TaxonomyError);
}

TEST_CASE("rank_label is idempotent under re-labelling") {
    const auto& t = fixture_tree();
    for (std::uint32_t i = 0; i < t.size(); ++i) {
        NodeId n{i};
        for (Rank r : {Rank::kingdom, Rank::phylum, Rank::klass, Rank::order, Rank::family, Rank::genus,
                       Rank::species}) {
            std::string first;
            try {
                first = t.rank_label(n, r);
            } catch (const TaxonomyError&) {
                continue;
            }
            CHECK(t.rank_label(t.resolve(first), r) == first);
        }
    }
}

TEST_CASE("supercategory rollup") {
    const auto& t = fixture_tree();
    auto map = SupercategoryMap::parse(fn::testing::read_file(fixture("supercategories.tsv")));
    CHECK_THROWS_AS(map.supercategory_of(t, t.root()), TaxonomyError);
    map.validate(t);
    CHECK(map.supercategory_of(t, t.resolve("Strongylocentrotus fragilis")) == "urchin");
    CHECK(map.supercategory_of(t, t.resolve("Chionoecetes tanneri")) == "crab");
    CHECK(map.supercategory_of(t, t.resolve("Gersemia juliepackardae")) == "soft coral");
    CHECK_FALSE(map.supercategory_of(t, t.resolve("Bathochordaeus mcnutti")));
    CHECK_FALSE(map.supercategory_of(t, t.root()));

    SupercategoryMap overlapping({{"soft coral", {"Alcyonacea"}}, {"sea fan", {"Paragorgia"}}});
    try {
        overlapping.validate(t);
        FAIL("expected overlap error");
    } catch (const TaxonomyError& e) {
        CHECK(e.kind() == ErrorKind::configuration);
        CHECK(e.node() == "Paragorgia");
    }
    CHECK_THROWS_AS(overlapping.supercategory_of(t, t.root()), TaxonomyError);

    SupercategoryMap unknown(std::vector<SupercategoryMap::Entry>{{"x", {"Nope"}}});
    CHECK_THROWS_AS(unknown.validate(t), TaxonomyError);

    // validated for one tree does not carry over to another
    auto other = load_taxonomy_file(fixture("taxonomy.tsv"));
    CHECK_THROWS_AS(map.supercategory_of(other, other.root()), TaxonomyError);
}

TEST_CASE("random trees: descendants closure and supercategory uniqueness") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        auto tree = ConceptTree::build(fn::testing::random_taxonomy(rng, 40));
        CHECK(tree.descendants(tree.root()).size() == tree.size());
        for (std::uint32_t a = 0; a < tree.size(); ++a) {
            auto da = tree.descendants(NodeId{a});
            std::set<std::uint32_t> sa;
            for (auto d : da) sa.insert(d.value);
            CHECK(sa.size() == da.size());
            for (auto b : tree.children(NodeId{a})) {
                auto db = tree.descendants(b);
                CHECK(db.size() < da.size());
                for (auto d : db) CHECK(sa.count(d.value) == 1);
            }
        }
        auto map = fn::testing::random_supercategories(rng, tree, 4);
        map.validate(tree);
        for (std::uint32_t n = 0; n < tree.size(); ++n) {
            auto label = map.supercategory_of(tree, NodeId{n});
            if (!label) continue;
            for (auto d : tree.descendants(NodeId{n})) CHECK(map.supercategory_of(tree, d) == label);
        }
    }
}
