#include <doctest.h>
#include <httplib.h>

#include <thread>

#include "fn/taxonomy_provider.hpp"
#include "support.hpp"

using namespace fn::taxonomy;

namespace {

/// Stub WoRMS-style authority serving a tree over loopback.
class StubAuthority {
public:
    explicit StubAuthority(std::shared_ptr<const ConceptTree> tree) : tree_(std::move(tree)) {
        server_.Get("/api/taxa", [this](const httplib::Request& req, httplib::Response& res) {
            ++requests;
            std::multimap<std::string, std::string> params(req.params.begin(), req.params.end());
            auto r = taxa_response(*tree_, params);
            res.status = r.status;
            res.set_content(r.body, "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubAuthority() {
        server_.stop();
        thread_.join();
    }
    std::string base() const { return "http://127.0.0.1:" + std::to_string(port_) + "/api"; }

    std::atomic<int> requests{0};

private:
    std::shared_ptr<const ConceptTree> tree_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

}  // namespace

TEST_CASE("local and remote providers agree on the fixture tree") {
    auto tree = std::make_shared<const ConceptTree>(load_taxonomy_file(fn::testing::fixture("taxonomy.tsv")));
    StubAuthority stub(tree);
    LocalTaxonomyProvider local(tree);
    RemoteTaxonomyProvider remote(stub.base());

    for (const auto& rec : tree->records()) {
        auto l = local.lookup(rec.name);
        auto r = remote.lookup(rec.name);
        REQUIRE(l);
        REQUIRE(r);
        CHECK(*l == *r);
        CHECK(local.parent(rec.name) == remote.parent(rec.name));
        CHECK(local.children(rec.name) == remote.children(rec.name));
    }
    CHECK(remote.lookup("JELLY")->name == "Medusae");
    CHECK(remote.lookup("Bathochordaeus mcnutti")->rank == Rank::species);
    CHECK_FALSE(remote.lookup("Nonexistus fakeus"));
    CHECK_FALSE(local.lookup("Nonexistus fakeus"));
    CHECK(remote.children("Nonexistus fakeus").empty());

    auto via_remote = load_taxonomy(remote, "object");
    auto via_local = load_taxonomy(local, "object");
    CHECK(via_remote.size() == tree->size());
    auto a = via_remote.records(), b = via_local.records();
    std::sort(a.begin(), a.end(), [](auto& x, auto& y) { return x.name < y.name; });
    std::sort(b.begin(), b.end(), [](auto& x, auto& y) { return x.name < y.name; });
    CHECK(a == b);
    CHECK(via_remote.rank_label(via_remote.resolve("Bathochordaeus mcnutti"), Rank::genus) == "Bathochordaeus");
}

TEST_CASE("remote provider surfaces transport failures") {
    RemoteTaxonomyProvider dead("http://127.0.0.1:1", std::chrono::milliseconds(200));
    CHECK_THROWS_AS(dead.lookup("x"), TaxonomyError);
    CHECK_THROWS_AS(RemoteTaxonomyProvider("ftp://example.org"), TaxonomyError);
}

TEST_CASE("taxa_response contract") {
    auto tree = ConceptTree::build({{"object", Rank::unranked, std::nullopt, {}}, {"a b", Rank::genus, "object", {}}});
    CHECK(taxa_response(tree, {{"name", "A B"}}).status == 200);
    CHECK(taxa_response(tree, {{"name", "zzz"}}).status == 404);
    CHECK(taxa_response(tree, {}).status == 400);
    CHECK(taxa_response(tree, {{"parent", "object"}}).body.find("\"a b\"") != std::string::npos);
}
