#pragma once

#include <httplib.h>

#include <json.hpp>
#include <memory>
#include <string>

#include "catalog_fixtures.hpp"
#include "fn/api/events.hpp"
#include "fn/api/service.hpp"

namespace fn::testing {

inline const std::string kToken = "s3cret-token";

/// Live service on a free local port over a scratch catalog, with events
/// collected in memory.
struct ServiceFixture {
    CatalogFixture store;
    std::shared_ptr<api::CollectorSink> sink = std::make_shared<api::CollectorSink>();
    api::EventBus bus{sink};
    api::Service service;
    int port;
    httplib::Client client;

    explicit ServiceFixture(std::optional<std::string> token = kToken)
        : service(api::ServiceConfig{"127.0.0.1", 0, std::move(token), 8}, store.catalog, bus),
          port(service.start()),
          client("127.0.0.1", port) {
        client.set_connection_timeout(5);
        client.set_read_timeout(10);
    }

    httplib::Headers auth() const { return {{"Authorization", "Bearer " + kToken}}; }

    httplib::Result post_collection(const std::string& meta, const std::string& csv, const std::string& query = "") {
        httplib::MultipartFormDataItems items{{"csv", csv, "collection.csv", "text/csv"},
                                              {"meta", meta, "collection.meta", "text/plain"}};
        return client.Post("/collections" + query, auth(), items);
    }

    httplib::Result patch(const std::string& id, const nlohmann::json& body) {
        return client.Patch("/localizations/" + id, auth(), body.dump(), "application/json");
    }

    static nlohmann::json body(const httplib::Result& r) { return nlohmann::json::parse(r->body); }
};

}  // namespace fn::testing
