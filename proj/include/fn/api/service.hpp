#pragma once

#include <memory>
#include <optional>
#include <string>

#include "fn/api/events.hpp"
#include "fn/catalog.hpp"

namespace fn::api {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    /// Bearer token for writes. Without one every write is refused.
    std::optional<std::string> token;
    std::size_t threads = 8;
};

/// HTTP front end over a catalog. Reads are anonymous; POST and PATCH need
/// `Authorization: Bearer <token>`.
///
///   GET   /health
///   GET   /concepts?prefix=&limit=          autocomplete
///   GET   /concepts/{name}
///   GET   /concepts/{name}/descendants
///   GET   /taxa?name= | ?parent=            name-lookup contract
///   GET   /images?<filters>                 X-Total-Count header
///   GET   /images/{uuid}
///   POST  /images/{uuid}/localizations      {"localizations": [...]}
///   GET   /collections
///   GET   /collections/{uuid}
///   GET   /collections/{uuid}/meta          sidecar text
///   POST  /collections                      multipart parts csv, meta
///   POST  /collections/{uuid}/images        multipart part csv
///   PATCH /localizations/{id}               {"state", "verifier"}
///   GET   /export?<filters>                 ingest-format CSV
///   GET   /stats/instances|concepts?rank=|sizes  with image filters
///
/// Status: 422 validation, 404 unknown id, 409 illegal transition or
/// conflict, 401 missing or wrong token, 400 unreadable body.
class Service {
public:
    Service(ServiceConfig config, catalog::Catalog& catalog, EventBus& events);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds the listening socket and returns the port. Throws
    /// std::runtime_error when the address is unavailable.
    int bind();

    /// Serves until stop(); binds first if needed.
    void listen();

    /// bind() then serve on a background thread.
    int start();
    void stop();

    int port() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace fn::api
