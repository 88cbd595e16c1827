#include "fn/api/service.hpp"

#include <algorithm>
#include <httplib.h>
#include <stdexcept>
#include <thread>

#include "fn/api/json_codec.hpp"
#include "fn/ingest.hpp"
#include "fn/stats.hpp"
#include "fn/taxonomy_provider.hpp"
#include "fn/util/log.hpp"
#include "fn/util/strings.hpp"

namespace fn::api {

namespace {

constexpr std::size_t kChunk = 64 * 1024;
constexpr std::int64_t kDefaultSuggestions = 20;
constexpr std::int64_t kMaxSuggestions = 100;

void send(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view kind, std::string_view message,
                const std::vector<catalog::FieldError>& fields = {}) {
    send(res, status, error_json(kind, message, fields));
}

int status_of(catalog::ErrorKind k) {
    switch (k) {
        case catalog::ErrorKind::validation:
        case catalog::ErrorKind::unresolvable_concept:
            return 422;
        case catalog::ErrorKind::not_found:
            return 404;
        case catalog::ErrorKind::illegal_transition:
        case catalog::ErrorKind::conflict:
            return 409;
        case catalog::ErrorKind::storage:
            break;
    }
    return 500;
}

// Runs a handler body and maps library errors to responses.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const catalog::CatalogError& e) {
        send_error(res, status_of(e.kind()), catalog::error_kind_name(e.kind()), e.what(), e.fields());
    } catch (const stats::StatsError& e) {
        send_error(res, 422, "validation", e.what());
    } catch (const taxonomy::TaxonomyError& e) {
        const bool missing = e.kind() == taxonomy::ErrorKind::not_found;
        send_error(res, missing ? 404 : 422, taxonomy::error_kind_name(e.kind()), e.what());
    } catch (const Json::exception& e) {
        send_error(res, 400, "bad_request", std::string("unreadable JSON body: ") + e.what());
    }
}

std::string actor_of(const httplib::Request& req) {
    auto a = req.get_header_value("X-Actor");
    return a.empty() ? "api" : a;
}

bool same(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    unsigned char diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff |= static_cast<unsigned char>(a[i] ^ b[i]);
    return diff == 0;
}

const std::set<std::string> kNoExtra;

}  // namespace

struct Service::Impl {
    ServiceConfig cfg;
    catalog::Catalog& catalog;
    EventBus& events;
    httplib::Server server;
    int bound_port = -1;
    std::thread thread;

    Impl(ServiceConfig c, catalog::Catalog& cat, EventBus& ev) : cfg(std::move(c)), catalog(cat), events(ev) {
        const auto n = std::max<std::size_t>(1, cfg.threads);
        server.new_task_queue = [n] { return new httplib::ThreadPool(n); };
        // no SO_REUSEPORT: a second server on a taken port must fail to bind
        server.set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
        });
        routes();
    }

    bool authorized(const httplib::Request& req, httplib::Response& res) const {
        if (!cfg.token || cfg.token->empty()) {
            send_error(res, 401, "unauthorized", "writes are disabled: no token configured");
            return false;
        }
        if (!same(req.get_header_value("Authorization"), "Bearer " + *cfg.token)) {
            res.set_header("WWW-Authenticate", "Bearer");
            send_error(res, 401, "unauthorized", "missing or wrong bearer token");
            return false;
        }
        return true;
    }

    std::vector<catalog::ImageEntry> snapshot(const httplib::Request& req, const std::set<std::string>& extra) {
        return catalog.select(filter_from_params(req.params, extra));
    }

    void routes();
    void concept_routes();
    void image_routes();
    void collection_routes();
    void stats_routes();
};

void Service::Impl::routes() {
    server.set_post_routing_handler([](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_header("Access-Control-Expose-Headers", "X-Total-Count");
    });
    server.Options(".*", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, PATCH, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Authorization, Content-Type, X-Actor");
        res.status = 204;
    });
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) send_error(res, res.status, "not_found", "no such endpoint");
        return httplib::Server::HandlerResponse::Handled;
    });
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        log::error("request failed: " + what);
        send_error(res, 500, "internal", what);
    });

    server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
        Json body;
        bool ok = true;
        try {
            const auto c = catalog.store().counts();
            const auto violations = catalog.store().integrity_violations();
            ok = violations == 0;
            body["store"] = {{"ok", ok},
                             {"collections", c.collections},
                             {"images", c.images},
                             {"localizations", c.localizations},
                             {"integrity_violations", violations}};
        } catch (const std::exception& e) {
            ok = false;
            body["store"] = {{"ok", false}, {"message", e.what()}};
        }
        const auto tree = catalog.taxonomy();
        body["taxonomy"] = {{"ok", true}, {"nodes", tree->size()}, {"root", tree->name(tree->root())}};
        body["status"] = ok ? "ok" : "degraded";
        send(res, ok ? 200 : 503, body);
    });

    concept_routes();
    image_routes();
    collection_routes();
    stats_routes();
}

void Service::Impl::concept_routes() {
    server.Get("/concepts", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto prefix = util::to_lower(req.get_param_value("prefix"));
            std::int64_t limit = kDefaultSuggestions;
            if (req.has_param("limit")) {
                auto v = util::parse_int(req.get_param_value("limit"));
                if (!v || *v < 1 || *v > kMaxSuggestions) {
                    throw catalog::CatalogError(catalog::ErrorKind::validation, "limit must lie in [1, 100]",
                                                {{"limit", "must lie in [1, 100]"}});
                }
                limit = *v;
            }
            const auto tree = catalog.taxonomy();
            std::vector<taxonomy::NodeId> hits;
            for (std::uint32_t i = 0; i < tree->size(); ++i) {
                const taxonomy::NodeId id{i};
                const auto& n = tree->node(id);
                bool match = util::to_lower(n.name).rfind(prefix, 0) == 0;
                for (const auto& a : n.aliases) match = match || util::to_lower(a).rfind(prefix, 0) == 0;
                if (match) hits.push_back(id);
            }
            std::sort(hits.begin(), hits.end(), [&](auto a, auto b) {
                const auto la = util::to_lower(tree->name(a)), lb = util::to_lower(tree->name(b));
                return la != lb ? la < lb : tree->name(a) < tree->name(b);
            });
            if (static_cast<std::int64_t>(hits.size()) > limit) hits.resize(static_cast<std::size_t>(limit));
            Json out = Json::array();
            for (auto id : hits) {
                out.push_back({{"name", tree->name(id)}, {"rank", std::string(taxonomy::rank_name(tree->node(id).rank))}});
            }
            send(res, 200, out);
        });
    });

    server.Get(R"(/concepts/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto tree = catalog.taxonomy();
            send(res, 200, concept_json(*tree, tree->resolve(req.matches[1].str())));
        });
    });

    server.Get(R"(/concepts/([^/]+)/descendants)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto tree = catalog.taxonomy();
            const auto id = tree->resolve(req.matches[1].str());
            Json names = Json::array();
            for (auto d : tree->descendants(id)) names.push_back(tree->name(d));
            send(res, 200, Json{{"concept", tree->name(id)}, {"descendants", std::move(names)}});
        });
    });

    server.Get("/taxa", [this](const httplib::Request& req, httplib::Response& res) {
        auto r = taxonomy::taxa_response(*catalog.taxonomy(), req.params);
        res.status = r.status;
        res.set_content(r.body, "application/json");
    });
}

void Service::Impl::image_routes() {
    server.Get("/images", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto page = catalog.query(filter_from_params(req.params));
            res.set_header("X-Total-Count", std::to_string(page.total));
            send(res, 200, to_json(page));
        });
    });

    server.Get(R"(/images/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto img = catalog.image(req.matches[1].str());
            if (!img) throw catalog::CatalogError(catalog::ErrorKind::not_found, "unknown image " + req.matches[1].str());
            send(res, 200, to_json(*img));
        });
    });

    server.Post(R"(/images/([^/]+)/localizations)", [this](const httplib::Request& req, httplib::Response& res) {
        if (!authorized(req, res)) return;
        guarded(res, [&] {
            const auto body = Json::parse(req.body);
            const Json* items = &body;
            if (body.is_object() && body.contains("localizations")) items = &body.at("localizations");
            std::vector<catalog::Localization> locs;
            auto parse_one = [&](const Json& j, std::size_t i) {
                try {
                    locs.push_back(localization_from_json(j));
                } catch (const catalog::CatalogError& e) {
                    std::vector<catalog::FieldError> fields;
                    for (const auto& f : e.fields()) fields.push_back({"localizations[" + std::to_string(i) + "]." + f.field, f.message});
                    throw catalog::CatalogError(e.kind(), e.what(), fields);
                }
            };
            if (items->is_array()) {
                for (std::size_t i = 0; i < items->size(); ++i) parse_one(items->at(i), i);
            } else {
                parse_one(*items, 0);
            }
            if (locs.empty()) {
                throw catalog::CatalogError(catalog::ErrorKind::validation, "no localizations given",
                                            {{"localizations", "empty"}});
            }
            const auto image_uuid = req.matches[1].str();
            auto stored = catalog.add_localizations(image_uuid, std::move(locs));
            events.publish(event_type::localizations_added, image_uuid, actor_of(req));
            Json out = Json::array();
            for (const auto& l : stored) out.push_back(to_json(l));
            send(res, 201, Json{{"localizations", std::move(out)}});
        });
    });

    server.Patch(R"(/localizations/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        if (!authorized(req, res)) return;
        guarded(res, [&] {
            const auto body = Json::parse(req.body);
            if (!body.is_object() || !body.contains("state") || !body.at("state").is_string()) {
                throw catalog::CatalogError(catalog::ErrorKind::validation, "state is required",
                                            {{"state", "required string"}});
            }
            const auto state = catalog::parse_verification(body.at("state").get<std::string>());
            if (!state) {
                throw catalog::CatalogError(catalog::ErrorKind::validation, "unknown state",
                                            {{"state", "expected verified or rejected"}});
            }
            std::string verifier = actor_of(req);
            if (body.contains("verifier") && !body.at("verifier").is_null()) {
                if (!body.at("verifier").is_string()) {
                    throw catalog::CatalogError(catalog::ErrorKind::validation, "verifier must be a string",
                                                {{"verifier", "must be a string"}});
                }
                verifier = body.at("verifier").get<std::string>();
            }
            auto loc = catalog.set_verification(req.matches[1].str(), *state, verifier);
            events.publish(*state == catalog::Verification::verified ? event_type::localization_verified
                                                                     : event_type::localization_rejected,
                           loc.uuid, verifier);
            send(res, 200, to_json(loc));
        });
    });

    server.Get("/export", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto csv = std::make_shared<std::string>(ingest::export_csv(snapshot(req, kNoExtra)));
            res.status = 200;
            res.set_chunked_content_provider("text/csv", [csv](std::size_t offset, httplib::DataSink& sink) {
                if (offset >= csv->size()) {
                    sink.done();
                    return true;
                }
                const auto n = std::min(kChunk, csv->size() - offset);
                return sink.write(csv->data() + offset, n);
            });
        });
    });
}

void Service::Impl::collection_routes() {
    server.Get("/collections", [this](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] {
            Json out = Json::array();
            for (const auto& c : catalog.store().collections()) out.push_back(to_json(c));
            send(res, 200, out);
        });
    });

    server.Get(R"(/collections/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto c = catalog.collection(req.matches[1].str());
            if (!c) throw catalog::CatalogError(catalog::ErrorKind::not_found, "unknown collection");
            send(res, 200, to_json(*c));
        });
    });

    server.Get(R"(/collections/([^/]+)/meta)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto c = catalog.collection(req.matches[1].str());
            if (!c) throw catalog::CatalogError(catalog::ErrorKind::not_found, "unknown collection");
            res.status = 200;
            res.set_content(ingest::format_meta(*c), "text/plain");
        });
    });

    auto part = [](const httplib::Request& req, const std::string& name) -> std::optional<std::string> {
        if (req.has_file(name)) return req.get_file_value(name).content;
        return std::nullopt;
    };
    auto report_error = [](httplib::Response& res, const ingest::IngestReport& report) {
        std::vector<catalog::FieldError> fields;
        for (const auto& e : report.errors) fields.push_back({e.field, "row " + std::to_string(e.row) + ": " + e.message});
        Json body = error_json("validation", report.errors.empty() ? "rejected" : fields.front().message, fields);
        body["report"] = to_json(report);
        send(res, 422, body);
    };

    server.Post("/collections", [this, part, report_error](const httplib::Request& req, httplib::Response& res) {
        if (!authorized(req, res)) return;
        guarded(res, [&] {
            const auto csv = part(req, "csv");
            const auto meta = part(req, "meta");
            std::vector<catalog::FieldError> missing;
            if (!csv) missing.push_back({"csv", "multipart part required"});
            if (!meta) missing.push_back({"meta", "multipart part required"});
            if (!missing.empty()) throw catalog::CatalogError(catalog::ErrorKind::validation, "missing parts", missing);
            const bool dry = req.has_param("dry_run") && util::parse_bool(req.get_param_value("dry_run")).value_or(false);
            auto result = ingest::ingest(catalog, *meta, *csv, dry);
            if (!result.report.ok()) return report_error(res, result.report);
            Json body{{"report", to_json(result.report)}, {"dry_run", dry}};
            if (result.collection_uuid) {
                body["collection_uuid"] = *result.collection_uuid;
                body["images"] = result.counts.images;
                body["localizations"] = result.counts.localizations;
                events.publish(event_type::collection_created, *result.collection_uuid, actor_of(req));
            }
            send(res, dry ? 200 : 201, body);
        });
    });

    server.Post(R"(/collections/([^/]+)/images)", [this, part, report_error](const httplib::Request& req,
                                                                             httplib::Response& res) {
        if (!authorized(req, res)) return;
        guarded(res, [&] {
            const auto uuid = req.matches[1].str();
            auto c = catalog.collection(uuid);
            if (!c) throw catalog::CatalogError(catalog::ErrorKind::not_found, "unknown collection " + uuid);
            const auto csv = part(req, "csv");
            if (!csv) {
                throw catalog::CatalogError(catalog::ErrorKind::validation, "missing csv part",
                                            {{"csv", "multipart part required"}});
            }
            const auto tree = catalog.taxonomy();
            auto parsed = ingest::parse_collection_csv(ingest::format_meta(*c), *csv, tree.get());
            if (!parsed.report.ok()) return report_error(res, parsed.report);
            const auto counts = catalog.add_images(uuid, std::move(parsed.images));
            events.publish(event_type::images_added, uuid, actor_of(req));
            send(res, 201, Json{{"collection_uuid", uuid},
                                {"images", counts.images},
                                {"localizations", counts.localizations},
                                {"report", to_json(parsed.report)}});
        });
    });
}

void Service::Impl::stats_routes() {
    auto mean_of = [](const stats::Histogram& h) {
        double sum = 0;
        for (std::size_t k = 0; k < h.counts.size(); ++k) sum += static_cast<double>(k) * static_cast<double>(h.counts[k]);
        return h.total ? sum / static_cast<double>(h.total) : 0.0;
    };

    server.Get("/stats/instances", [this, mean_of](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto snap = snapshot(req, kNoExtra);
            const auto h = stats::instances_per_image(snap);
            send(res, 200, Json{{"histogram", to_json(h)}, {"images", snap.size()}, {"mean", mean_of(h)}});
        });
    });

    server.Get("/stats/concepts", [this, mean_of](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto rank_text = req.has_param("rank") ? req.get_param_value("rank") : std::string("species");
            const auto rank = taxonomy::parse_rank(rank_text);
            if (!rank || !taxonomy::is_ranked(*rank)) {
                throw catalog::CatalogError(catalog::ErrorKind::validation, "unknown rank " + rank_text,
                                            {{"rank", "expected kingdom, phylum, class, order, family, genus or species"}});
            }
            const auto snap = snapshot(req, {"rank"});
            const auto h = stats::concepts_per_image(snap, *catalog.taxonomy(), *rank);
            send(res, 200, Json{{"histogram", to_json(h)},
                                {"rank", std::string(taxonomy::rank_name(*rank))},
                                {"images", snap.size()},
                                {"mean", mean_of(h)}});
        });
    });

    server.Get("/stats/sizes", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto d = stats::relative_size_distribution(snapshot(req, kNoExtra));
            send(res, 200, Json{{"histogram", to_json(d.histogram)}, {"excluded", d.excluded}});
        });
    });
}

Service::Service(ServiceConfig config, catalog::Catalog& catalog, EventBus& events)
    : impl_(std::make_unique<Impl>(std::move(config), catalog, events)) {}

Service::~Service() { stop(); }

int Service::bind() {
    if (impl_->bound_port >= 0) return impl_->bound_port;
    int port = -1;
    if (impl_->cfg.port == 0) {
        port = impl_->server.bind_to_any_port(impl_->cfg.host);
    } else if (impl_->server.bind_to_port(impl_->cfg.host, impl_->cfg.port)) {
        port = impl_->cfg.port;
    }
    if (port < 0) {
        throw std::runtime_error("cannot bind " + impl_->cfg.host + ":" + std::to_string(impl_->cfg.port));
    }
    impl_->bound_port = port;
    return port;
}

void Service::listen() {
    bind();
    impl_->server.listen_after_bind();
}

int Service::start() {
    const int p = bind();
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return p;
}

void Service::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

int Service::port() const { return impl_->bound_port; }

}  // namespace fn::api
