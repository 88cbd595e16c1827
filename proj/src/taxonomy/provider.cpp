#include "fn/taxonomy_provider.hpp"

#include <httplib.h>

#include <json.hpp>

#include "fn/util/strings.hpp"

namespace fn::taxonomy {
namespace {

using nlohmann::json;

TaxonRecord record_of(const ConceptTree& tree, NodeId id) {
    const auto& n = tree.node(id);
    return TaxonRecord{n.name, n.rank, n.parent ? std::optional<std::string>(tree.name(*n.parent)) : std::nullopt,
                       n.aliases};
}

json to_json(const TaxonRecord& r) {
    return json{{"name", r.name},
                {"rank", std::string(rank_name(r.rank))},
                {"parent", r.parent ? json(*r.parent) : json(nullptr)},
                {"aliases", r.aliases}};
}

TaxonRecord from_json(const json& j) {
    if (!j.is_object() || !j.contains("name") || !j["name"].is_string()) {
        throw TaxonomyError(ErrorKind::provider, "", "provider record lacks a name");
    }
    TaxonRecord r;
    r.name = j["name"].get<std::string>();
    auto rank = parse_rank(j.value("rank", ""));
    if (!rank) throw TaxonomyError(ErrorKind::provider, r.name, "provider returned an unknown rank");
    r.rank = *rank;
    if (j.contains("parent") && j["parent"].is_string() && !j["parent"].get<std::string>().empty()) {
        r.parent = j["parent"].get<std::string>();
    }
    if (j.contains("aliases") && j["aliases"].is_array()) {
        for (const auto& a : j["aliases"]) r.aliases.push_back(a.get<std::string>());
    }
    return r;
}

}  // namespace

std::optional<TaxonRecord> LocalTaxonomyProvider::lookup(std::string_view name) {
    auto id = tree_->find(name);
    if (!id) return std::nullopt;
    return record_of(*tree_, *id);
}

std::vector<TaxonRecord> LocalTaxonomyProvider::children(std::string_view name) {
    std::vector<TaxonRecord> out;
    auto id = tree_->find(name);
    if (!id) return out;
    for (NodeId c : tree_->children(*id)) out.push_back(record_of(*tree_, c));
    return out;
}

struct RemoteTaxonomyProvider::Impl {
    std::string scheme_host_port;
    std::string prefix;
    std::chrono::milliseconds timeout;

    httplib::Result get(const std::string& query) {
        httplib::Client client(scheme_host_port);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        return client.Get(prefix + "/taxa?" + query);
    }
};

RemoteTaxonomyProvider::RemoteTaxonomyProvider(std::string base_url, std::chrono::milliseconds timeout)
    : impl_(std::make_unique<Impl>()) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos || base_url.compare(0, scheme_end, "http") != 0) {
        throw TaxonomyError(ErrorKind::provider, base_url, "provider URL must start with http://");
    }
    const auto path_start = base_url.find('/', scheme_end + 3);
    impl_->scheme_host_port = base_url.substr(0, path_start);
    impl_->prefix = path_start == std::string::npos ? "" : base_url.substr(path_start);
    while (!impl_->prefix.empty() && impl_->prefix.back() == '/') impl_->prefix.pop_back();
    impl_->timeout = timeout;
}

RemoteTaxonomyProvider::~RemoteTaxonomyProvider() = default;

std::optional<TaxonRecord> RemoteTaxonomyProvider::lookup(std::string_view name) {
    auto res = impl_->get("name=" + util::url_encode(name));
    if (!res) {
        throw TaxonomyError(ErrorKind::provider, std::string(name),
                            "provider request failed: " + httplib::to_string(res.error()));
    }
    if (res->status == 404) return std::nullopt;
    if (res->status != 200) {
        throw TaxonomyError(ErrorKind::provider, std::string(name),
                            "provider returned HTTP " + std::to_string(res->status));
    }
    try {
        return from_json(json::parse(res->body));
    } catch (const json::exception& e) {
        throw TaxonomyError(ErrorKind::provider, std::string(name), std::string("malformed provider body: ") + e.what());
    }
}

std::vector<TaxonRecord> RemoteTaxonomyProvider::children(std::string_view name) {
    auto res = impl_->get("parent=" + util::url_encode(name));
    if (!res) {
        throw TaxonomyError(ErrorKind::provider, std::string(name),
                            "provider request failed: " + httplib::to_string(res.error()));
    }
    if (res->status == 404) return {};
    if (res->status != 200) {
        throw TaxonomyError(ErrorKind::provider, std::string(name),
                            "provider returned HTTP " + std::to_string(res->status));
    }
    std::vector<TaxonRecord> out;
    try {
        auto body = json::parse(res->body);
        if (!body.is_array()) throw TaxonomyError(ErrorKind::provider, std::string(name), "expected a JSON array");
        for (const auto& item : body) out.push_back(from_json(item));
    } catch (const json::exception& e) {
        throw TaxonomyError(ErrorKind::provider, std::string(name), std::string("malformed provider body: ") + e.what());
    }
    return out;
}

TaxaResponse taxa_response(const ConceptTree& tree, const std::multimap<std::string, std::string>& params) {
    const auto err = [](int status, const std::string& msg) {
        return TaxaResponse{status, json{{"error", msg}}.dump()};
    };
    if (auto it = params.find("name"); it != params.end()) {
        auto id = tree.find(it->second);
        if (!id) return err(404, "not found");
        return TaxaResponse{200, to_json(record_of(tree, *id)).dump()};
    }
    if (auto it = params.find("parent"); it != params.end()) {
        auto id = tree.find(it->second);
        if (!id) return err(404, "not found");
        json arr = json::array();
        for (NodeId c : tree.children(*id)) arr.push_back(to_json(record_of(tree, c)));
        return TaxaResponse{200, arr.dump()};
    }
    return err(400, "expected a name or parent query parameter");
}

}  // namespace fn::taxonomy
