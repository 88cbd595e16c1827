#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "fn/cli.hpp"
#include "fn/util/strings.hpp"

extern char** environ;

namespace fn::cli {

namespace {

const std::set<std::string> kKeys{"store", "taxonomy", "taxonomy_root", "bind", "token", "log_level", "events"};

}  // namespace

std::map<std::string, std::string> parse_config_file(std::string_view text) {
    std::map<std::string, std::string> out;
    std::size_t n = 0;
    for (const auto& raw : util::split(text, '\n')) {
        ++n;
        const auto line = util::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw std::invalid_argument("config line " + std::to_string(n) + ": expected key=value");
        }
        const std::string key(util::trim(line.substr(0, eq)));
        if (!kKeys.count(key)) throw std::invalid_argument("config line " + std::to_string(n) + ": unknown key " + key);
        out[key] = std::string(util::trim(line.substr(eq + 1)));
    }
    return out;
}

Config resolve_config(const ConfigFlags& flags, const Env& env) {
    auto env_value = [&](const char* name) -> std::optional<std::string> {
        auto it = env.find(name);
        if (it == env.end() || it->second.empty()) return std::nullopt;
        return it->second;
    };

    std::map<std::string, std::string> file;
    auto path = flags.config_file ? flags.config_file : env_value("FN_CONFIG");
    if (path) {
        std::ifstream in(*path, std::ios::binary);
        if (!in) throw IoError("cannot read config file " + *path);
        std::ostringstream ss;
        ss << in.rdbuf();
        file = parse_config_file(ss.str());
    }

    auto pick = [&](const std::optional<std::string>& flag, const char* env_name,
                    const char* key) -> std::optional<std::string> {
        if (flag) return flag;
        if (auto e = env_value(env_name)) return e;
        if (auto it = file.find(key); it != file.end()) return it->second;
        return std::nullopt;
    };

    Config c;
    if (auto v = pick(flags.store, "FN_STORE", "store")) c.store = *v;
    if (auto v = pick(flags.taxonomy, "FN_TAXONOMY", "taxonomy")) c.taxonomy = *v;
    if (auto v = pick(flags.taxonomy_root, "FN_TAXONOMY_ROOT", "taxonomy_root")) c.taxonomy_root = *v;
    if (auto v = pick(flags.bind, "FN_BIND", "bind")) c.bind = *v;
    if (auto v = pick(flags.token, "FN_TOKEN", "token")) c.token = *v;
    if (auto v = pick(flags.log_level, "FN_LOG_LEVEL", "log_level")) c.log_level = *v;
    if (auto v = pick(flags.events, "FN_EVENTS", "events")) c.events = *v;
    return c;
}

HostPort parse_bind(std::string_view text) {
    const auto colon = text.rfind(':');
    if (colon == std::string_view::npos || colon == 0) {
        throw std::invalid_argument("bind address must be host:port, got " + std::string(text));
    }
    HostPort hp;
    hp.host = std::string(text.substr(0, colon));
    const auto port = text.substr(colon + 1);
    auto [p, ec] = std::from_chars(port.data(), port.data() + port.size(), hp.port);
    if (ec != std::errc() || p != port.data() + port.size() || hp.port < 0 || hp.port > 65535) {
        throw std::invalid_argument("bad port in bind address " + std::string(text));
    }
    return hp;
}

Env environment() {
    Env env;
    for (char** e = environ; e && *e; ++e) {
        std::string_view kv(*e);
        const auto eq = kv.find('=');
        if (eq != std::string_view::npos) env.emplace(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
    }
    return env;
}

}  // namespace fn::cli
