#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fn::cli {

using Env = std::map<std::string, std::string>;

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kValidation = 1;
inline constexpr int kIo = 2;

/// An unreadable file, unopenable store, busy port or unreachable service.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Config {
    std::filesystem::path store = "fn.db";
    /// File path, or an http(s) base URL of a name-lookup service.
    std::optional<std::string> taxonomy;
    std::string taxonomy_root = "object";  // walk start for a remote taxonomy
    std::string bind = "127.0.0.1:8080";
    std::optional<std::string> token;
    std::string log_level = "info";
    std::string events = "stdout";  // stdout | file:<path> | none
};

/// Values given on the command line; unset means "not given".
struct ConfigFlags {
    std::optional<std::string> config_file;
    std::optional<std::string> store, taxonomy, taxonomy_root, bind, token, log_level, events;
};

/// key=value lines; '#' comments and blank lines skipped. Keys: store,
/// taxonomy, taxonomy_root, bind, token, log_level, events. Unknown keys
/// throw std::invalid_argument naming the line.
std::map<std::string, std::string> parse_config_file(std::string_view text);

/// flags > env (FN_STORE, FN_TAXONOMY, FN_BIND, FN_TOKEN, FN_LOG_LEVEL,
/// FN_EVENTS) > config file (--config or FN_CONFIG) > defaults.
Config resolve_config(const ConfigFlags& flags, const Env& env);

struct HostPort {
    std::string host;
    int port = 0;
};
/// "host:port" with port in [0, 65535]; throws std::invalid_argument.
HostPort parse_bind(std::string_view text);

/// Entry point; argv[0] is the program name. Results go to `out`;
/// diagnostics go to `err` as one JSON object per line.
int run(const std::vector<std::string>& argv, const Env& env, std::ostream& out, std::ostream& err);

/// Makes a running `serve` return; safe from a signal handler.
void request_shutdown();

Env environment();

}  // namespace fn::cli
