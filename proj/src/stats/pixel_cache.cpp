#include <httplib.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include "fn/image.hpp"
#include "fn/util/log.hpp"
#include "fn/util/uuid.hpp"

namespace fn::stats {

namespace {

std::optional<std::string> read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

PixelCache::PixelCache(std::filesystem::path cache_dir, std::ptrdiff_t max_concurrent)
    : dir_(std::move(cache_dir)),
      slots_(std::clamp<std::ptrdiff_t>(max_concurrent, 1, 64)),
      max_concurrent_(std::clamp<std::ptrdiff_t>(max_concurrent, 1, 64)) {
    std::filesystem::create_directories(dir_);
}

std::optional<std::string> PixelCache::fetch_uncached(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) return read_file(url);
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme == "file") return read_file(url.substr(scheme_end + 3));
    if (scheme != "http") {
        log::warn("unsupported image URL scheme: " + url);
        return std::nullopt;
    }
    const auto path_start = url.find('/', scheme_end + 3);
    httplib::Client client(url.substr(0, path_start));
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(std::chrono::seconds(30));
    client.set_follow_location(true);
    ++network_fetches_;
    auto res = client.Get(path_start == std::string::npos ? "/" : url.substr(path_start));
    if (!res || res->status != 200) {
        log::warn("fetch failed: " + url);
        return std::nullopt;
    }
    return std::move(res->body);
}

std::optional<std::string> PixelCache::fetch(const std::string& url) {
    const bool remote = url.rfind("http://", 0) == 0;
    const auto cached = dir_ / hex(util::fnv1a(url));
    if (remote) {
        if (auto hit = read_file(cached)) return hit;
    }
    slots_.acquire();
    auto body = fetch_uncached(url);
    slots_.release();
    if (remote && body) {
        auto tmp = cached;
        tmp += ".tmp" + hex(std::hash<std::thread::id>{}(std::this_thread::get_id()));
        {
            std::ofstream out(tmp, std::ios::binary);
            out << *body;
        }
        std::error_code ec;
        std::filesystem::rename(tmp, cached, ec);
        if (ec) std::filesystem::remove(tmp, ec);
    }
    return body;
}

std::vector<std::optional<std::string>> PixelCache::fetch_all(const std::vector<std::string>& urls) {
    std::vector<std::optional<std::string>> out(urls.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < urls.size();) out[i] = fetch(urls[i]);
    };
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(max_concurrent_), urls.size());
    std::vector<std::thread> threads;
    for (std::size_t t = 1; t < n; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
    return out;
}

}  // namespace fn::stats
