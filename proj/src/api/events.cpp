#include "fn/api/events.hpp"

#include <iostream>
#include <json.hpp>
#include <stdexcept>

#include "fn/util/log.hpp"
#include "fn/util/time.hpp"

namespace fn::api {

std::string EventEnvelope::to_json() const {
    return nlohmann::json{{"type", type}, {"subject", subject}, {"timestamp", timestamp}, {"actor", actor}}.dump();
}

EventEnvelope parse_event(std::string_view json) {
    const auto j = nlohmann::json::parse(json);
    return {j.at("type").get<std::string>(), j.at("subject").get<std::string>(), j.at("timestamp").get<std::string>(),
            j.at("actor").get<std::string>()};
}

void StreamSink::publish(const EventEnvelope& e) {
    std::lock_guard lock(mu_);
    out_ << e.to_json() << '\n' << std::flush;
    if (!out_) throw std::runtime_error("event stream write failed");
}

FileSink::FileSink(const std::filesystem::path& path) : out_(path, std::ios::app) {
    if (!out_) throw std::runtime_error("cannot open event file " + path.string());
}

void FileSink::publish(const EventEnvelope& e) {
    std::lock_guard lock(mu_);
    out_ << e.to_json() << '\n' << std::flush;
    if (!out_) throw std::runtime_error("event file write failed");
}

void CollectorSink::publish(const EventEnvelope& e) {
    if (failing_) throw std::runtime_error("collector unavailable");
    std::lock_guard lock(mu_);
    events_.push_back(e);
}

std::vector<EventEnvelope> CollectorSink::events() const {
    std::lock_guard lock(mu_);
    return events_;
}

void CollectorSink::clear() {
    std::lock_guard lock(mu_);
    events_.clear();
}

void EventBus::publish(std::string_view type, std::string subject, std::string actor) noexcept {
    try {
        EventEnvelope e{std::string(type), std::move(subject), util::format_iso8601(util::now_utc()), std::move(actor)};
        if (sink_) sink_->publish(e);
    } catch (const std::exception& ex) {
        ++dropped_;
        log::warn(std::string("event dropped: ") + ex.what());
    } catch (...) {
        ++dropped_;
        log::warn("event dropped");
    }
}

std::shared_ptr<EventSink> make_sink(std::string_view spec) {
    if (spec == "stdout") return std::make_shared<StreamSink>(std::cout);
    if (spec == "none" || spec.empty()) return nullptr;
    if (spec.rfind("file:", 0) == 0) return std::make_shared<FileSink>(std::filesystem::path(spec.substr(5)));
    throw std::invalid_argument("unknown event sink: " + std::string(spec));
}

}  // namespace fn::api
