#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace fn::api {

namespace event_type {
inline constexpr std::string_view collection_created = "collection.created";
inline constexpr std::string_view images_added = "images.added";
inline constexpr std::string_view localizations_added = "localizations.added";
inline constexpr std::string_view localization_verified = "localization.verified";
inline constexpr std::string_view localization_rejected = "localization.rejected";
}  // namespace event_type

struct EventEnvelope {
    std::string type;
    std::string subject;    // uuid of the changed entity
    std::string timestamp;  // ISO8601 UTC
    std::string actor;

    /// One-line JSON object with sorted keys.
    std::string to_json() const;
    friend bool operator==(const EventEnvelope&, const EventEnvelope&) = default;
};

EventEnvelope parse_event(std::string_view json);

/// Destination for events. publish may throw; the bus absorbs failures.
class EventSink {
public:
    virtual ~EventSink() = default;
    virtual void publish(const EventEnvelope& e) = 0;
};

/// JSON lines on a stream.
class StreamSink final : public EventSink {
public:
    explicit StreamSink(std::ostream& out) : out_(out) {}
    void publish(const EventEnvelope& e) override;

private:
    std::mutex mu_;
    std::ostream& out_;
};

/// JSON lines appended to a file, flushed per event.
class FileSink final : public EventSink {
public:
    explicit FileSink(const std::filesystem::path& path);
    void publish(const EventEnvelope& e) override;

private:
    std::mutex mu_;
    std::ofstream out_;
};

/// Keeps events in memory, for tests and in-process consumers.
class CollectorSink final : public EventSink {
public:
    void publish(const EventEnvelope& e) override;
    std::vector<EventEnvelope> events() const;
    void clear();
    /// While set, publish throws.
    void fail(bool on) { failing_ = on; }

private:
    mutable std::mutex mu_;
    std::vector<EventEnvelope> events_;
    std::atomic<bool> failing_{false};
};

/// Fans out to one sink; a failed publish is logged and counted, never
/// propagated.
class EventBus {
public:
    explicit EventBus(std::shared_ptr<EventSink> sink) : sink_(std::move(sink)) {}

    void publish(std::string_view type, std::string subject, std::string actor) noexcept;
    std::size_t dropped() const { return dropped_; }

private:
    std::shared_ptr<EventSink> sink_;
    std::atomic<std::size_t> dropped_{0};
};

/// "stdout", "file:<path>" or "none".
std::shared_ptr<EventSink> make_sink(std::string_view spec);

}  // namespace fn::api
