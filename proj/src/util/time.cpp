#include "fn/util/time.hpp"

#include <chrono>
#include <cstdio>

namespace fn::util {
namespace {

// Howard Hinnant's civil-date algorithms.
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

constexpr void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y += m <= 2;
}

constexpr bool is_leap(std::int64_t y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

constexpr unsigned days_in_month(std::int64_t y, unsigned m) {
    constexpr unsigned table[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && is_leap(y) ? 29 : table[m - 1];
}

class Cursor {
public:
    explicit Cursor(std::string_view s) : s_(s) {}
    bool done() const { return pos_ == s_.size(); }
    char peek() const { return done() ? '\0' : s_[pos_]; }
    bool eat(char c) {
        if (peek() != c) return false;
        ++pos_;
        return true;
    }
    std::optional<int> digits(int n) {
        if (pos_ + n > s_.size()) return std::nullopt;
        int v = 0;
        for (int i = 0; i < n; ++i) {
            char c = s_[pos_ + i];
            if (c < '0' || c > '9') return std::nullopt;
            v = v * 10 + (c - '0');
        }
        pos_ += n;
        return v;
    }
    bool is_digit() const { return peek() >= '0' && peek() <= '9'; }
    void advance() { ++pos_; }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

std::optional<Timestamp> parse_iso8601(std::string_view text) {
    Cursor c(text);
    auto year = c.digits(4);
    if (!year || !c.eat('-')) return std::nullopt;
    auto month = c.digits(2);
    if (!month || !c.eat('-')) return std::nullopt;
    auto day = c.digits(2);
    if (!day) return std::nullopt;
    if (*month < 1 || *month > 12) return std::nullopt;
    if (*day < 1 || static_cast<unsigned>(*day) > days_in_month(*year, static_cast<unsigned>(*month)))
        return std::nullopt;

    int hour = 0, minute = 0, second = 0, millis = 0;
    std::int64_t offset_minutes = 0;
    if (!c.done()) {
        if (!c.eat('T') && !c.eat(' ')) return std::nullopt;
        auto h = c.digits(2);
        if (!h || !c.eat(':')) return std::nullopt;
        auto mi = c.digits(2);
        if (!mi) return std::nullopt;
        hour = *h;
        minute = *mi;
        if (c.eat(':')) {
            auto sec = c.digits(2);
            if (!sec) return std::nullopt;
            second = *sec;
            if (c.eat('.') || c.eat(',')) {
                if (!c.is_digit()) return std::nullopt;
                int scale = 100;
                while (c.is_digit()) {
                    millis += (c.peek() - '0') * scale;
                    scale /= 10;
                    c.advance();
                }
            }
        }
        if (hour > 23 || minute > 59 || second > 59) return std::nullopt;
        if (c.eat('Z')) {
        } else if (c.peek() == '+' || c.peek() == '-') {
            const int sign = c.peek() == '-' ? -1 : 1;
            c.advance();
            auto oh = c.digits(2);
            if (!oh) return std::nullopt;
            c.eat(':');
            auto om = c.digits(2);
            if (!om || *oh > 23 || *om > 59) return std::nullopt;
            offset_minutes = sign * (*oh * 60 + *om);
        }
        if (!c.done()) return std::nullopt;
    }

    const std::int64_t days = days_from_civil(*year, static_cast<unsigned>(*month), static_cast<unsigned>(*day));
    const std::int64_t secs = days * 86400 + hour * 3600 + minute * 60 + second - offset_minutes * 60;
    return Timestamp{secs * 1000 + millis};
}

std::string format_iso8601(Timestamp ts) {
    std::int64_t ms = ts.epoch_ms;
    std::int64_t secs = ms >= 0 ? ms / 1000 : -((-ms + 999) / 1000);
    const int millis = static_cast<int>(ms - secs * 1000);
    std::int64_t days = secs >= 0 ? secs / 86400 : -((-secs + 86399) / 86400);
    const std::int64_t sod = secs - days * 86400;
    std::int64_t y = 0;
    unsigned m = 0, d = 0;
    civil_from_days(days, y, m, d);
    char buf[40];
    if (millis == 0) {
        std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02d:%02d:%02dZ", static_cast<long long>(y), m, d,
                      static_cast<int>(sod / 3600), static_cast<int>(sod / 60 % 60), static_cast<int>(sod % 60));
    } else {
        std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<long long>(y), m, d,
                      static_cast<int>(sod / 3600), static_cast<int>(sod / 60 % 60), static_cast<int>(sod % 60),
                      millis);
    }
    return buf;
}

Timestamp now_utc() {
    using namespace std::chrono;
    return Timestamp{duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count()};
}

}  // namespace fn::util
