#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace fn::util {

/// Milliseconds since the Unix epoch, UTC.
struct Timestamp {
    std::int64_t epoch_ms = 0;
    friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

/// Accepts YYYY-MM-DD and YYYY-MM-DDTHH:MM[:SS[.fff…]] with an optional
/// `Z` or ±HH[:]MM offset. A space may stand in for `T`. No offset means UTC.
std::optional<Timestamp> parse_iso8601(std::string_view text);

/// Canonical UTC form: YYYY-MM-DDTHH:MM:SSZ, with .mmm only when nonzero.
std::string format_iso8601(Timestamp ts);

Timestamp now_utc();

}  // namespace fn::util
