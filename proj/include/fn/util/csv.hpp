#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fn::util {

struct CsvError : std::runtime_error {
    CsvError(std::size_t record, const std::string& what)
        : std::runtime_error(what), record(record) {}
    std::size_t record;
};

/// RFC 4180 reader: quoted fields, doubled quotes, CRLF or LF line ends.
/// Blank lines are skipped. A UTF-8 BOM at the start is ignored.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Quotes a field only when it contains a separator, quote or line break.
std::string csv_escape(std::string_view field);

std::string csv_line(const std::vector<std::string>& fields);

}  // namespace fn::util
