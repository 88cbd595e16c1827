#include "fn/util/csv.hpp"

namespace fn::util {

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool record_has_content = false;

    const auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
    };
    const auto end_record = [&] {
        end_field();
        if (record_has_content) records.push_back(std::move(record));
        record.clear();
        record_has_content = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty() || field_was_quoted) {
                    throw CsvError(records.size() + 1, "unexpected quote inside unquoted field");
                }
                in_quotes = true;
                field_was_quoted = true;
                record_has_content = true;
                break;
            case ',':
                end_field();
                record_has_content = true;
                break;
            case '\r':
                break;
            case '\n':
                end_record();
                break;
            default:
                field.push_back(c);
                record_has_content = true;
        }
    }
    if (in_quotes) throw CsvError(records.size() + 1, "unterminated quoted field");
    end_record();
    return records;
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        out += csv_escape(fields[i]);
    }
    out.push_back('\n');
    return out;
}

}  // namespace fn::util
