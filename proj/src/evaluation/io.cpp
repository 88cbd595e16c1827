#include <algorithm>
#include <array>
#include <map>

#include "fn/evaluation.hpp"
#include "fn/util/csv.hpp"
#include "fn/util/strings.hpp"

namespace fn::evaluation {

namespace {

using Rows = std::vector<std::vector<std::string>>;

Rows read_rows(std::string_view csv) {
    try {
        auto rows = util::parse_csv(csv);
        if (rows.empty()) throw EvalError(ErrorKind::invalid, "row 1: missing header");
        return rows;
    } catch (const util::CsvError& e) {
        throw EvalError(ErrorKind::invalid, "row " + std::to_string(e.record + 1) + ": " + e.what());
    }
}

std::optional<std::size_t> column(const std::vector<std::string>& header, std::string_view name) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (util::iequals(util::trim(header[i]), name)) return i;
    return std::nullopt;
}

[[noreturn]] void fail(std::size_t row, std::string_view field, std::string_view message) {
    throw EvalError(ErrorKind::invalid,
                    "row " + std::to_string(row) + ", " + std::string(field) + ": " + std::string(message));
}

double number(const std::vector<std::string>& r, std::size_t col, std::size_t row, std::string_view field) {
    auto v = util::parse_double(util::trim(r[col]));
    if (!v) fail(row, field, "not a number");
    return *v;
}

}  // namespace

std::vector<Frame> parse_detection_frames(std::string_view csv) {
    const auto rows = read_rows(csv);
    const auto& header = rows[0];
    std::array<std::size_t, 6> cols{};
    const std::array<std::string_view, 6> names{"frame_time_s", "x", "y", "width", "height", "label"};
    for (std::size_t k = 0; k < names.size(); ++k) {
        auto c = column(header, names[k]);
        if (!c) fail(1, names[k], "missing column");
        cols[k] = *c;
    }
    const auto score_col = column(header, "score");

    std::map<double, Frame> frames;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const std::size_t row = i + 1;
        if (r.size() != header.size()) fail(row, "columns", "expected " + std::to_string(header.size()) + " fields");
        const double t = number(r, cols[0], row, "frame_time_s");
        auto& frame = frames[t];
        frame.time_s = t;

        bool empty = score_col ? util::trim(r[*score_col]).empty() : true;
        for (std::size_t k = 1; k < cols.size(); ++k) empty = empty && util::trim(r[cols[k]]).empty();
        if (empty) continue;

        Detection d;
        d.bbox = {number(r, cols[1], row, "x"), number(r, cols[2], row, "y"), number(r, cols[3], row, "width"),
                  number(r, cols[4], row, "height")};
        if (!(d.bbox.width > 0)) fail(row, "width", "must be positive");
        if (!(d.bbox.height > 0)) fail(row, "height", "must be positive");
        d.label = std::string(util::trim(r[cols[5]]));
        if (d.label.empty()) fail(row, "label", "empty");
        if (score_col && !util::trim(r[*score_col]).empty()) {
            d.score = number(r, *score_col, row, "score");
            if (d.score < 0 || d.score > 1) fail(row, "score", "outside [0, 1]");
        }
        frame.detections.push_back(std::move(d));
    }
    std::vector<Frame> out;
    out.reserve(frames.size());
    for (auto& [t, f] : frames) out.push_back(std::move(f));
    return out;
}

ConfusionMatrix evaluate_boxes(std::span<const Frame> preds, std::span<const Frame> truths, double iou_threshold,
                               double score_threshold, std::optional<std::vector<std::string>> labels) {
    std::map<double, std::pair<std::vector<Detection>, std::vector<Truth>>> by_time;
    for (const auto& f : preds) {
        auto& slot = by_time[f.time_s].first;
        for (const auto& d : f.detections)
            if (d.score >= score_threshold) slot.push_back(d);
    }
    for (const auto& f : truths) {
        auto& slot = by_time[f.time_s].second;
        for (const auto& d : f.detections) slot.push_back({d.bbox, d.label});
    }
    if (!labels) {
        std::vector<Detection> all_p;
        std::vector<Truth> all_t;
        for (const auto& [t, pt] : by_time) {
            all_p.insert(all_p.end(), pt.first.begin(), pt.first.end());
            all_t.insert(all_t.end(), pt.second.begin(), pt.second.end());
        }
        labels = labels_of(all_p, all_t);
    }
    ConfusionMatrix total;
    total.labels = *labels;
    total.counts.assign(labels->size() + 1, std::vector<std::int64_t>(labels->size() + 1, 0));
    for (const auto& [t, pt] : by_time) {
        const auto m = confusion_matrix(match_detections(pt.first, pt.second, iou_threshold), pt.first, pt.second,
                                        *labels);
        for (std::size_t r = 0; r < m.counts.size(); ++r)
            for (std::size_t c = 0; c < m.counts.size(); ++c) total.counts[r][c] += m.counts[r][c];
    }
    return total;
}

std::vector<Segment> parse_segments(std::string_view csv) {
    const auto rows = read_rows(csv);
    auto start = column(rows[0], "start_s");
    auto end = column(rows[0], "end_s");
    if (!start) fail(1, "start_s", "missing column");
    if (!end) fail(1, "end_s", "missing column");
    std::vector<Segment> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const std::size_t row = i + 1;
        if (rows[i].size() != rows[0].size()) fail(row, "columns", "wrong field count");
        Segment s{number(rows[i], *start, row, "start_s"), number(rows[i], *end, row, "end_s")};
        if (!(s.end > s.start)) fail(row, "end_s", "must exceed start_s");
        out.push_back(s);
    }
    return normalize(std::move(out));
}

}  // namespace fn::evaluation
