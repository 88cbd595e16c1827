#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fn/catalog_types.hpp"

namespace fn::evaluation {

enum class ErrorKind { invalid, unknown_label, unordered, precondition };

class EvalError : public std::runtime_error {
public:
    EvalError(ErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

using catalog::BoundingBox;

struct Detection {
    BoundingBox bbox;
    std::string label;
    double score = 1;
};

struct Truth {
    BoundingBox bbox;
    std::string label;
};

double iou_box(const BoundingBox& a, const BoundingBox& b);

struct Match {
    std::size_t pred;
    std::size_t truth;
    double iou;
};

struct MatchResult {
    std::vector<Match> matches;  // in claim order
    std::vector<std::size_t> unmatched_preds;
    std::vector<std::size_t> unmatched_truths;
};

/// Greedy one-to-one matching, label-agnostic. Predictions claim in order of
/// descending score; equal scores go to the prediction with the higher
/// available IoU, then the earlier one. Each claims the unclaimed truth of
/// highest IoU >= threshold, the earlier truth on ties.
MatchResult match_detections(std::span<const Detection> preds, std::span<const Truth> truths,
                             double iou_threshold = 0.5);

inline constexpr std::string_view kBackground = "background";

/// counts[truth][prediction] over labels plus a trailing background index.
/// The background row holds unmatched predictions, the background column
/// unmatched truths.
struct ConfusionMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<std::int64_t>> counts;

    std::size_t background() const { return labels.size(); }
    std::optional<std::size_t> index(std::string_view label) const;
    std::int64_t at(std::string_view truth, std::string_view pred) const;
    std::int64_t row_sum(std::size_t row) const;
    std::int64_t column_sum(std::size_t col) const;

    /// Header `truth\prediction,<labels>,background`, one row per truth label
    /// then the background row.
    std::string to_csv() const;
};

/// Throws EvalError{unknown_label} for a label missing from `labels`.
ConfusionMatrix confusion_matrix(const MatchResult& result, std::span<const Detection> preds,
                                 std::span<const Truth> truths, std::vector<std::string> labels);

/// Sorted union of every label appearing in preds and truths.
std::vector<std::string> labels_of(std::span<const Detection> preds, std::span<const Truth> truths);

struct Segment {
    double start = 0;
    double end = 0;
    double duration() const { return end - start; }
    friend bool operator==(const Segment&, const Segment&) = default;
};

/// Sorted, disjoint, non-touching. Throws EvalError{invalid} for end <= start.
std::vector<Segment> normalize(std::vector<Segment> segments);

double total_duration(std::span<const Segment> normalized);

struct Frame {
    double time_s = 0;
    std::vector<Detection> detections;
};

struct ActivitySignal {
    std::vector<double> times;
    std::vector<bool> active;
};

/// A frame is active when any detection scores >= threshold. Throws
/// EvalError{unordered} unless frame times strictly increase.
ActivitySignal activity_signal(std::span<const Frame> frames, double score_threshold = 0.5);

/// Closing with a window of `window_s` seconds: an inactive stretch between
/// two active frames less than window_s apart becomes active. Each run of
/// consecutive active frames (after closing) spans
/// its first to last active frame time. A run of one frame spans half the
/// interval to each neighbouring frame (the available one at either end, 0.5 s
/// each way for a one-frame signal).
std::vector<Segment> smooth_and_segment(const ActivitySignal& signal, double window_s = 10);

/// The same closing applied to a segment list: segments separated by less
/// than window_s merge.
std::vector<Segment> close_segments(std::vector<Segment> segments, double window_s);

double intersection_duration(std::span<const Segment> a, std::span<const Segment> b);
double union_duration(std::span<const Segment> a, std::span<const Segment> b);

/// Intersection over union of activity time; 1 when both are empty.
double temporal_iou(std::span<const Segment> a, std::span<const Segment> b);

/// Fraction of truth segments overlapping some prediction by a positive
/// duration; nullopt when truth is empty.
std::optional<double> event_recall(std::span<const Segment> pred, std::span<const Segment> truth);

/// 1 - flagged/total. Throws EvalError{precondition} when total <= 0 or the
/// flagged duration exceeds it.
double effort_reduction(std::span<const Segment> pred, double total_duration_s);

/// Timeline covered by the frame clock, each frame owning half the interval to
/// each neighbour.
double signal_duration(const ActivitySignal& signal);

struct VideoActivity {
    std::vector<Segment> predicted;
    std::vector<Segment> truth;
    double duration_s = 0;
    double iou = 1;
    std::optional<double> recall;
    double effort_reduction = 1;
};

struct ActivityReport {
    std::vector<VideoActivity> videos;
    double mean_iou = 1;    // averaged over videos
    double pooled_iou = 1;  // summed intersections over summed unions
    std::optional<double> pooled_recall;
    double pooled_effort_reduction = 1;
};

struct VideoInput {
    ActivitySignal signal;
    std::vector<Segment> truth;
    /// Defaults to signal_duration(signal).
    std::optional<double> duration_s;
};

/// Videos are independent and evaluated in parallel.
ActivityReport evaluate_activity(std::span<const VideoInput> videos, double window_s = 10);

/// `frame_time_s,x,y,width,height,label,score`, headers matched without
/// case. Score may be omitted (or the column absent) for ground truth and
/// then reads as 1. A row with only the time filled declares a frame with no
/// detections. Rows group into frames by time, returned in time order.
/// Throws EvalError{invalid} naming the row.
std::vector<Frame> parse_detection_frames(std::string_view csv);

/// Matches within each frame time and sums the per-frame matrices. Predictions
/// scoring below score_threshold are dropped first. Labels default to
/// labels_of over every frame.
ConfusionMatrix evaluate_boxes(std::span<const Frame> preds, std::span<const Frame> truths,
                               double iou_threshold = 0.5, double score_threshold = 0.5,
                               std::optional<std::vector<std::string>> labels = std::nullopt);

/// `start_s,end_s`, normalized.
std::vector<Segment> parse_segments(std::string_view csv);

}  // namespace fn::evaluation
