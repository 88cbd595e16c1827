#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "fn/evaluation.hpp"

namespace fn::evaluation {

std::vector<Segment> normalize(std::vector<Segment> segments) {
    for (const auto& s : segments) {
        if (!(s.end > s.start)) throw EvalError(ErrorKind::invalid, "segment end must exceed start");
    }
    std::sort(segments.begin(), segments.end(),
              [](const Segment& a, const Segment& b) { return a.start < b.start || (a.start == b.start && a.end < b.end); });
    std::vector<Segment> out;
    for (const auto& s : segments) {
        if (!out.empty() && s.start <= out.back().end) {
            out.back().end = std::max(out.back().end, s.end);
        } else {
            out.push_back(s);
        }
    }
    return out;
}

double total_duration(std::span<const Segment> normalized) {
    double t = 0;
    for (const auto& s : normalized) t += s.duration();
    return t;
}

ActivitySignal activity_signal(std::span<const Frame> frames, double score_threshold) {
    ActivitySignal sig;
    sig.times.reserve(frames.size());
    sig.active.reserve(frames.size());
    for (const auto& f : frames) {
        if (!sig.times.empty() && !(f.time_s > sig.times.back())) {
            throw EvalError(ErrorKind::unordered, "frame times must strictly increase");
        }
        sig.times.push_back(f.time_s);
        sig.active.push_back(std::any_of(f.detections.begin(), f.detections.end(),
                                         [&](const Detection& d) { return d.score >= score_threshold; }));
    }
    return sig;
}

std::vector<Segment> smooth_and_segment(const ActivitySignal& signal, double window_s) {
    if (!(window_s > 0)) throw EvalError(ErrorKind::precondition, "window must be positive");
    const auto& t = signal.times;
    if (signal.active.size() != t.size()) throw EvalError(ErrorKind::invalid, "signal arrays differ in length");
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (!(t[i] > t[i - 1])) throw EvalError(ErrorKind::unordered, "frame times must strictly increase");
    }
    const std::size_t n = t.size();
    auto half_before = [&](std::size_t i) {
        if (i > 0) return (t[i] - t[i - 1]) / 2;
        return n > 1 ? (t[1] - t[0]) / 2 : 0.5;
    };
    auto half_after = [&](std::size_t i) {
        if (i + 1 < n) return (t[i + 1] - t[i]) / 2;
        return n > 1 ? (t[i] - t[i - 1]) / 2 : 0.5;
    };

    std::vector<Segment> out;
    std::size_t first = n, last = n;
    auto emit = [&] {
        if (first == last) {
            out.push_back({t[first] - half_before(first), t[first] + half_after(first)});
        } else {
            out.push_back({t[first], t[last]});
        }
    };
    for (std::size_t i = 0; i < n; ++i) {
        if (!signal.active[i]) continue;
        if (first == n) {
            first = last = i;
        } else if (i == last + 1 || t[i] - t[last] < window_s) {
            last = i;
        } else {
            emit();
            first = last = i;
        }
    }
    if (first != n) emit();
    return normalize(std::move(out));
}

std::vector<Segment> close_segments(std::vector<Segment> segments, double window_s) {
    if (!(window_s > 0)) throw EvalError(ErrorKind::precondition, "window must be positive");
    auto norm = normalize(std::move(segments));
    std::vector<Segment> out;
    for (const auto& s : norm) {
        if (!out.empty() && s.start - out.back().end < window_s) {
            out.back().end = s.end;
        } else {
            out.push_back(s);
        }
    }
    return out;
}

double intersection_duration(std::span<const Segment> a, std::span<const Segment> b) {
    double total = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double lo = std::max(a[i].start, b[j].start);
        const double hi = std::min(a[i].end, b[j].end);
        if (hi > lo) total += hi - lo;
        if (a[i].end < b[j].end) {
            ++i;
        } else {
            ++j;
        }
    }
    return total;
}

double union_duration(std::span<const Segment> a, std::span<const Segment> b) {
    return total_duration(a) + total_duration(b) - intersection_duration(a, b);
}

double temporal_iou(std::span<const Segment> a, std::span<const Segment> b) {
    const double u = union_duration(a, b);
    if (u <= 0) return 1;
    return std::clamp(intersection_duration(a, b) / u, 0.0, 1.0);
}

namespace {

std::size_t overlapped(std::span<const Segment> pred, std::span<const Segment> truth) {
    std::size_t hit = 0;
    for (const auto& tr : truth) {
        for (const auto& p : pred) {
            if (std::min(p.end, tr.end) > std::max(p.start, tr.start)) {
                ++hit;
                break;
            }
        }
    }
    return hit;
}

}  // namespace

std::optional<double> event_recall(std::span<const Segment> pred, std::span<const Segment> truth) {
    if (truth.empty()) return std::nullopt;
    return static_cast<double>(overlapped(pred, truth)) / static_cast<double>(truth.size());
}

double effort_reduction(std::span<const Segment> pred, double total_duration_s) {
    if (!(total_duration_s > 0)) throw EvalError(ErrorKind::precondition, "total duration must be positive");
    const double flagged = total_duration(pred);
    if (flagged > total_duration_s * (1 + 1e-12)) {
        throw EvalError(ErrorKind::precondition, "flagged duration exceeds the total");
    }
    return std::max(0.0, (total_duration_s - flagged) / total_duration_s);
}

double signal_duration(const ActivitySignal& signal) {
    const auto& t = signal.times;
    if (t.empty()) return 0;
    if (t.size() == 1) return 1;
    const std::size_t n = t.size();
    return (t[n - 1] - t[0]) + (t[1] - t[0]) / 2 + (t[n - 1] - t[n - 2]) / 2;
}

ActivityReport evaluate_activity(std::span<const VideoInput> videos, double window_s) {
    ActivityReport report;
    report.videos.resize(videos.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
        for (std::size_t i; (i = next++) < videos.size();) {
            try {
                auto& v = report.videos[i];
                v.predicted = smooth_and_segment(videos[i].signal, window_s);
                v.truth = normalize(videos[i].truth);
                v.duration_s = videos[i].duration_s.value_or(signal_duration(videos[i].signal));
                v.iou = temporal_iou(v.predicted, v.truth);
                v.recall = event_recall(v.predicted, v.truth);
                v.effort_reduction = effort_reduction(v.predicted, v.duration_s);
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t threads =
        std::min<std::size_t>(videos.size(), std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::jthread> pool;
    for (std::size_t k = 1; k < threads; ++k) pool.emplace_back(worker);
    worker();
    pool.clear();
    if (failure) std::rethrow_exception(failure);

    double inter = 0, uni = 0, flagged = 0, total = 0, iou_sum = 0;
    std::size_t hits = 0, truths = 0;
    for (const auto& v : report.videos) {
        inter += intersection_duration(v.predicted, v.truth);
        uni += union_duration(v.predicted, v.truth);
        flagged += total_duration(v.predicted);
        total += v.duration_s;
        iou_sum += v.iou;
        hits += overlapped(v.predicted, v.truth);
        truths += v.truth.size();
    }
    if (!report.videos.empty()) report.mean_iou = iou_sum / static_cast<double>(report.videos.size());
    if (uni > 0) report.pooled_iou = std::clamp(inter / uni, 0.0, 1.0);
    if (truths > 0) report.pooled_recall = static_cast<double>(hits) / static_cast<double>(truths);
    if (total > 0) report.pooled_effort_reduction = std::max(0.0, (total - flagged) / total);
    return report;
}

}  // namespace fn::evaluation
