#include <algorithm>
#include <numeric>
#include <set>

#include "fn/evaluation.hpp"
#include "fn/simd/kernels.hpp"
#include "fn/util/csv.hpp"

namespace fn::evaluation {

namespace {

simd::BoxF64 to_simd(const BoundingBox& b) { return {b.x, b.y, b.width, b.height}; }

// Row-major preds × truths.
std::vector<double> iou_matrix(std::span<const Detection> preds, std::span<const Truth> truths) {
    const std::size_t n = truths.size();
    std::vector<double> x(n), y(n), w(n), h(n);
    for (std::size_t j = 0; j < n; ++j) {
        x[j] = truths[j].bbox.x;
        y[j] = truths[j].bbox.y;
        w[j] = truths[j].bbox.width;
        h[j] = truths[j].bbox.height;
    }
    const simd::BoxColumns cols{x, y, w, h};
    std::vector<double> out(preds.size() * n);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        simd::iou_one_to_many(to_simd(preds[i].bbox), cols, std::span<double>(out).subspan(i * n, n));
    }
    return out;
}

}  // namespace

double iou_box(const BoundingBox& a, const BoundingBox& b) { return simd::scalar::iou_pair(to_simd(a), to_simd(b)); }

MatchResult match_detections(std::span<const Detection> preds, std::span<const Truth> truths, double iou_threshold) {
    if (!(iou_threshold > 0 && iou_threshold <= 1)) {
        throw EvalError(ErrorKind::precondition, "iou threshold must be in (0, 1]");
    }
    const std::size_t n = truths.size();
    const auto iou = iou_matrix(preds, truths);
    std::vector<bool> claimed(n, false);

    // Best unclaimed truth for pred i, or n when none clears the threshold.
    auto best_for = [&](std::size_t i) {
        std::size_t best = n;
        for (std::size_t j = 0; j < n; ++j) {
            const double v = iou[i * n + j];
            if (claimed[j] || v < iou_threshold) continue;
            if (best == n || v > iou[i * n + best]) best = j;
        }
        return best;
    };

    std::vector<std::size_t> order(preds.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return preds[a].score > preds[b].score; });

    MatchResult result;
    std::vector<bool> matched(preds.size(), false);
    for (std::size_t g = 0; g < order.size();) {
        std::size_t end = g;
        while (end < order.size() && preds[order[end]].score == preds[order[g]].score) ++end;
        std::vector<std::size_t> group(order.begin() + g, order.begin() + end);
        while (!group.empty()) {
            std::size_t pick = group.size(), truth = n;
            for (std::size_t k = 0; k < group.size(); ++k) {
                const auto j = best_for(group[k]);
                if (j == n) continue;
                const double v = iou[group[k] * n + j];
                if (pick == group.size() || v > iou[group[pick] * n + truth]) {
                    pick = k;
                    truth = j;
                }
            }
            if (pick == group.size()) break;
            const auto p = group[pick];
            claimed[truth] = true;
            matched[p] = true;
            result.matches.push_back({p, truth, iou[p * n + truth]});
            group.erase(group.begin() + static_cast<std::ptrdiff_t>(pick));
        }
        g = end;
    }
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (!matched[i]) result.unmatched_preds.push_back(i);
    for (std::size_t j = 0; j < n; ++j)
        if (!claimed[j]) result.unmatched_truths.push_back(j);
    return result;
}

std::optional<std::size_t> ConfusionMatrix::index(std::string_view label) const {
    if (label == kBackground) return background();
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels.begin());
}

std::int64_t ConfusionMatrix::at(std::string_view truth, std::string_view pred) const {
    auto r = index(truth), c = index(pred);
    if (!r || !c) throw EvalError(ErrorKind::unknown_label, "unknown label");
    return counts[*r][*c];
}

std::int64_t ConfusionMatrix::row_sum(std::size_t row) const {
    return std::accumulate(counts[row].begin(), counts[row].end(), std::int64_t{0});
}

std::int64_t ConfusionMatrix::column_sum(std::size_t col) const {
    std::int64_t s = 0;
    for (const auto& row : counts) s += row[col];
    return s;
}

std::string ConfusionMatrix::to_csv() const {
    std::vector<std::string> header{"truth\\prediction"};
    header.insert(header.end(), labels.begin(), labels.end());
    header.emplace_back(kBackground);
    std::string out = util::csv_line(header);
    for (std::size_t r = 0; r < counts.size(); ++r) {
        std::vector<std::string> line{r == background() ? std::string(kBackground) : labels[r]};
        for (auto v : counts[r]) line.push_back(std::to_string(v));
        out += util::csv_line(line);
    }
    return out;
}

ConfusionMatrix confusion_matrix(const MatchResult& result, std::span<const Detection> preds,
                                 std::span<const Truth> truths, std::vector<std::string> labels) {
    ConfusionMatrix m;
    m.labels = std::move(labels);
    std::set<std::string_view> seen;
    for (const auto& l : m.labels) {
        if (l == kBackground || !seen.insert(l).second) {
            throw EvalError(ErrorKind::invalid, "label list must be unique and exclude background: " + l);
        }
    }
    const std::size_t size = m.labels.size() + 1;
    m.counts.assign(size, std::vector<std::int64_t>(size, 0));
    auto idx = [&](const std::string& label) {
        auto i = m.index(label);
        if (!i || *i == m.background()) throw EvalError(ErrorKind::unknown_label, "label not declared: " + label);
        return *i;
    };
    for (const auto& mt : result.matches) ++m.counts[idx(truths[mt.truth].label)][idx(preds[mt.pred].label)];
    for (auto p : result.unmatched_preds) ++m.counts[m.background()][idx(preds[p].label)];
    for (auto t : result.unmatched_truths) ++m.counts[idx(truths[t].label)][m.background()];
    return m;
}

std::vector<std::string> labels_of(std::span<const Detection> preds, std::span<const Truth> truths) {
    std::set<std::string> s;
    for (const auto& p : preds) s.insert(p.label);
    for (const auto& t : truths) s.insert(t.label);
    return {s.begin(), s.end()};
}

}  // namespace fn::evaluation
