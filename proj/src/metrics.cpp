#include "riskcal/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

#include "riskcal/format.hpp"

namespace riskcal {

double iou(const BBox& a, const BBox& b) {
    const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    const double inter = ix * iy;
    if (inter <= 0.0) return 0.0;
    const double uni = a.area() + b.area() - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

std::size_t MatchResult::true_positives() const {
    return static_cast<std::size_t>(std::count(is_true_positive.begin(), is_true_positive.end(), true));
}

std::size_t MatchResult::detected_ground_truth() const {
    return static_cast<std::size_t>(std::count(gt_detected.begin(), gt_detected.end(), true));
}

namespace {

std::vector<std::size_t> objectness_order(std::span<const ScoredDetection> dets) {
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].objectness > dets[b].objectness; });
    return order;
}

// Ground truth a detection may claim, best IOU first, lower index on ties.
std::vector<std::size_t> candidates_for(const ScoredDetection& det, std::span<const GroundTruthBox> gts,
                                        const MatchOptions& options) {
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t g = 0; g < gts.size(); ++g) {
        if (options.class_aware && det.predicted_class() != gts[g].class_label) continue;
        const double v = iou(det.box, gts[g].box);
        if (v >= options.iou_threshold) scored.emplace_back(v, g);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        return std::tie(b.first, a.second) < std::tie(a.first, b.second);
    });
    std::vector<std::size_t> out;
    out.reserve(scored.size());
    for (const auto& s : scored) out.push_back(s.second);
    return out;
}

CutMetrics finish(std::size_t kept, std::size_t tp, std::size_t gt, std::size_t detected) {
    CutMetrics m;
    m.kept = kept;
    m.true_positives = tp;
    m.ground_truth = gt;
    m.detected = detected;
    m.precision = kept == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(kept);
    m.recall = gt == 0 ? 1.0 : static_cast<double>(detected) / static_cast<double>(gt);
    return m;
}

}  // namespace

MatchResult match_detections(std::span<const ScoredDetection> detections,
                             std::span<const GroundTruthBox> ground_truth, const MatchOptions& options) {
    MatchResult r;
    r.is_true_positive.assign(detections.size(), false);
    r.matched_gt.assign(detections.size(), std::nullopt);
    r.gt_detected.assign(ground_truth.size(), false);
    for (std::size_t d : objectness_order(detections)) {
        for (std::size_t g : candidates_for(detections[d], ground_truth, options)) {
            if (r.gt_detected[g]) continue;
            r.gt_detected[g] = true;
            r.is_true_positive[d] = true;
            r.matched_gt[d] = g;
            break;
        }
    }
    return r;
}

CutMetrics evaluate_cut(const CutRecord& cut, const DecisionRule& rule, const MatchOptions& options) {
    const auto kept = apply_rule(cut, rule);
    const auto m = match_detections(kept, cut.ground_truth, options);
    return finish(kept.size(), m.true_positives(), cut.ground_truth.size(), m.detected_ground_truth());
}

double cut_precision(const CutRecord& cut, const DecisionRule& rule, const MatchOptions& options) {
    return evaluate_cut(cut, rule, options).precision;
}

double cut_recall(const CutRecord& cut, const DecisionRule& rule, const MatchOptions& options) {
    return evaluate_cut(cut, rule, options).recall;
}

double f1_score(double precision, double recall) {
    const double s = precision + recall;
    return s <= 0.0 ? 0.0 : 2.0 * precision * recall / s;
}

MeanMetrics mean_metrics(const DetectionDataset& dataset, const DecisionRule& rule, const MatchOptions& options) {
    if (dataset.cuts.empty()) throw ValidationError("mean metrics of an empty dataset");
    double p = 0.0;
    double r = 0.0;
    for (const auto& cut : dataset.cuts) {
        const auto m = evaluate_cut(cut, rule, options);
        p += m.precision;
        r += m.recall;
    }
    const double n = static_cast<double>(dataset.cuts.size());
    return {p / n, r / n, f1_score(p / n, r / n)};
}

PreparedDataset::PreparedDataset(const DetectionDataset& dataset, const MatchOptions& options) {
    cuts_.reserve(dataset.cuts.size());
    for (const auto& cut : dataset.cuts) {
        Cut c{&cut, {}};
        for (std::size_t d : objectness_order(cut.detections)) {
            c.order.push_back({d, candidates_for(cut.detections[d], cut.ground_truth, options)});
        }
        cuts_.push_back(std::move(c));
    }
}

CutMetrics PreparedDataset::evaluate_cut(std::size_t index, const DecisionRule& rule) const {
    const Cut& cut = cuts_.at(index);
    const auto& gts = cut.record->ground_truth;
    std::vector<char> claimed(gts.size(), 0);
    std::size_t kept = 0;
    std::size_t tp = 0;
    for (const auto& cand : cut.order) {
        if (!rule.keeps(cut.record->detections[cand.detection])) continue;
        ++kept;
        for (std::size_t g : cand.gts) {
            if (claimed[g]) continue;
            claimed[g] = 1;
            ++tp;
            break;
        }
    }
    return finish(kept, tp, gts.size(), tp);
}

MeanMetrics PreparedDataset::evaluate(const DecisionRule& rule) const {
    if (cuts_.empty()) throw ValidationError("mean metrics of an empty dataset");
    double p = 0.0;
    double r = 0.0;
    for (std::size_t i = 0; i < cuts_.size(); ++i) {
        const auto m = evaluate_cut(i, rule);
        p += m.precision;
        r += m.recall;
    }
    const double n = static_cast<double>(cuts_.size());
    return {p / n, r / n, f1_score(p / n, r / n)};
}

std::vector<PRPoint> pr_curve(const DetectionDataset& dataset, const DecisionRule& base,
                              std::span<const double> grid, const MatchOptions& options) {
    if (grid.empty()) throw ValidationError("pr_curve needs a non-empty grid");
    if (!std::is_sorted(grid.begin(), grid.end())) throw ValidationError("pr_curve grid must be sorted ascending");
    const PreparedDataset prepared(dataset, options);
    std::vector<PRPoint> out;
    out.reserve(grid.size());
    for (double lambda : grid) {
        DecisionRule rule = base;
        rule.lambda = lambda;
        const auto m = prepared.evaluate(rule);
        out.push_back({lambda, m.precision, m.recall, m.f1});
    }
    return out;
}

void write_pr_csv(std::ostream& out, std::span<const PRPoint> points) {
    out << "threshold,precision,recall,f1\n";
    for (const auto& p : points) {
        out << format_number(p.threshold) << ',' << format_number(p.precision) << ',' << format_number(p.recall)
            << ',' << format_number(p.f1) << '\n';
    }
}

std::optional<double> average_precision(const DetectionDataset& dataset, int class_id, double iou_threshold) {
    struct Ranked {
        double score;
        std::size_t cut;
        std::size_t det;
        bool tp;
    };
    std::vector<Ranked> ranked;
    std::size_t total_gt = 0;
    const MatchOptions options{iou_threshold, true};

    for (std::size_t c = 0; c < dataset.cuts.size(); ++c) {
        const auto& cut = dataset.cuts[c];
        for (const auto& gt : cut.ground_truth) total_gt += gt.class_label == class_id ? 1 : 0;
        std::vector<ScoredDetection> dets;
        std::vector<std::size_t> origin;
        for (std::size_t d = 0; d < cut.detections.size(); ++d) {
            if (cut.detections[d].predicted_class() != class_id) continue;
            dets.push_back(cut.detections[d]);
            origin.push_back(d);
        }
        const auto m = match_detections(dets, cut.ground_truth, options);
        for (std::size_t i = 0; i < dets.size(); ++i) {
            ranked.push_back({dets[i].objectness, c, origin[i], static_cast<bool>(m.is_true_positive[i])});
        }
    }
    if (total_gt == 0) return std::nullopt;

    std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) { return a.score > b.score; });

    std::vector<double> precision;
    std::vector<double> recall;
    std::size_t tp = 0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        tp += ranked[i].tp ? 1 : 0;
        precision.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
        recall.push_back(static_cast<double>(tp) / static_cast<double>(total_gt));
    }
    // Precision envelope: non-increasing from the right.
    for (std::size_t i = precision.size(); i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);

    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < precision.size(); ++i) {
        ap += (recall[i] - prev_recall) * precision[i];
        prev_recall = recall[i];
    }
    return ap;
}

MapResult mean_average_precision(const DetectionDataset& dataset, double iou_threshold) {
    MapResult r;
    double sum = 0.0;
    int counted = 0;
    for (int k = 0; k < dataset.num_classes; ++k) {
        auto ap = average_precision(dataset, k, iou_threshold);
        r.per_class.push_back(ap);
        if (ap) {
            sum += *ap;
            ++counted;
        } else {
            r.warnings.push_back("class " + std::to_string(k) + " has no ground truth; excluded from mAP");
        }
    }
    if (counted == 0) throw ValidationError("mAP undefined: no class has ground truth");
    r.mean = sum / counted;
    return r;
}

std::optional<double> find_naive_threshold(const DetectionDataset& dataset, double target,
                                           std::span<const double> grid, const MatchOptions& options) {
    if (grid.empty()) throw ValidationError("naive threshold needs a non-empty grid");
    if (!std::is_sorted(grid.begin(), grid.end())) throw ValidationError("naive grid must be sorted ascending");
    const PreparedDataset prepared(dataset, options);
    for (double lambda : grid) {
        if (prepared.evaluate(DecisionRule::objectness(lambda)).precision >= target) return lambda;
    }
    return std::nullopt;
}

double naive_threshold(const DetectionDataset& dataset, double target, std::span<const double> grid,
                       const MatchOptions& options) {
    auto t = find_naive_threshold(dataset, target, grid, options);
    if (!t) throw UnreachablePrecision("unreachable precision " + format_number(target) + " on the naive grid");
    return *t;
}

}  // namespace riskcal
