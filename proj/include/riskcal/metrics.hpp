#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "riskcal/decision_rule.hpp"
#include "riskcal/detection_data.hpp"
#include "riskcal/error.hpp"

namespace riskcal {

struct MatchOptions {
    double iou_threshold = 0.5;
    bool class_aware = false;
};

// Intersection over union; 0 for disjoint boxes, 1 for identical ones.
double iou(const BBox& a, const BBox& b);

struct MatchResult {
    std::vector<bool> is_true_positive;               // per detection, input order
    std::vector<std::optional<std::size_t>> matched_gt;  // per detection
    std::vector<bool> gt_detected;                     // per ground-truth box

    std::size_t true_positives() const;
    std::size_t detected_ground_truth() const;
};

// Greedy matching. Detections are visited by descending objectness (input
// order on ties); each claims the still-unmatched ground truth of highest IOU
// at or above the threshold, the lower index winning IOU ties.
MatchResult match_detections(std::span<const ScoredDetection> detections,
                             std::span<const GroundTruthBox> ground_truth, const MatchOptions& options);

struct CutMetrics {
    std::size_t kept = 0;
    std::size_t true_positives = 0;
    std::size_t ground_truth = 0;
    std::size_t detected = 0;
    double precision = 1.0;  // 1 when nothing is kept
    double recall = 1.0;     // 1 when the cut has no ground truth
};

CutMetrics evaluate_cut(const CutRecord& cut, const DecisionRule& rule, const MatchOptions& options);
double cut_precision(const CutRecord& cut, const DecisionRule& rule, const MatchOptions& options);
double cut_recall(const CutRecord& cut, const DecisionRule& rule, const MatchOptions& options);

struct MeanMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

double f1_score(double precision, double recall);

// Unweighted means over cuts. Throws ValidationError on an empty dataset.
MeanMetrics mean_metrics(const DetectionDataset& dataset, const DecisionRule& rule, const MatchOptions& options);

// Precomputes the detection order and IOU candidates of every cut so that many
// rules can be evaluated on the same data without recomputing overlaps.
// Results are identical to evaluate_cut / mean_metrics. Holds pointers into
// `dataset`, which must outlive it.
class PreparedDataset {
public:
    PreparedDataset(const DetectionDataset& dataset, const MatchOptions& options);

    std::size_t size() const { return cuts_.size(); }
    CutMetrics evaluate_cut(std::size_t cut, const DecisionRule& rule) const;
    MeanMetrics evaluate(const DecisionRule& rule) const;

private:
    struct Candidate {
        std::size_t detection;            // index into the cut's detection list
        std::vector<std::size_t> gts;     // IOU-eligible ground truth, best first
    };
    struct Cut {
        const CutRecord* record;
        std::vector<Candidate> order;     // descending objectness
    };
    std::vector<Cut> cuts_;
};

struct PRPoint {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// One point per grid value; `base` supplies the rule family, lambda is swept.
std::vector<PRPoint> pr_curve(const DetectionDataset& dataset, const DecisionRule& base,
                              std::span<const double> grid, const MatchOptions& options);

void write_pr_csv(std::ostream& out, std::span<const PRPoint> points);

// All-point interpolated AP for one class. Detections count for the class they
// score highest; they are ranked by objectness. nullopt when the class has no
// ground truth.
std::optional<double> average_precision(const DetectionDataset& dataset, int class_id, double iou_threshold);

struct MapResult {
    std::vector<std::optional<double>> per_class;
    double mean = 0.0;
    std::vector<std::string> warnings;  // classes left out of the mean
};

MapResult mean_average_precision(const DetectionDataset& dataset, double iou_threshold);

class UnreachablePrecision : public Error {
public:
    using Error::Error;
};

// Smallest grid lambda whose calibration mean precision reaches `target`.
std::optional<double> find_naive_threshold(const DetectionDataset& dataset, double target,
                                           std::span<const double> grid, const MatchOptions& options);
// As above, throwing UnreachablePrecision when no grid value qualifies.
double naive_threshold(const DetectionDataset& dataset, double target, std::span<const double> grid,
                       const MatchOptions& options);

}  // namespace riskcal
