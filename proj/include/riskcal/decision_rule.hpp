#pragma once

#include <string>
#include <vector>

#include "riskcal/detection_data.hpp"

namespace riskcal {

enum class RuleKind {
    ObjectnessOnly,        // c >= lambda
    ObjectnessDepth,       // c >= lambda and depth <= mu
    ObjectnessClassifier,  // c >= lambda and aux_score >= mu
};

std::string to_string(RuleKind kind);
RuleKind parse_rule_kind(const std::string& name);  // "objectness", "objectness-depth", "objectness-classifier"

// The value of mu that makes the second criterion keep every box.
double vacuous_mu(RuleKind kind);

// Post-processing operator applied to the raw detector output of one cut.
struct DecisionRule {
    RuleKind kind = RuleKind::ObjectnessOnly;
    double lambda = 0.0;
    double mu = 1.0;

    static DecisionRule objectness(double lambda);
    static DecisionRule objectness_depth(double lambda, double mu);
    static DecisionRule objectness_classifier(double lambda, double mu);

    bool needs_depth() const { return kind == RuleKind::ObjectnessDepth; }
    bool needs_aux_score() const { return kind == RuleKind::ObjectnessClassifier; }
    bool is_two_parameter() const { return kind != RuleKind::ObjectnessOnly; }

    // Throws ValidationError when a field the rule reads is absent.
    bool keeps(const ScoredDetection& det) const;

    bool operator==(const DecisionRule&) const = default;
};

std::string to_string(const DecisionRule& rule);

// Throws ValidationError naming the first cut whose detections lack a field the rule reads.
void require_fields(const DetectionDataset& dataset, RuleKind kind);

// The detections of `cut` kept by `rule`, in their original order.
std::vector<ScoredDetection> apply_rule(const CutRecord& cut, const DecisionRule& rule);

}  // namespace riskcal
