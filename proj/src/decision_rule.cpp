#include "riskcal/decision_rule.hpp"

#include "riskcal/error.hpp"
#include "riskcal/format.hpp"

namespace riskcal {

std::string to_string(RuleKind kind) {
    switch (kind) {
        case RuleKind::ObjectnessOnly: return "objectness";
        case RuleKind::ObjectnessDepth: return "objectness-depth";
        case RuleKind::ObjectnessClassifier: return "objectness-classifier";
    }
    return "unknown";
}

RuleKind parse_rule_kind(const std::string& name) {
    if (name == "objectness") return RuleKind::ObjectnessOnly;
    if (name == "objectness-depth") return RuleKind::ObjectnessDepth;
    if (name == "objectness-classifier") return RuleKind::ObjectnessClassifier;
    throw ValidationError("unknown mode '" + name + "'");
}

double vacuous_mu(RuleKind kind) { return kind == RuleKind::ObjectnessClassifier ? 0.0 : 1.0; }

DecisionRule DecisionRule::objectness(double lambda) { return {RuleKind::ObjectnessOnly, lambda, 1.0}; }

DecisionRule DecisionRule::objectness_depth(double lambda, double mu) {
    return {RuleKind::ObjectnessDepth, lambda, mu};
}

DecisionRule DecisionRule::objectness_classifier(double lambda, double mu) {
    return {RuleKind::ObjectnessClassifier, lambda, mu};
}

bool DecisionRule::keeps(const ScoredDetection& det) const {
    if (det.objectness < lambda) return false;
    switch (kind) {
        case RuleKind::ObjectnessOnly:
            return true;
        case RuleKind::ObjectnessDepth:
            if (!det.depth) throw ValidationError("detection has no depth; run the depth annotation first");
            return *det.depth <= mu;
        case RuleKind::ObjectnessClassifier:
            if (!det.aux_score) throw ValidationError("detection has no aux_score");
            return *det.aux_score >= mu;
    }
    return false;
}

std::string to_string(const DecisionRule& rule) {
    std::string s = to_string(rule.kind) + "(lambda=" + format_number(rule.lambda);
    if (rule.is_two_parameter()) s += ", mu=" + format_number(rule.mu);
    return s + ")";
}

void require_fields(const DetectionDataset& dataset, RuleKind kind) {
    for (const auto& cut : dataset.cuts) {
        for (const auto& d : cut.detections) {
            if (kind == RuleKind::ObjectnessDepth && !d.depth) {
                throw ValidationError("cut '" + cut.cut_id + "': detection without depth (mode " + to_string(kind) + ")");
            }
            if (kind == RuleKind::ObjectnessClassifier && !d.aux_score) {
                throw ValidationError("cut '" + cut.cut_id + "': detection without aux_score (mode " +
                                      to_string(kind) + ")");
            }
        }
    }
}

std::vector<ScoredDetection> apply_rule(const CutRecord& cut, const DecisionRule& rule) {
    std::vector<ScoredDetection> kept;
    for (const auto& d : cut.detections) {
        if (rule.keeps(d)) kept.push_back(d);
    }
    return kept;
}

}  // namespace riskcal
