#pragma once

#include <optional>
#include <vector>

#include "json.hpp"
#include "riskcal/decision_rule.hpp"
#include "riskcal/detection_data.hpp"
#include "riskcal/metrics.hpp"
#include "riskcal/multiple_testing.hpp"

namespace riskcal {

std::vector<double> default_lambda_grid();                // 0.1, 0.2, ..., 0.9
std::vector<double> default_mu_grid(RuleKind kind);      // 0.1..0.9 plus the vacuous value

// How two-parameter grids are arranged into fixed-sequence paths.
enum class PathLayout {
    PerMu,        // one path per mu, lambda descending; budget delta / |mu grid|
    LambdaMajor,  // one path: lambda descending, and at each lambda mu from the
                  // strictest to the vacuous value; full budget delta
};

std::string to_string(PathLayout layout);
PathLayout parse_path_layout(const std::string& name);  // "per-mu", "lambda-major"

struct CalibrationConfig {
    double target_precision = 0.4;  // P0
    double delta = 1e-3;
    std::vector<double> lambda_grid = default_lambda_grid();
    std::vector<double> mu_grid;    // empty: default_mu_grid(kind)
    MatchOptions match;
    PathLayout layout = PathLayout::PerMu;
};

// Throws ValidationError on out-of-range values, unsorted grids or a mu grid
// without the vacuous value.
void check(const CalibrationConfig& config, RuleKind kind);

struct GridPoint {
    DecisionRule rule;
    double precision = 0.0;  // calibration mean precision
    double recall = 0.0;
    double f1 = 0.0;
    double r_hat = 0.0;      // 1 - precision
    double p_value = 1.0;
    double log_p_value = 0.0;
    bool compatible = false;
};

struct CalibrationResult {
    RuleKind kind = RuleKind::ObjectnessOnly;
    CalibrationConfig config;            // grids resolved
    std::size_t n = 0;                   // calibration cuts
    std::vector<GridPoint> grid;         // lambda-major within each mu
    std::vector<TestPath> paths;         // indices into `grid`
    CompatibleSet compatible;
    std::optional<DecisionRule> selected;

    bool abstained() const { return !selected.has_value(); }
    double alpha() const { return 1.0 - config.target_precision; }
};

// The objectness-only rule is tested along a single path from the largest
// lambda down. Two-parameter rules follow config.layout. An empty compatible
// set is reported as an abstention, not an error.
CalibrationResult calibrate(const DetectionDataset& dataset, const CalibrationConfig& config, RuleKind kind);

// One-parameter rules: the smallest compatible lambda. Two-parameter rules:
// the compatible pair of highest calibration mean recall, ties going to the
// smaller lambda and then to the more permissive mu.
// Throws ValidationError when nothing is compatible.
DecisionRule select_max_recall(const DetectionDataset& dataset, const CalibrationResult& result);

nlohmann::json to_json(const CalibrationResult& result);
nlohmann::json to_json(const DecisionRule& rule);
DecisionRule rule_from_json(const nlohmann::json& doc);

// Reads the selected rule of a calibration result document.
DecisionRule selected_rule_from_result(const nlohmann::json& doc);

}  // namespace riskcal
