#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "json.hpp"
#include "riskcal/calibration.hpp"
#include "riskcal/depth_map.hpp"
#include "riskcal/detection_data.hpp"

namespace riskcal {

// Stateless 64-bit mixer; derives independent stream seeds from (seed, index).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

// ---------------------------------------------------------------- splits

struct SplitSpec {
    double calib_fraction = 0.5;
    std::string group_key = "group_id";  // "group_id" or "cut_id"
    std::uint64_t seed = 0;
};

struct Split {
    DetectionDataset calibration;
    DetectionDataset test;
};

// Shuffles the groups with `seed` and sends round(fraction * groups) of them
// to calibration. Cut order inside each side follows the input.
Split group_split(const DetectionDataset& dataset, const SplitSpec& spec);

// ---------------------------------------------------------------- synthetic data

struct BetaParams {
    double a = 1.0;
    double b = 1.0;
};

struct SyntheticConfig {
    std::size_t num_cuts = 200;
    std::size_t cuts_per_group = 4;
    double mean_gt_per_cut = 12.0;
    double tp_detect_prob = 0.85;      // chance a ground-truth object gets a detection
    BetaParams tp_objectness{5.0, 2.0};
    BetaParams fp_objectness{2.0, 5.0};
    double fp_per_cut = 10.0;          // Poisson mean of false detections
    double aux_signal = 0.0;           // 0: aux score independent of the label
    double depth_signal = 0.0;         // 0: true and false boxes equally deep
    int num_classes = 1;
    double cut_size = 4000.0;          // pixels
    double box_size = 40.0;            // pixels
    bool with_aux = true;
    bool with_depth = true;
    std::uint64_t seed = 1;
};

void check(const SyntheticConfig& config);
nlohmann::json to_json(const SyntheticConfig& config);
SyntheticConfig synthetic_config_from_json(const nlohmann::json& doc, ParseMode mode = ParseMode::Strict);

struct SyntheticData {
    DetectionDataset dataset;
    std::map<std::string, Contour> contours;  // the disk every cut lies on
};

// Cut i depends only on (config.seed, first_index + i); generating a pool in
// chunks gives the same cuts as generating it at once.
SyntheticData synth_generate(const SyntheticConfig& config, std::size_t first_index = 0);

// Contour shared by all synthetic cuts: a disk centered in the cut.
Contour synthetic_disk(const SyntheticConfig& config, std::size_t vertices = 512);

constexpr std::size_t kDefaultOraclePool = 50000;

// Key for oracle lookups.
using RuleKey = std::tuple<int, double, double>;
RuleKey key_of(const DecisionRule& rule);

// Mean precision and recall of each rule on a large pool drawn from a seed
// domain disjoint from the one synth_generate uses for trials: the Monte-Carlo
// stand-in for the expected precision under the generating distribution.
std::map<RuleKey, MeanMetrics> true_risk_oracle(const SyntheticConfig& config, std::span<const DecisionRule> rules,
                                                std::size_t pool_size = kDefaultOraclePool,
                                                const MatchOptions& match = {});

// ---------------------------------------------------------------- trials

enum class Method { Naive, LttObjectness, LttDepth, LttClassifier };

std::string to_string(Method method);
Method parse_method(const std::string& name);  // naive, ltt-objectness, ltt-depth, ltt-classifier
std::vector<Method> all_methods();

std::vector<double> default_naive_grid();  // 0.01, 0.02, ..., 0.99

struct TrialSettings {
    CalibrationConfig calibration;
    std::vector<double> naive_grid = default_naive_grid();
    std::vector<Method> methods = all_methods();
    double calib_fraction = 0.5;
    std::size_t num_trials = 100;
    std::uint64_t base_seed = 0;
    std::size_t jobs = 1;
    bool with_oracle = true;               // synthetic sources only
    std::size_t oracle_pool = kDefaultOraclePool;
};

struct MethodOutcome {
    Method method = Method::Naive;
    std::optional<DecisionRule> rule;  // empty when the method abstained
    MeanMetrics calibration;
    MeanMetrics test;
    std::optional<double> oracle_precision;

    bool abstained() const { return !rule.has_value(); }
};

struct TrialReport {
    std::size_t trial = 0;
    std::uint64_t split_seed = 0;
    std::size_t calibration_cuts = 0;
    std::size_t test_cuts = 0;
    std::vector<MethodOutcome> outcomes;  // in settings.methods order
};

struct Quantiles {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
};

struct Interval {
    double mean = 0.0;
    double low = 0.0;
    double high = 0.0;
};

struct MethodSummary {
    Method method = Method::Naive;
    std::size_t trials = 0;
    std::size_t abstentions = 0;
    double violation_rate = 0.0;                 // test precision < P0
    std::optional<double> oracle_violation_rate; // oracle precision < P0
    double standard_error = 0.0;                 // sqrt(delta (1 - delta) / trials)
    Quantiles precision;
    Quantiles recall;
    Quantiles f1;
    Interval mean_precision;                     // 95% normal interval of the mean
    Interval mean_recall;
    Interval mean_f1;
};

struct CoverageSummary {
    std::size_t trials = 0;
    double target_precision = 0.0;
    double delta = 0.0;
    std::vector<MethodSummary> methods;
    nlohmann::json config;

    const MethodSummary& at(Method method) const;
};

struct TrialRun {
    std::vector<TrialReport> reports;
    CoverageSummary summary;
};

// A trial source is either a fixed dataset, re-split at group level in every
// trial, or a synthetic configuration, redrawn in every trial.
using TrialSource = std::variant<DetectionDataset, SyntheticConfig>;

// Trial t splits with seed base_seed + t (and, for synthetic sources, draws
// its data from mix_seed(config.seed, t)). Reports do not depend on `jobs`.
// Abstaining methods withhold every detection on the test side.
TrialRun run_trials(const TrialSource& source, const TrialSettings& settings);

CoverageSummary summarize(std::span<const TrialReport> reports, const TrialSettings& settings,
                          nlohmann::json config_echo = {});

Quantiles quantiles(std::vector<double> values);
Interval mean_interval(std::span<const double> values);

void write_trials_csv(std::ostream& out, std::span<const TrialReport> reports);
nlohmann::json to_json(const CoverageSummary& summary);

}  // namespace riskcal
