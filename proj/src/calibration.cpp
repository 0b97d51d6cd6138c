#include "riskcal/calibration.hpp"

#include <algorithm>
#include <numeric>

#include "riskcal/error.hpp"
#include "riskcal/risk_bounds.hpp"

namespace riskcal {

using nlohmann::json;

std::vector<double> default_lambda_grid() {
    std::vector<double> g;
    for (int i = 1; i <= 9; ++i) g.push_back(i / 10.0);
    return g;
}

std::vector<double> default_mu_grid(RuleKind kind) {
    auto g = default_lambda_grid();
    if (kind == RuleKind::ObjectnessDepth) g.push_back(1.0);
    if (kind == RuleKind::ObjectnessClassifier) g.insert(g.begin(), 0.0);
    return g;
}

std::string to_string(PathLayout layout) {
    return layout == PathLayout::PerMu ? "per-mu" : "lambda-major";
}

PathLayout parse_path_layout(const std::string& name) {
    if (name == "per-mu") return PathLayout::PerMu;
    if (name == "lambda-major") return PathLayout::LambdaMajor;
    throw ValidationError("unknown path layout '" + name + "'");
}

namespace {

void check_grid(const std::vector<double>& grid, const char* name) {
    if (grid.empty()) throw ValidationError(std::string(name) + " is empty");
    for (double v : grid) {
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(std::string(name) + " values must lie in [0,1]");
    }
    if (std::adjacent_find(grid.begin(), grid.end(), [](double a, double b) { return !(a < b); }) != grid.end()) {
        throw ValidationError(std::string(name) + " must be strictly increasing");
    }
}

CalibrationConfig resolved(CalibrationConfig config, RuleKind kind) {
    if (kind == RuleKind::ObjectnessOnly) {
        config.mu_grid = {vacuous_mu(kind)};
    } else if (config.mu_grid.empty()) {
        config.mu_grid = default_mu_grid(kind);
    }
    return config;
}

// True when mu `a` keeps at least as many boxes as mu `b`.
bool more_permissive(RuleKind kind, double a, double b) {
    return kind == RuleKind::ObjectnessClassifier ? a < b : a > b;
}

}  // namespace

void check(const CalibrationConfig& config, RuleKind kind) {
    if (!(config.target_precision > 0.0 && config.target_precision < 1.0)) {
        throw ValidationError("target precision P0 must lie in (0,1)");
    }
    if (!(config.delta > 0.0 && config.delta < 1.0)) throw ValidationError("delta must lie in (0,1)");
    if (!(config.match.iou_threshold > 0.0 && config.match.iou_threshold <= 1.0)) {
        throw ValidationError("iou threshold must lie in (0,1]");
    }
    check_grid(config.lambda_grid, "lambda grid");
    if (kind != RuleKind::ObjectnessOnly && !config.mu_grid.empty()) {
        check_grid(config.mu_grid, "mu grid");
        const double v = vacuous_mu(kind);
        if (std::find(config.mu_grid.begin(), config.mu_grid.end(), v) == config.mu_grid.end()) {
            throw ValidationError("mu grid must contain the vacuous value " + std::to_string(v));
        }
    }
}

CalibrationResult calibrate(const DetectionDataset& dataset, const CalibrationConfig& config, RuleKind kind) {
    check(config, kind);
    if (dataset.cuts.empty()) throw ValidationError("calibration needs at least one cut");
    require_fields(dataset, kind);

    CalibrationResult result;
    result.kind = kind;
    result.config = resolved(config, kind);
    result.n = dataset.cuts.size();

    const PreparedDataset prepared(dataset, config.match);
    const double alpha = result.alpha();
    const auto& lambdas = result.config.lambda_grid;

    const auto& mus = result.config.mu_grid;
    for (double mu : mus) {
        for (double lambda : lambdas) {
            GridPoint pt;
            pt.rule = DecisionRule{kind, lambda, mu};
            const auto m = prepared.evaluate(pt.rule);
            pt.precision = m.precision;
            pt.recall = m.recall;
            pt.f1 = m.f1;
            pt.r_hat = std::clamp(1.0 - m.precision, 0.0, 1.0);
            const RiskSample sample{pt.r_hat, static_cast<std::int64_t>(result.n), alpha};
            pt.log_p_value = hb_log_pvalue(sample);
            pt.p_value = hb_pvalue(sample);
            result.grid.push_back(pt);
        }
    }

    auto at = [&](std::size_t mu_index, std::size_t lambda_index) { return mu_index * lambdas.size() + lambda_index; };
    auto step = [&](std::size_t index) { return TestStep{index, result.grid[index].p_value}; };
    if (kind == RuleKind::ObjectnessOnly || result.config.layout == PathLayout::PerMu) {
        for (std::size_t i = 0; i < mus.size(); ++i) {
            TestPath path;
            for (std::size_t j = lambdas.size(); j-- > 0;) path.push_back(step(at(i, j)));
            result.paths.push_back(std::move(path));
        }
    } else {
        // Strictest mu first: for depth that is the smallest mu, for the classifier the largest.
        std::vector<std::size_t> mu_order(mus.size());
        std::iota(mu_order.begin(), mu_order.end(), std::size_t{0});
        if (kind == RuleKind::ObjectnessClassifier) std::reverse(mu_order.begin(), mu_order.end());
        TestPath path;
        for (std::size_t j = lambdas.size(); j-- > 0;) {
            for (std::size_t i : mu_order) path.push_back(step(at(i, j)));
        }
        result.paths.push_back(std::move(path));
    }

    result.compatible = fixed_sequence_test(result.paths, config.delta);
    for (const auto& [index, p] : result.compatible.rejected) result.grid[index].compatible = true;
    if (!result.compatible.empty()) result.selected = select_max_recall(dataset, result);
    return result;
}

DecisionRule select_max_recall(const DetectionDataset& dataset, const CalibrationResult& result) {
    if (result.compatible.empty()) throw ValidationError("no compatible threshold to select from");

    if (result.kind == RuleKind::ObjectnessOnly) {
        const GridPoint* best = nullptr;
        for (const auto& [index, p] : result.compatible.rejected) {
            const GridPoint& pt = result.grid.at(index);
            if (best == nullptr || pt.rule.lambda < best->rule.lambda) best = &pt;
        }
        return best->rule;
    }

    const PreparedDataset prepared(dataset, result.config.match);
    std::optional<DecisionRule> best;
    double best_recall = -1.0;
    for (const auto& [index, p] : result.compatible.rejected) {
        const DecisionRule& rule = result.grid.at(index).rule;
        const double recall = prepared.evaluate(rule).recall;
        bool better = recall > best_recall;
        if (!better && recall == best_recall) {
            better = rule.lambda < best->lambda ||
                     (rule.lambda == best->lambda && more_permissive(result.kind, rule.mu, best->mu));
        }
        if (better) {
            best = rule;
            best_recall = recall;
        }
    }
    return *best;
}

json to_json(const DecisionRule& rule) {
    json j{{"mode", to_string(rule.kind)}, {"lambda", rule.lambda}};
    if (rule.is_two_parameter()) j["mu"] = rule.mu;
    return j;
}

DecisionRule rule_from_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("mode") || !doc.contains("lambda")) {
        throw ValidationError("rule object needs 'mode' and 'lambda'");
    }
    DecisionRule rule;
    rule.kind = parse_rule_kind(doc.at("mode").get<std::string>());
    rule.lambda = doc.at("lambda").get<double>();
    rule.mu = doc.contains("mu") ? doc.at("mu").get<double>() : vacuous_mu(rule.kind);
    return rule;
}

json to_json(const CalibrationResult& result) {
    json grid = json::array();
    for (const auto& pt : result.grid) {
        json g{{"lambda", pt.rule.lambda},
               {"precision", pt.precision},
               {"recall", pt.recall},
               {"f1", pt.f1},
               {"r_hat", pt.r_hat},
               {"p_value", pt.p_value},
               {"log_p_value", pt.log_p_value},
               {"compatible", pt.compatible}};
        if (pt.rule.is_two_parameter()) g["mu"] = pt.rule.mu;
        grid.push_back(std::move(g));
    }
    json paths = json::array();
    for (const auto& path : result.paths) {
        json p = json::array();
        for (const auto& step : path) p.push_back(step.index);
        paths.push_back(std::move(p));
    }
    json compatible = json::array();
    for (const auto& [index, p] : result.compatible.rejected) compatible.push_back(index);

    json audit{{"mode", to_string(result.kind)},
               {"p0", result.config.target_precision},
               {"alpha", result.alpha()},
               {"delta", result.config.delta},
               {"n", result.n},
               {"m_prime", result.compatible.budget_splits},
               {"per_test_level", result.compatible.per_test_level()},
               {"lambda_grid", result.config.lambda_grid},
               {"mu_grid", result.config.mu_grid},
               {"iou_threshold", result.config.match.iou_threshold},
               {"class_aware", result.config.match.class_aware},
               {"path_layout", to_string(result.config.layout)},
               {"p_value", "hoeffding-bentkus"},
               {"multiple_testing", "fixed-sequence"},
               {"precision_convention", "mean over cuts; empty prediction set counts as precision 1"}};

    json doc{{"abstained", result.abstained()},
             {"selected", result.selected ? to_json(*result.selected) : json(nullptr)},
             {"compatible", std::move(compatible)},
             {"paths", std::move(paths)},
             {"grid", std::move(grid)},
             {"audit", std::move(audit)}};
    if (result.selected) {
        for (const auto& pt : result.grid) {
            if (pt.rule == *result.selected) {
                doc["selected_metrics"] = {{"precision", pt.precision}, {"recall", pt.recall}, {"f1", pt.f1},
                                           {"p_value", pt.p_value}};
            }
        }
    }
    return doc;
}

DecisionRule selected_rule_from_result(const json& doc) {
    if (!doc.is_object() || !doc.contains("selected") || doc.at("selected").is_null()) {
        throw ValidationError("calibration result has no selected rule (abstained)");
    }
    return rule_from_json(doc.at("selected"));
}

}  // namespace riskcal
