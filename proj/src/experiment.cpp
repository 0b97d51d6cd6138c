#include "riskcal/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>
#include <unordered_map>

#include "riskcal/error.hpp"
#include "riskcal/format.hpp"

namespace riskcal {

using nlohmann::json;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 finalizer over a combination of both inputs
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// ---------------------------------------------------------------- splits

Split group_split(const DetectionDataset& dataset, const SplitSpec& spec) {
    if (!(spec.calib_fraction > 0.0 && spec.calib_fraction < 1.0)) {
        throw ValidationError("calibration fraction must lie in (0,1)");
    }
    if (spec.group_key != "group_id" && spec.group_key != "cut_id") {
        throw ValidationError("group key must be 'group_id' or 'cut_id'");
    }
    auto key = [&](const CutRecord& c) -> const std::string& {
        return spec.group_key == "cut_id" ? c.cut_id : c.group_id;
    };

    std::vector<std::string> groups;
    std::unordered_map<std::string, std::size_t> slot;
    for (const auto& cut : dataset.cuts) {
        if (slot.emplace(key(cut), groups.size()).second) groups.push_back(key(cut));
    }
    if (groups.size() < 2) throw ValidationError("group split needs at least 2 groups");

    std::vector<std::size_t> order(groups.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(spec.seed);
    std::shuffle(order.begin(), order.end(), rng);

    const auto wanted = static_cast<std::size_t>(std::llround(spec.calib_fraction * static_cast<double>(groups.size())));
    const std::size_t n_calib = std::clamp<std::size_t>(wanted, 1, groups.size() - 1);
    std::vector<char> to_calib(groups.size(), 0);
    for (std::size_t i = 0; i < n_calib; ++i) to_calib[order[i]] = 1;

    Split out;
    out.calibration.num_classes = dataset.num_classes;
    out.test.num_classes = dataset.num_classes;
    for (const auto& cut : dataset.cuts) {
        (to_calib[slot.at(key(cut))] ? out.calibration : out.test).cuts.push_back(cut);
    }
    return out;
}

// ---------------------------------------------------------------- synthetic data

namespace {

bool valid_beta(const BetaParams& b) { return b.a > 0.0 && b.b > 0.0 && std::isfinite(b.a) && std::isfinite(b.b); }

double draw_beta(std::mt19937_64& rng, double a, double b) {
    std::gamma_distribution<double> ga(a, 1.0);
    std::gamma_distribution<double> gb(b, 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    return x + y > 0.0 ? x / (x + y) : 0.5;
}

double draw_beta(std::mt19937_64& rng, const BetaParams& p) { return draw_beta(rng, p.a, p.b); }

constexpr double kAuxSharpness = 8.0;
constexpr double kDepthSharpness = 4.0;
constexpr double kJitter = 2.0;  // TP boxes sit within this many pixels of their object

struct Layout {
    double cx;
    double cy;
    double radius;
};

Layout layout_of(const SyntheticConfig& c) { return {0.5 * c.cut_size, 0.5 * c.cut_size, 0.45 * c.cut_size}; }

class Placer {
public:
    Placer(const SyntheticConfig& c, std::mt19937_64& rng) : layout_(layout_of(c)), box_(c.box_size), rng_(rng) {}

    // Box whose center has swept-area depth `depth` on the disk.
    BBox place(double depth) {
        std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
        const double rho = layout_.radius * std::sqrt(std::clamp(1.0 - depth, 0.0, 1.0));
        Point center{};
        for (int attempt = 0; attempt < 100; ++attempt) {
            const double t = angle(rng_);
            center = {layout_.cx + rho * std::cos(t), layout_.cy + rho * std::sin(t)};
            if (free(center)) break;
        }
        placed_.push_back(center);
        return BBox{center.x - 0.5 * box_, center.y - 0.5 * box_, box_, box_};
    }

    double depth_of(const BBox& b) const {
        const double dx = b.center_x() - layout_.cx;
        const double dy = b.center_y() - layout_.cy;
        const double r2 = (dx * dx + dy * dy) / (layout_.radius * layout_.radius);
        return std::clamp(1.0 - r2, 0.0, 1.0);
    }

private:
    bool free(Point p) const {
        const double gap = box_ + 2.0 * kJitter + 1.0;
        return std::none_of(placed_.begin(), placed_.end(), [&](Point q) {
            return std::fabs(p.x - q.x) < gap && std::fabs(p.y - q.y) < gap;
        });
    }

    Layout layout_;
    double box_;
    std::mt19937_64& rng_;
    std::vector<Point> placed_;
};

std::vector<double> class_scores_for(std::mt19937_64& rng, int num_classes, int label) {
    std::uniform_real_distribution<double> top(0.5, 1.0);
    const double s = top(rng);
    if (num_classes == 1) return {s};
    std::vector<double> scores(num_classes, (1.0 - s) / (num_classes - 1));
    scores[label] = s;
    return scores;
}

CutRecord generate_cut(const SyntheticConfig& c, std::size_t index) {
    std::mt19937_64 rng(mix_seed(c.seed, index));
    std::poisson_distribution<int> gt_count(c.mean_gt_per_cut);
    std::poisson_distribution<int> fp_count(c.fp_per_cut);
    std::bernoulli_distribution detected(c.tp_detect_prob);
    std::uniform_int_distribution<int> label(0, c.num_classes - 1);
    std::uniform_real_distribution<double> jitter(-kJitter, kJitter);

    CutRecord cut;
    cut.cut_id = "c" + std::to_string(index);
    cut.group_id = "g" + std::to_string(index / c.cuts_per_group);
    if (c.with_depth) cut.contour_id = "disk";

    Placer placer(c, rng);
    const double tp_aux_a = 1.0 + kAuxSharpness * c.aux_signal;
    const double depth_k = 1.0 + kDepthSharpness * c.depth_signal;

    auto finish = [&](ScoredDetection& d, bool truth) {
        if (c.with_aux) d.aux_score = truth ? draw_beta(rng, tp_aux_a, 1.0) : draw_beta(rng, 1.0, tp_aux_a);
        if (c.with_depth) d.depth = placer.depth_of(d.box);
    };

    const int n_gt = gt_count(rng);
    for (int i = 0; i < n_gt; ++i) {
        GroundTruthBox gt{placer.place(draw_beta(rng, 1.0, depth_k)), label(rng)};
        cut.ground_truth.push_back(gt);
        if (!detected(rng)) continue;
        ScoredDetection d;
        d.box = gt.box;
        d.box.x += jitter(rng);
        d.box.y += jitter(rng);
        d.objectness = draw_beta(rng, c.tp_objectness);
        d.class_scores = class_scores_for(rng, c.num_classes, gt.class_label);
        finish(d, true);
        cut.detections.push_back(std::move(d));
    }
    const int n_fp = fp_count(rng);
    for (int i = 0; i < n_fp; ++i) {
        ScoredDetection d;
        d.box = placer.place(draw_beta(rng, depth_k, 1.0));
        d.objectness = draw_beta(rng, c.fp_objectness);
        d.class_scores = class_scores_for(rng, c.num_classes, label(rng));
        finish(d, false);
        cut.detections.push_back(std::move(d));
    }
    std::shuffle(cut.detections.begin(), cut.detections.end(), rng);
    return cut;
}

}  // namespace

void check(const SyntheticConfig& c) {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (c.cuts_per_group == 0) throw ValidationError("cuts_per_group must be positive");
    if (!(c.mean_gt_per_cut >= 0.0) || !(c.fp_per_cut >= 0.0)) throw ValidationError("Poisson means must be >= 0");
    if (!unit(c.tp_detect_prob)) throw ValidationError("tp_detect_prob must lie in [0,1]");
    if (!unit(c.aux_signal) || !unit(c.depth_signal)) throw ValidationError("signal strengths must lie in [0,1]");
    if (!valid_beta(c.tp_objectness) || !valid_beta(c.fp_objectness)) {
        throw ValidationError("beta parameters must be positive");
    }
    if (c.num_classes < 1) throw ValidationError("num_classes must be >= 1");
    if (!(c.box_size > 0.0) || !(c.cut_size > 10.0 * c.box_size)) {
        throw ValidationError("cut_size must exceed ten box sizes");
    }
}

SyntheticData synth_generate(const SyntheticConfig& config, std::size_t first_index) {
    check(config);
    SyntheticData out;
    out.dataset.num_classes = config.num_classes;
    out.dataset.cuts.reserve(config.num_cuts);
    for (std::size_t i = 0; i < config.num_cuts; ++i) out.dataset.cuts.push_back(generate_cut(config, first_index + i));
    if (config.with_depth) out.contours.emplace("disk", synthetic_disk(config));
    return out;
}

Contour synthetic_disk(const SyntheticConfig& config, std::size_t vertices) {
    const Layout l = layout_of(config);
    Contour c;
    c.contour_id = "disk";
    for (std::size_t i = 0; i < vertices; ++i) {
        const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(vertices);
        c.vertices.push_back({l.cx + l.radius * std::cos(t), l.cy + l.radius * std::sin(t)});
    }
    return c;
}

json to_json(const SyntheticConfig& c) {
    return json{{"num_cuts", c.num_cuts},
                {"cuts_per_group", c.cuts_per_group},
                {"mean_gt_per_cut", c.mean_gt_per_cut},
                {"tp_detect_prob", c.tp_detect_prob},
                {"tp_objectness", {c.tp_objectness.a, c.tp_objectness.b}},
                {"fp_objectness", {c.fp_objectness.a, c.fp_objectness.b}},
                {"fp_per_cut", c.fp_per_cut},
                {"aux_signal", c.aux_signal},
                {"depth_signal", c.depth_signal},
                {"num_classes", c.num_classes},
                {"cut_size", c.cut_size},
                {"box_size", c.box_size},
                {"with_aux", c.with_aux},
                {"with_depth", c.with_depth},
                {"seed", c.seed}};
}

SyntheticConfig synthetic_config_from_json(const json& doc, ParseMode mode) {
    if (!doc.is_object()) throw ValidationError("synthetic config must be a JSON object");
    SyntheticConfig c;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string& k = it.key();
        const json& v = it.value();
        try {
            if (k == "num_cuts") c.num_cuts = v.get<std::size_t>();
            else if (k == "cuts_per_group") c.cuts_per_group = v.get<std::size_t>();
            else if (k == "mean_gt_per_cut") c.mean_gt_per_cut = v.get<double>();
            else if (k == "tp_detect_prob") c.tp_detect_prob = v.get<double>();
            else if (k == "tp_objectness") c.tp_objectness = {v.at(0).get<double>(), v.at(1).get<double>()};
            else if (k == "fp_objectness") c.fp_objectness = {v.at(0).get<double>(), v.at(1).get<double>()};
            else if (k == "fp_per_cut") c.fp_per_cut = v.get<double>();
            else if (k == "aux_signal") c.aux_signal = v.get<double>();
            else if (k == "depth_signal") c.depth_signal = v.get<double>();
            else if (k == "num_classes") c.num_classes = v.get<int>();
            else if (k == "cut_size") c.cut_size = v.get<double>();
            else if (k == "box_size") c.box_size = v.get<double>();
            else if (k == "with_aux") c.with_aux = v.get<bool>();
            else if (k == "with_depth") c.with_depth = v.get<bool>();
            else if (k == "seed") c.seed = v.get<std::uint64_t>();
            else if (mode == ParseMode::Strict) throw ValidationError("synthetic config: unknown field '" + k + "'");
        } catch (const json::exception& e) {
            throw ValidationError("synthetic config: bad value for '" + k + "': " + e.what());
        }
    }
    check(c);
    return c;
}

RuleKey key_of(const DecisionRule& rule) {
    return {static_cast<int>(rule.kind), rule.lambda, rule.is_two_parameter() ? rule.mu : vacuous_mu(rule.kind)};
}

std::map<RuleKey, MeanMetrics> true_risk_oracle(const SyntheticConfig& config, std::span<const DecisionRule> rules,
                                                std::size_t pool_size, const MatchOptions& match) {
    check(config);
    if (pool_size == 0) throw ValidationError("oracle pool must be non-empty");
    constexpr std::size_t kChunk = 2000;
    SyntheticConfig pool = config;
    pool.seed = mix_seed(config.seed ^ 0x6F7261636C65ULL, 0xFFFFFFFFULL);

    std::vector<double> precision(rules.size(), 0.0);
    std::vector<double> recall(rules.size(), 0.0);
    for (std::size_t start = 0; start < pool_size; start += kChunk) {
        pool.num_cuts = std::min(kChunk, pool_size - start);
        const auto data = synth_generate(pool, start);
        const PreparedDataset prepared(data.dataset, match);
        for (std::size_t c = 0; c < prepared.size(); ++c) {
            for (std::size_t r = 0; r < rules.size(); ++r) {
                const auto m = prepared.evaluate_cut(c, rules[r]);
                precision[r] += m.precision;
                recall[r] += m.recall;
            }
        }
    }
    std::map<RuleKey, MeanMetrics> out;
    const double n = static_cast<double>(pool_size);
    for (std::size_t r = 0; r < rules.size(); ++r) {
        const double p = precision[r] / n;
        const double q = recall[r] / n;
        out[key_of(rules[r])] = {p, q, f1_score(p, q)};
    }
    return out;
}

// ---------------------------------------------------------------- trials

std::string to_string(Method method) {
    switch (method) {
        case Method::Naive: return "naive";
        case Method::LttObjectness: return "ltt-objectness";
        case Method::LttDepth: return "ltt-depth";
        case Method::LttClassifier: return "ltt-classifier";
    }
    return "unknown";
}

Method parse_method(const std::string& name) {
    for (Method m : all_methods()) {
        if (to_string(m) == name) return m;
    }
    throw ValidationError("unknown method '" + name + "'");
}

std::vector<Method> all_methods() {
    return {Method::Naive, Method::LttObjectness, Method::LttDepth, Method::LttClassifier};
}

std::vector<double> default_naive_grid() {
    std::vector<double> g;
    for (int i = 1; i <= 99; ++i) g.push_back(i / 100.0);
    return g;
}

namespace {

RuleKind kind_of(Method m) {
    switch (m) {
        case Method::LttDepth: return RuleKind::ObjectnessDepth;
        case Method::LttClassifier: return RuleKind::ObjectnessClassifier;
        default: return RuleKind::ObjectnessOnly;
    }
}

// Every rule a method can possibly select.
std::vector<DecisionRule> candidate_rules(const TrialSettings& s) {
    std::vector<DecisionRule> rules;
    for (Method m : s.methods) {
        if (m == Method::Naive) {
            for (double l : s.naive_grid) rules.push_back(DecisionRule::objectness(l));
            continue;
        }
        const RuleKind kind = kind_of(m);
        std::vector<double> mus = s.calibration.mu_grid.empty() ? default_mu_grid(kind) : s.calibration.mu_grid;
        if (kind == RuleKind::ObjectnessOnly) mus = {vacuous_mu(kind)};
        for (double mu : mus) {
            for (double l : s.calibration.lambda_grid) rules.push_back(DecisionRule{kind, l, mu});
        }
    }
    return rules;
}

const DecisionRule kKeepNothing = DecisionRule::objectness(std::numeric_limits<double>::infinity());

TrialReport run_one(const TrialSource& source, const TrialSettings& s, std::size_t t,
                    const std::map<RuleKey, MeanMetrics>* oracle) {
    TrialReport report;
    report.trial = t;
    report.split_seed = s.base_seed + t;

    DetectionDataset drawn;
    const DetectionDataset* data = std::get_if<DetectionDataset>(&source);
    if (const auto* cfg = std::get_if<SyntheticConfig>(&source)) {
        SyntheticConfig c = *cfg;
        c.seed = mix_seed(cfg->seed, t);
        drawn = synth_generate(c).dataset;
        data = &drawn;
    }
    const Split split = group_split(*data, SplitSpec{s.calib_fraction, "group_id", report.split_seed});
    report.calibration_cuts = split.calibration.cuts.size();
    report.test_cuts = split.test.cuts.size();
    const PreparedDataset calib(split.calibration, s.calibration.match);
    const PreparedDataset test(split.test, s.calibration.match);

    for (Method m : s.methods) {
        MethodOutcome o;
        o.method = m;
        if (m == Method::Naive) {
            if (auto l = find_naive_threshold(split.calibration, s.calibration.target_precision, s.naive_grid,
                                              s.calibration.match)) {
                o.rule = DecisionRule::objectness(*l);
            }
        } else {
            const auto result = calibrate(split.calibration, s.calibration, kind_of(m));
            o.rule = result.selected;
        }
        const DecisionRule& applied = o.rule ? *o.rule : kKeepNothing;
        o.calibration = calib.evaluate(applied);
        o.test = test.evaluate(applied);
        if (oracle != nullptr) o.oracle_precision = o.rule ? oracle->at(key_of(*o.rule)).precision : 1.0;
        report.outcomes.push_back(o);
    }
    return report;
}

}  // namespace

TrialRun run_trials(const TrialSource& source, const TrialSettings& settings) {
    if (settings.num_trials < 1) throw ValidationError("need at least one trial");
    if (settings.methods.empty()) throw ValidationError("need at least one method");
    for (Method m : settings.methods) check(settings.calibration, kind_of(m));

    json echo;
    std::map<RuleKey, MeanMetrics> oracle;
    const auto* synthetic = std::get_if<SyntheticConfig>(&source);
    if (const auto* ds = std::get_if<DetectionDataset>(&source)) {
        for (Method m : settings.methods) require_fields(*ds, kind_of(m));
        echo["source"] = "dataset";
        echo["cuts"] = ds->cuts.size();
    } else {
        check(*synthetic);
        for (Method m : settings.methods) {
            if (kind_of(m) == RuleKind::ObjectnessDepth && !synthetic->with_depth) {
                throw ValidationError("method ltt-depth needs a synthetic config with depth");
            }
            if (kind_of(m) == RuleKind::ObjectnessClassifier && !synthetic->with_aux) {
                throw ValidationError("method ltt-classifier needs a synthetic config with aux scores");
            }
        }
        echo["source"] = "synthetic";
        echo["synthetic"] = to_json(*synthetic);
        if (settings.with_oracle) {
            const auto rules = candidate_rules(settings);
            oracle = true_risk_oracle(*synthetic, rules, settings.oracle_pool, settings.calibration.match);
            echo["oracle_pool"] = settings.oracle_pool;
        }
    }
    const auto* oracle_ptr = synthetic != nullptr && settings.with_oracle ? &oracle : nullptr;

    std::vector<TrialReport> reports(settings.num_trials);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t t = next++; t < settings.num_trials; t = next++) {
            try {
                reports[t] = run_one(source, settings, t, oracle_ptr);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t jobs = std::clamp<std::size_t>(settings.jobs, 1, settings.num_trials);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    TrialRun run;
    run.summary = summarize(reports, settings, std::move(echo));
    run.reports = std::move(reports);
    return run;
}

Quantiles quantiles(std::vector<double> v) {
    if (v.empty()) return {};
    std::sort(v.begin(), v.end());
    auto at = [&](double q) {
        const double pos = q * static_cast<double>(v.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
    };
    return {at(0.25), at(0.5), at(0.75)};
}

Interval mean_interval(std::span<const double> v) {
    if (v.empty()) return {};
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    if (v.size() < 2) return {mean, mean, mean};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double half = 1.959963984540054 * std::sqrt(ss / static_cast<double>(v.size() - 1)) /
                        std::sqrt(static_cast<double>(v.size()));
    return {mean, mean - half, mean + half};
}

const MethodSummary& CoverageSummary::at(Method method) const {
    for (const auto& m : methods) {
        if (m.method == method) return m;
    }
    throw ValidationError("summary has no method " + to_string(method));
}

CoverageSummary summarize(std::span<const TrialReport> reports, const TrialSettings& settings, json config_echo) {
    CoverageSummary s;
    s.trials = reports.size();
    s.target_precision = settings.calibration.target_precision;
    s.delta = settings.calibration.delta;
    config_echo["target_precision"] = s.target_precision;
    config_echo["delta"] = s.delta;
    config_echo["lambda_grid"] = settings.calibration.lambda_grid;
    config_echo["mu_grid"] = settings.calibration.mu_grid;
    config_echo["naive_grid_size"] = settings.naive_grid.size();
    config_echo["calib_fraction"] = settings.calib_fraction;
    config_echo["base_seed"] = settings.base_seed;
    config_echo["iou_threshold"] = settings.calibration.match.iou_threshold;
    s.config = std::move(config_echo);

    for (std::size_t mi = 0; mi < settings.methods.size(); ++mi) {
        MethodSummary m;
        m.method = settings.methods[mi];
        m.trials = reports.size();
        std::vector<double> p;
        std::vector<double> r;
        std::vector<double> f;
        std::size_t violations = 0;
        std::size_t oracle_violations = 0;
        bool have_oracle = !reports.empty();
        for (const auto& rep : reports) {
            const MethodOutcome& o = rep.outcomes.at(mi);
            m.abstentions += o.abstained() ? 1 : 0;
            violations += o.test.precision < s.target_precision ? 1 : 0;
            if (o.oracle_precision) {
                oracle_violations += *o.oracle_precision < s.target_precision ? 1 : 0;
            } else {
                have_oracle = false;
            }
            p.push_back(o.test.precision);
            r.push_back(o.test.recall);
            f.push_back(o.test.f1);
        }
        const double n = static_cast<double>(std::max<std::size_t>(1, reports.size()));
        m.violation_rate = static_cast<double>(violations) / n;
        if (have_oracle) m.oracle_violation_rate = static_cast<double>(oracle_violations) / n;
        m.standard_error = std::sqrt(s.delta * (1.0 - s.delta) / n);
        m.precision = quantiles(p);
        m.recall = quantiles(r);
        m.f1 = quantiles(f);
        m.mean_precision = mean_interval(p);
        m.mean_recall = mean_interval(r);
        m.mean_f1 = mean_interval(f);
        s.methods.push_back(m);
    }
    return s;
}

void write_trials_csv(std::ostream& out, std::span<const TrialReport> reports) {
    out << "trial,method,lambda,mu,abstained,calib_precision,calib_recall,precision,recall,f1,oracle_precision\n";
    for (const auto& rep : reports) {
        for (const auto& o : rep.outcomes) {
            out << rep.trial << ',' << to_string(o.method) << ',';
            if (o.rule) {
                out << format_number(o.rule->lambda) << ',';
                if (o.rule->is_two_parameter()) out << format_number(o.rule->mu);
            } else {
                out << ',';
            }
            out << ',' << (o.abstained() ? 1 : 0) << ',' << format_number(o.calibration.precision) << ','
                << format_number(o.calibration.recall) << ',' << format_number(o.test.precision) << ','
                << format_number(o.test.recall) << ',' << format_number(o.test.f1) << ',';
            if (o.oracle_precision) out << format_number(*o.oracle_precision);
            out << '\n';
        }
    }
}

namespace {

json to_json(const Quantiles& q) { return json{{"q1", q.q1}, {"median", q.median}, {"q3", q.q3}}; }
json to_json(const Interval& i) { return json{{"mean", i.mean}, {"ci95_low", i.low}, {"ci95_high", i.high}}; }

}  // namespace

json to_json(const CoverageSummary& s) {
    json methods = json::array();
    for (const auto& m : s.methods) {
        json j{{"method", to_string(m.method)},
               {"trials", m.trials},
               {"abstentions", m.abstentions},
               {"violation_rate", m.violation_rate},
               {"oracle_violation_rate", m.oracle_violation_rate ? json(*m.oracle_violation_rate) : json(nullptr)},
               {"standard_error", m.standard_error},
               {"violation_bound", s.delta + 2.0 * m.standard_error},
               {"precision", to_json(m.precision)},
               {"recall", to_json(m.recall)},
               {"f1", to_json(m.f1)},
               {"mean_precision", to_json(m.mean_precision)},
               {"mean_recall", to_json(m.mean_recall)},
               {"mean_f1", to_json(m.mean_f1)}};
        methods.push_back(std::move(j));
    }
    return json{{"trials", s.trials},
                {"target_precision", s.target_precision},
                {"delta", s.delta},
                {"methods", std::move(methods)},
                {"config", s.config}};
}

}  // namespace riskcal
