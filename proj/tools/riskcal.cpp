// riskcal: threshold calibration with a precision guarantee for object detectors.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli_support.hpp"
#include "riskcal/calibration.hpp"
#include "riskcal/depth_map.hpp"
#include "riskcal/detection_data.hpp"
#include "riskcal/error.hpp"
#include "riskcal/experiment.hpp"
#include "riskcal/format.hpp"
#include "riskcal/metrics.hpp"

namespace fs = std::filesystem;
using namespace riskcal;
using nlohmann::json;

namespace {

struct DataFlags {
    std::string annotations;
    std::string detections;
    std::string contours;
    bool lenient = false;
    bool allow_missing_contours = false;
    int resolution = kDefaultDepthResolution;

    ParseMode mode() const { return lenient ? ParseMode::Lenient : ParseMode::Strict; }
};

void add_data_flags(CLI::App* app, DataFlags& f, bool need_detections = true) {
    app->add_option("--annotations", f.annotations, "Annotation JSON file")->required();
    auto* det = app->add_option("--detections", f.detections, "Detection JSON file");
    if (need_detections) det->required();
    app->add_option("--contours", f.contours, "Contour JSON file; fills box depths");
    app->add_flag("--lenient", f.lenient, "Ignore unknown fields in input files");
    app->add_flag("--allow-missing-contours", f.allow_missing_contours,
                  "Give depth 0 (with a warning) to cuts without a contour");
    app->add_option("--depth-resolution", f.resolution, "Raster cells on the contour's longer side")
        ->capture_default_str();
}

struct LoadedData {
    DetectionDataset dataset;
    std::vector<fs::path> inputs;
};

LoadedData load_data(const DataFlags& f) {
    LoadedData out;
    out.dataset = load_annotations(f.annotations, f.mode());
    out.inputs.push_back(f.annotations);
    if (!f.detections.empty()) {
        out.dataset = load_detections(std::move(out.dataset), f.detections, f.mode());
        out.inputs.push_back(f.detections);
    }
    if (!f.contours.empty()) {
        auto contours = load_contours(f.contours, f.mode());
        auto annotated = annotate_depths(std::move(out.dataset), contours, f.resolution, !f.allow_missing_contours);
        for (const auto& w : annotated.warnings) std::cerr << "warning: " << w << '\n';
        if (annotated.boxes_outside > 0) {
            std::cerr << "warning: " << annotated.boxes_outside << " box center(s) outside their contour; depth 0\n";
        }
        out.dataset = std::move(annotated.dataset);
        out.inputs.push_back(f.contours);
    }
    return out;
}

struct CalibFlags {
    double p0 = 0.4;
    double delta = 1e-3;
    std::string mode = "objectness";
    std::vector<double> lambda_grid;
    std::vector<double> mu_grid;
    double iou = 0.5;
    bool class_aware = false;
    std::string layout = "per-mu";
};

void add_calib_flags(CLI::App* app, CalibFlags& f) {
    app->add_option("--p0", f.p0, "Target precision P0")->capture_default_str();
    app->add_option("--delta", f.delta, "Failure probability")->capture_default_str();
    app->add_option("--lambda-grid", f.lambda_grid, "Objectness thresholds (default 0.1..0.9)");
    app->add_option("--mu-grid", f.mu_grid, "Second-criterion thresholds, including the vacuous value");
    app->add_option("--iou", f.iou, "IOU threshold for a true positive")->capture_default_str();
    app->add_flag("--class-aware", f.class_aware, "Require matching classes");
    app->add_option("--path-layout", f.layout, "Two-parameter test paths: per-mu or lambda-major")
        ->check(CLI::IsMember({"per-mu", "lambda-major"}))
        ->capture_default_str();
}

CalibrationConfig to_config(const CalibFlags& f) {
    CalibrationConfig c;
    c.target_precision = f.p0;
    c.delta = f.delta;
    if (!f.lambda_grid.empty()) c.lambda_grid = f.lambda_grid;
    c.mu_grid = f.mu_grid;
    c.match = {f.iou, f.class_aware};
    c.layout = parse_path_layout(f.layout);
    return c;
}

void write_json(const fs::path& path, const json& doc) { write_text_file(path, doc.dump(2) + "\n"); }

// ---------------------------------------------------------------- calibrate

struct CalibrateCmd {
    DataFlags data;
    CalibFlags calib;
    std::string out;
};

int run_calibrate(const CalibrateCmd& cmd, const CLI::App& app) {
    const RuleKind kind = parse_rule_kind(cmd.calib.mode);
    const auto loaded = load_data(cmd.data);
    const auto result = calibrate(loaded.dataset, to_config(cmd.calib), kind);
    write_json(cmd.out, to_json(result));
    cli::write_manifest({"calibrate", cli::options_echo(app), loaded.inputs, {cmd.out}, {}});

    if (result.abstained()) {
        std::cerr << "no compatible threshold at delta=" << format_number(result.config.delta)
                  << " (per-test level " << format_number(result.compatible.per_test_level()) << "):\n";
        for (const auto& pt : result.grid) {
            std::cerr << "  " << to_string(pt.rule) << "  precision=" << format_number(pt.precision)
                      << "  p=" << format_number(pt.p_value) << '\n';
        }
        return cli::kAbstained;
    }
    std::cout << "selected " << to_string(*result.selected) << " from " << result.compatible.size()
              << " compatible rule(s) on " << result.n << " cuts\n";
    return cli::kOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateCmd {
    DataFlags data;
    std::string rule_file;
    std::string mode = "objectness";
    double lambda = 0.0;
    std::optional<double> mu;
    double iou = 0.5;
    bool class_aware = false;
    bool map = false;
    std::vector<double> pr_grid;
    std::string pr_out;
    std::string out;
};

int run_evaluate(const EvaluateCmd& cmd, const CLI::App& app) {
    auto loaded = load_data(cmd.data);
    DecisionRule rule;
    if (!cmd.rule_file.empty()) {
        rule = selected_rule_from_result(read_json_file(cmd.rule_file));
        loaded.inputs.push_back(cmd.rule_file);
    } else {
        rule.kind = parse_rule_kind(cmd.mode);
        rule.lambda = cmd.lambda;
        rule.mu = cmd.mu.value_or(vacuous_mu(rule.kind));
    }
    require_fields(loaded.dataset, rule.kind);
    const MatchOptions match{cmd.iou, cmd.class_aware};

    std::ostringstream csv;
    csv << "scope,precision,recall,f1,ap\n";
    for (const auto& cut : loaded.dataset.cuts) {
        const auto m = evaluate_cut(cut, rule, match);
        csv << cut.cut_id << ',' << format_number(m.precision) << ',' << format_number(m.recall) << ','
            << format_number(f1_score(m.precision, m.recall)) << ",\n";
    }
    const auto mean = mean_metrics(loaded.dataset, rule, match);
    csv << "mean," << format_number(mean.precision) << ',' << format_number(mean.recall) << ','
        << format_number(mean.f1) << ",\n";
    if (cmd.map) {
        const auto map = mean_average_precision(loaded.dataset, cmd.iou);
        for (const auto& w : map.warnings) std::cerr << "warning: " << w << '\n';
        for (std::size_t k = 0; k < map.per_class.size(); ++k) {
            csv << "class:" << k << ",,,," << (map.per_class[k] ? format_number(*map.per_class[k]) : "") << '\n';
        }
        csv << "map,,,," << format_number(map.mean) << '\n';
    }

    std::vector<fs::path> outputs;
    if (cmd.out.empty()) {
        std::cout << csv.str();
    } else {
        write_text_file(cmd.out, csv.str());
        outputs.push_back(cmd.out);
    }
    if (!cmd.pr_grid.empty()) {
        const auto points = pr_curve(loaded.dataset, rule, cmd.pr_grid, match);
        std::ostringstream pr;
        write_pr_csv(pr, points);
        if (cmd.pr_out.empty()) {
            std::cout << pr.str();
        } else {
            write_text_file(cmd.pr_out, pr.str());
            outputs.push_back(cmd.pr_out);
        }
    }
    cli::write_manifest({"evaluate", cli::options_echo(app), loaded.inputs, outputs, {}});
    return cli::kOk;
}

// ---------------------------------------------------------------- depth

struct DepthCmd {
    DataFlags data;
    std::string out;
};

int run_depth(const DepthCmd& cmd, const CLI::App& app) {
    if (cmd.data.contours.empty()) throw ValidationError("depth needs --contours");
    DataFlags plain = cmd.data;
    plain.contours.clear();
    auto loaded = load_data(plain);
    const auto contours = load_contours(cmd.data.contours, cmd.data.mode());
    auto annotated = annotate_depths(std::move(loaded.dataset), contours, cmd.data.resolution,
                                     !cmd.data.allow_missing_contours);
    for (const auto& w : annotated.warnings) std::cerr << "warning: " << w << '\n';
    if (annotated.boxes_outside > 0) {
        std::cerr << "warning: " << annotated.boxes_outside << " box center(s) outside their contour; depth 0\n";
    }
    write_json(cmd.out, detections_to_json(annotated.dataset));
    loaded.inputs.push_back(cmd.data.contours);
    cli::write_manifest({"depth", cli::options_echo(app), loaded.inputs, {cmd.out}, {}});
    std::cout << "wrote depths for " << annotated.dataset.total_detections() << " detection(s); "
              << annotated.warnings.size() << " warning(s)\n";
    return cli::kOk;
}

// ---------------------------------------------------------------- simulate

struct SyntheticFlags {
    std::string synthetic_config;
    std::size_t num_cuts = 200;
    std::size_t cuts_per_group = 4;
    double aux_signal = 0.0;
    double depth_signal = 0.0;
    double fp_per_cut = 10.0;
    double mean_gt = 12.0;
    std::uint64_t seed = 1;
};

void add_synthetic_flags(CLI::App* app, SyntheticFlags& f) {
    app->add_option("--synthetic-config", f.synthetic_config, "Synthetic generator config (JSON)");
    app->add_option("--num-cuts", f.num_cuts)->capture_default_str();
    app->add_option("--cuts-per-group", f.cuts_per_group)->capture_default_str();
    app->add_option("--aux-signal", f.aux_signal, "0..1")->capture_default_str();
    app->add_option("--depth-signal", f.depth_signal, "0..1")->capture_default_str();
    app->add_option("--fp-per-cut", f.fp_per_cut)->capture_default_str();
    app->add_option("--mean-gt", f.mean_gt)->capture_default_str();
    app->add_option("--seed", f.seed, "Master seed (falls back to $RISKCAL_SEED)")
        ->envname("RISKCAL_SEED")
        ->capture_default_str();
}

SyntheticConfig synthetic_from(const SyntheticFlags& f, const CLI::App& app) {
    SyntheticConfig c;
    if (!f.synthetic_config.empty()) c = synthetic_config_from_json(read_json_file(f.synthetic_config));
    // Explicit flags override the file.
    const bool from_file = !f.synthetic_config.empty();
    auto use = [&](const char* flag) { return !from_file || app.count(flag) > 0; };
    if (use("--num-cuts")) c.num_cuts = f.num_cuts;
    if (use("--cuts-per-group")) c.cuts_per_group = f.cuts_per_group;
    if (use("--aux-signal")) c.aux_signal = f.aux_signal;
    if (use("--depth-signal")) c.depth_signal = f.depth_signal;
    if (use("--fp-per-cut")) c.fp_per_cut = f.fp_per_cut;
    if (use("--mean-gt")) c.mean_gt_per_cut = f.mean_gt;
    if (use("--seed") || std::getenv("RISKCAL_SEED") != nullptr) c.seed = f.seed;
    check(c);
    return c;
}

struct SimulateCmd {
    SyntheticFlags synth;
    std::string out_dir;
};

int run_simulate(const SimulateCmd& cmd, const CLI::App& app) {
    const auto config = synthetic_from(cmd.synth, app);
    const auto data = synth_generate(config);
    std::error_code ec;
    fs::create_directories(cmd.out_dir, ec);
    if (ec) throw IoError("cannot create '" + cmd.out_dir + "': " + ec.message());
    const fs::path dir(cmd.out_dir);
    write_json(dir / "annotations.json", annotations_to_json(data.dataset));
    write_json(dir / "detections.json", detections_to_json(data.dataset));
    std::vector<fs::path> outputs{dir / "annotations.json", dir / "detections.json"};
    if (!data.contours.empty()) {
        write_json(dir / "contours.json", contours_to_json(data.contours));
        outputs.push_back(dir / "contours.json");
    }
    write_json(dir / "synthetic_config.json", to_json(config));
    outputs.push_back(dir / "synthetic_config.json");
    std::vector<fs::path> inputs;
    if (!cmd.synth.synthetic_config.empty()) inputs.push_back(cmd.synth.synthetic_config);
    cli::write_manifest({"simulate", cli::options_echo(app), inputs, outputs, {{"seed", config.seed}}});
    std::cout << "wrote " << data.dataset.cuts.size() << " cut(s), " << data.dataset.total_ground_truth()
              << " ground-truth box(es), " << data.dataset.total_detections() << " detection(s) to " << cmd.out_dir
              << '\n';
    return cli::kOk;
}

// ---------------------------------------------------------------- trials

struct TrialsCmd {
    SyntheticFlags synth;
    DataFlags data;
    CalibFlags calib;
    std::size_t trials = 100;
    std::vector<std::string> methods;
    std::vector<double> naive_grid;
    double calib_fraction = 0.5;
    std::size_t jobs = 1;
    std::size_t oracle_pool = kDefaultOraclePool;
    bool no_oracle = false;
    std::string csv;
    std::string summary;
};

int run_trials_cmd(const TrialsCmd& cmd, const CLI::App& app) {
    TrialSettings s;
    s.calibration = to_config(cmd.calib);
    if (!cmd.naive_grid.empty()) s.naive_grid = cmd.naive_grid;
    if (!cmd.methods.empty()) {
        s.methods.clear();
        for (const auto& m : cmd.methods) s.methods.push_back(parse_method(m));
    }
    s.calib_fraction = cmd.calib_fraction;
    s.num_trials = cmd.trials;
    s.base_seed = cmd.synth.seed;
    s.jobs = cmd.jobs;
    s.with_oracle = !cmd.no_oracle;
    s.oracle_pool = cmd.oracle_pool;

    std::vector<fs::path> inputs;
    TrialSource source;
    if (!cmd.data.annotations.empty()) {
        auto loaded = load_data(cmd.data);
        inputs = loaded.inputs;
        source = std::move(loaded.dataset);
    } else {
        source = synthetic_from(cmd.synth, app);
        if (!cmd.synth.synthetic_config.empty()) inputs.push_back(cmd.synth.synthetic_config);
    }

    const auto run = run_trials(source, s);
    std::ostringstream csv;
    write_trials_csv(csv, run.reports);
    write_text_file(cmd.csv, csv.str());
    std::vector<fs::path> outputs{cmd.csv};
    const json summary = to_json(run.summary);
    if (!cmd.summary.empty()) {
        write_json(cmd.summary, summary);
        outputs.push_back(cmd.summary);
    }
    cli::write_manifest({"trials", cli::options_echo(app), inputs, outputs, {{"base_seed", s.base_seed}}});

    std::cout << "trials=" << run.summary.trials << " P0=" << format_number(run.summary.target_precision)
              << " delta=" << format_number(run.summary.delta) << '\n';
    for (const auto& m : run.summary.methods) {
        std::cout << "  " << to_string(m.method) << ": violation_rate=" << format_number(m.violation_rate);
        if (m.oracle_violation_rate) std::cout << " oracle_violation_rate=" << format_number(*m.oracle_violation_rate);
        std::cout << " bound=" << format_number(run.summary.delta + 2.0 * m.standard_error)
                  << " abstentions=" << m.abstentions << " mean_precision=" << format_number(m.mean_precision.mean)
                  << " mean_recall=" << format_number(m.mean_recall.mean)
                  << " mean_f1=" << format_number(m.mean_f1.mean) << '\n';
    }
    return cli::kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Calibrate object-detection thresholds with a distribution-free precision guarantee"};
    app.require_subcommand(1);
    app.set_version_flag("--version", cli::kToolVersion);

    CalibrateCmd calibrate_cmd;
    auto* calibrate_app = app.add_subcommand("calibrate", "Select a decision rule with certified precision");
    add_data_flags(calibrate_app, calibrate_cmd.data);
    add_calib_flags(calibrate_app, calibrate_cmd.calib);
    calibrate_app->add_option("--mode", calibrate_cmd.calib.mode)
        ->check(CLI::IsMember({"objectness", "objectness-depth", "objectness-classifier"}))
        ->capture_default_str();
    calibrate_app->add_option("--out", calibrate_cmd.out, "Result JSON")->required();

    EvaluateCmd evaluate_cmd;
    auto* evaluate_app = app.add_subcommand("evaluate", "Per-cut and mean precision/recall/F1 of a rule");
    add_data_flags(evaluate_app, evaluate_cmd.data);
    evaluate_app->add_option("--rule-file", evaluate_cmd.rule_file, "Calibration result to take the rule from");
    evaluate_app->add_option("--mode", evaluate_cmd.mode)
        ->check(CLI::IsMember({"objectness", "objectness-depth", "objectness-classifier"}))
        ->capture_default_str();
    evaluate_app->add_option("--lambda", evaluate_cmd.lambda)->capture_default_str();
    evaluate_app->add_option("--mu", evaluate_cmd.mu);
    evaluate_app->add_option("--iou", evaluate_cmd.iou)->capture_default_str();
    evaluate_app->add_flag("--class-aware", evaluate_cmd.class_aware);
    evaluate_app->add_flag("--map", evaluate_cmd.map, "Also report AP per class and mAP");
    evaluate_app->add_option("--pr-grid", evaluate_cmd.pr_grid, "Thresholds for a precision-recall curve");
    evaluate_app->add_option("--pr-out", evaluate_cmd.pr_out, "PR curve CSV (default stdout)");
    evaluate_app->add_option("--out", evaluate_cmd.out, "Metrics CSV (default stdout)");

    DepthCmd depth_cmd;
    auto* depth_app = app.add_subcommand("depth", "Fill per-box depth from region contours");
    add_data_flags(depth_app, depth_cmd.data);
    depth_app->add_option("--out", depth_cmd.out, "Detection JSON with depths")->required();

    SimulateCmd simulate_cmd;
    auto* simulate_app = app.add_subcommand("simulate", "Write a synthetic dataset");
    add_synthetic_flags(simulate_app, simulate_cmd.synth);
    simulate_app->add_option("--out-dir", simulate_cmd.out_dir)->required();

    TrialsCmd trials_cmd;
    auto* trials_app = app.add_subcommand("trials", "Repeated calibration/test splits");
    add_synthetic_flags(trials_app, trials_cmd.synth);
    trials_app->add_option("--annotations", trials_cmd.data.annotations, "Use a real dataset instead of synthetic");
    trials_app->add_option("--detections", trials_cmd.data.detections);
    trials_app->add_option("--contours", trials_cmd.data.contours);
    trials_app->add_flag("--lenient", trials_cmd.data.lenient);
    add_calib_flags(trials_app, trials_cmd.calib);
    trials_app->add_option("--trials", trials_cmd.trials)->capture_default_str();
    trials_app->add_option("--methods", trials_cmd.methods, "naive, ltt-objectness, ltt-depth, ltt-classifier");
    trials_app->add_option("--naive-grid", trials_cmd.naive_grid, "Grid for the naive baseline (default 0.01..0.99)");
    trials_app->add_option("--calib-fraction", trials_cmd.calib_fraction)->capture_default_str();
    trials_app->add_option("--jobs", trials_cmd.jobs)->capture_default_str();
    trials_app->add_option("--oracle-pool", trials_cmd.oracle_pool)->capture_default_str();
    trials_app->add_flag("--no-oracle", trials_cmd.no_oracle);
    trials_app->add_option("--csv", trials_cmd.csv, "Per-trial CSV")->required();
    trials_app->add_option("--summary", trials_cmd.summary, "Coverage summary JSON");

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = cli::expand_config(args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::kValidation;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kIoError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kValidation;
    }

    try {
        if (*calibrate_app) return run_calibrate(calibrate_cmd, *calibrate_app);
        if (*evaluate_app) return run_evaluate(evaluate_cmd, *evaluate_app);
        if (*depth_app) return run_depth(depth_cmd, *depth_app);
        if (*simulate_app) return run_simulate(simulate_cmd, *simulate_app);
        if (*trials_app) return run_trials_cmd(trials_cmd, *trials_app);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kIoError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kValidation;
    }
    return cli::kValidation;
}
