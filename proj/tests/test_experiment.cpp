#include <set>
#include <sstream>

#include "doctest.h"
#include "riskcal/error.hpp"
#include "riskcal/experiment.hpp"
#include "support.hpp"

using namespace riskcal;

namespace {

DetectionDataset grouped(std::size_t groups, std::size_t per_group) {
    DetectionDataset ds;
    for (std::size_t g = 0; g < groups; ++g) {
        for (std::size_t k = 0; k < per_group; ++k) {
            ds.cuts.push_back(test::cut("c" + std::to_string(g) + "_" + std::to_string(k), {}, {},
                                        "m" + std::to_string(g)));
        }
    }
    return ds;
}

std::set<std::string> groups_of(const DetectionDataset& ds) {
    std::set<std::string> s;
    for (const auto& c : ds.cuts) s.insert(c.group_id);
    return s;
}

std::string csv_of(const TrialRun& run) {
    std::ostringstream out;
    write_trials_csv(out, run.reports);
    return out.str();
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("mix_seed is a fixed function with distinct outputs") {
    CHECK(mix_seed(1, 2) == mix_seed(1, 2));
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 10; ++s) {
        for (std::uint64_t i = 0; i < 100; ++i) seen.insert(mix_seed(s, i));
    }
    CHECK(seen.size() == 1000);
}

TEST_CASE("group split") {
    SUBCASE("two groups, one each side") {
        const auto split = group_split(grouped(2, 3), {0.5, "group_id", 4});
        CHECK(groups_of(split.calibration).size() == 1);
        CHECK(groups_of(split.test).size() == 1);
        CHECK(split.calibration.cuts.size() == 3);
    }
    SUBCASE("92 groups, half to calibration") {
        const auto ds = grouped(92, 2);
        const auto split = group_split(ds, {0.5, "group_id", 17});
        CHECK(groups_of(split.calibration).size() == 46);
        for (const auto& g : groups_of(split.calibration)) CHECK(groups_of(split.test).count(g) == 0);
        CHECK(split.calibration.cuts.size() + split.test.cuts.size() == ds.cuts.size());
    }
    SUBCASE("deterministic in the seed, and the seed matters") {
        const auto ds = grouped(30, 1);
        const auto a = group_split(ds, {0.5, "group_id", 9});
        const auto b = group_split(ds, {0.5, "group_id", 9});
        CHECK(a.calibration == b.calibration);
        CHECK(a.test == b.test);
        bool differs = false;
        for (std::uint64_t s = 10; s < 15; ++s) differs |= group_split(ds, {0.5, "group_id", s}).calibration != a.calibration;
        CHECK(differs);
    }
    SUBCASE("cut-level split and clamping") {
        const auto split = group_split(grouped(1, 10), {0.5, "cut_id", 1});
        CHECK(split.calibration.cuts.size() == 5);
        const auto tiny = group_split(grouped(3, 1), {0.01, "group_id", 1});
        CHECK(tiny.calibration.cuts.size() == 1);
        const auto big = group_split(grouped(3, 1), {0.99, "group_id", 1});
        CHECK(big.test.cuts.size() == 1);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(group_split(grouped(1, 4), {0.5, "group_id", 1}), ValidationError);
        CHECK_THROWS_AS(group_split(grouped(4, 1), {1.0, "group_id", 1}), ValidationError);
        CHECK_THROWS_AS(group_split(grouped(4, 1), {0.5, "mouse", 1}), ValidationError);
    }
}

TEST_CASE("synthetic generator") {
    SyntheticConfig c;
    c.num_cuts = 1000;
    const auto data = synth_generate(c);
    const auto& ds = data.dataset;
    CHECK(validate(ds).empty());
    CHECK(ds.cuts.size() == 1000);
    const double mean_gt = static_cast<double>(ds.total_ground_truth()) / 1000.0;
    CHECK(std::fabs(mean_gt - 12.0) / 12.0 < 0.05);
    CHECK(data.contours.count("disk") == 1);
    CHECK(ds.cuts[5].group_id == "g1");
    for (const auto& cut : ds.cuts) {
        for (const auto& d : cut.detections) {
            CHECK(d.aux_score.has_value());
            CHECK(d.depth.has_value());
        }
    }

    SUBCASE("chunked generation matches one-shot generation") {
        SyntheticConfig part = c;
        part.num_cuts = 10;
        const auto tail = synth_generate(part, 990).dataset;
        for (std::size_t i = 0; i < 10; ++i) CHECK(tail.cuts[i] == ds.cuts[990 + i]);
    }
    SUBCASE("no false positives: precision 1 at every lambda") {
        SyntheticConfig clean = c;
        clean.num_cuts = 100;
        clean.fp_per_cut = 0.0;
        const auto clean_ds = synth_generate(clean).dataset;
        for (double l : {0.0, 0.3, 0.6, 0.9}) CHECK(mean_metrics(clean_ds, DecisionRule::objectness(l), {}).precision == 1.0);
    }
    SUBCASE("no true detections: recall 0 on every cut with ground truth") {
        SyntheticConfig blind = c;
        blind.num_cuts = 100;
        blind.tp_detect_prob = 0.0;
        for (const auto& cut : synth_generate(blind).dataset.cuts) {
            if (!cut.ground_truth.empty()) CHECK(cut_recall(cut, DecisionRule::objectness(0.0), {}) == 0.0);
        }
    }
    SUBCASE("stored depth matches the disk formula at the box center") {
        const auto disk = synthetic_disk(c);
        const double R = 0.45 * c.cut_size;
        for (std::size_t i = 0; i < 20; ++i) {
            for (const auto& d : ds.cuts[i].detections) {
                const double dx = d.box.center_x() - c.cut_size / 2;
                const double dy = d.box.center_y() - c.cut_size / 2;
                CHECK(*d.depth == doctest::Approx(std::max(0.0, 1 - (dx * dx + dy * dy) / (R * R))).epsilon(1e-9));
            }
        }
        CHECK(disk.vertices.size() == 512);
    }
    SUBCASE("config JSON round trip and checks") {
        SyntheticConfig custom = c;
        custom.aux_signal = 0.7;
        custom.tp_objectness = {3, 1.5};
        const auto back = synthetic_config_from_json(to_json(custom));
        CHECK(to_json(back) == to_json(custom));
        auto bad = to_json(custom);
        bad["colour"] = 1;
        CHECK_THROWS_AS(synthetic_config_from_json(bad), ValidationError);
        custom.aux_signal = 2.0;
        CHECK_THROWS_AS(check(custom), ValidationError);
    }
}

TEST_CASE("true risk oracle") {
    SyntheticConfig c;
    c.fp_per_cut = 0.0;
    const std::vector<DecisionRule> rules{DecisionRule::objectness(0.1), DecisionRule::objectness(0.8),
                                          DecisionRule::objectness_classifier(0.5, 0.5)};
    for (const auto& [key, m] : true_risk_oracle(c, rules, 2000)) CHECK(m.precision == 1.0);

    SyntheticConfig noisy;
    const std::vector<DecisionRule> nothing{DecisionRule::objectness(2.0)};
    CHECK(true_risk_oracle(noisy, nothing, 500).at(key_of(nothing[0])).precision == 1.0);

    const std::vector<DecisionRule> grid{DecisionRule::objectness(0.3), DecisionRule::objectness(0.6)};
    const auto small = true_risk_oracle(noisy, grid, 10000);
    const auto large = true_risk_oracle(noisy, grid, 20000);
    for (const auto& r : grid) {
        CHECK(std::fabs(small.at(key_of(r)).precision - large.at(key_of(r)).precision) < 0.01);
    }
    CHECK_THROWS_AS(true_risk_oracle(noisy, grid, 0), ValidationError);
}

TEST_CASE("summary statistics") {
    const auto q = quantiles({4.0, 1.0, 3.0, 2.0});
    CHECK(q.q1 == doctest::Approx(1.75));
    CHECK(q.median == doctest::Approx(2.5));
    CHECK(q.q3 == doctest::Approx(3.25));
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const auto iv = mean_interval(v);
    CHECK(iv.mean == 2.5);
    const double half = 1.96 * std::sqrt(5.0 / 3.0) / 2.0;
    CHECK(iv.high - iv.mean == doctest::Approx(half));
    CHECK(iv.mean - iv.low == doctest::Approx(half));
}

TEST_CASE("methods") {
    for (Method m : all_methods()) CHECK(parse_method(to_string(m)) == m);
    CHECK_THROWS_AS(parse_method("ltt"), ValidationError);
    CHECK(default_naive_grid().size() == 99);
}

TEST_CASE("trials") {
    SyntheticConfig c;
    c.num_cuts = 40;
    TrialSettings s;
    s.calibration.target_precision = 0.8;
    s.calibration.delta = 0.1;
    s.num_trials = 6;
    s.oracle_pool = 2000;

    const auto a = run_trials(c, s);
    REQUIRE(a.reports.size() == 6);
    CHECK(a.summary.methods.size() == 4);
    for (const auto& r : a.reports) {
        CHECK(r.calibration_cuts == 20);
        CHECK(r.outcomes.size() == 4);
        for (const auto& o : r.outcomes) {
            CHECK(o.oracle_precision.has_value());
            if (o.abstained()) CHECK(o.test.precision == 1.0);
        }
    }

    SUBCASE("reports do not depend on the thread count") {
        s.jobs = 3;
        const auto b = run_trials(c, s);
        CHECK(csv_of(a) == csv_of(b));
        CHECK(to_json(a.summary) == to_json(b.summary));
    }
    SUBCASE("one trial: the summary is that trial") {
        s.num_trials = 1;
        s.with_oracle = false;
        const auto one = run_trials(c, s);
        const auto& m = one.summary.at(Method::LttObjectness);
        const auto& o = one.reports[0].outcomes[1];
        CHECK(m.trials == 1);
        CHECK(m.mean_precision.mean == o.test.precision);
        CHECK(m.recall.median == o.test.recall);
        CHECK(m.violation_rate == (o.test.precision < 0.8 ? 1.0 : 0.0));
        CHECK_FALSE(m.oracle_violation_rate.has_value());
        std::ostringstream csv;
        write_trials_csv(csv, one.reports);
        const std::string text = csv.str();
        CHECK(text.rfind("trial,method,lambda,mu,abstained,", 0) == 0);
        CHECK(std::count(text.begin(), text.end(), '\n') == 5);
    }
    SUBCASE("a fixed dataset is re-split each trial") {
        const auto ds = synth_generate(c).dataset;
        s.methods = {Method::Naive, Method::LttObjectness};
        const auto run = run_trials(ds, s);
        CHECK(run.reports[0].split_seed != run.reports[1].split_seed);
        CHECK_FALSE(run.reports[0].outcomes[0].oracle_precision.has_value());
    }
    SUBCASE("errors") {
        s.num_trials = 0;
        CHECK_THROWS_AS(run_trials(c, s), ValidationError);
        s.num_trials = 1;
        c.with_aux = false;
        s.methods = {Method::LttClassifier};
        CHECK_THROWS_AS(run_trials(c, s), ValidationError);
    }
}

}  // TEST_SUITE
