#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "riskcal/detection_data.hpp"
#include "riskcal/error.hpp"
#include "support.hpp"

using namespace riskcal;
using riskcal::test::data_path;

TEST_SUITE("detection-data") {

TEST_CASE("load_annotations keeps cuts and ground truth") {
    const auto ds = load_annotations(data_path("two_cuts_annotations.json"));
    CHECK(ds.num_classes == 2);
    REQUIRE(ds.cuts.size() == 2);
    CHECK(ds.total_ground_truth() == 3);
    CHECK(ds.total_detections() == 0);
    CHECK(ds.cuts[0].cut_id == "c1");
    CHECK(ds.cuts[0].contour_id == std::optional<std::string>("disk"));
    CHECK_FALSE(ds.cuts[1].contour_id.has_value());
    CHECK(ds.cuts[1].ground_truth[0].box == BBox{5.5, 7.25, 12, 12});
    CHECK(validate(ds).empty());
}

TEST_CASE("duplicate cut id is rejected") {
    CHECK_THROWS_WITH_AS(load_annotations(data_path("duplicate_cut_annotations.json")),
                         doctest::Contains("duplicate cut id"), ValidationError);
}

TEST_CASE("empty cut list is a valid empty dataset") {
    const auto ds = load_annotations(data_path("empty_annotations.json"));
    CHECK(ds.cuts.empty());
    CHECK(validate(ds).empty());
}

TEST_CASE("missing file is an I/O error, broken JSON reports its position") {
    CHECK_THROWS_AS(load_annotations(data_path("no_such_file.json")), IoError);
    CHECK_THROWS_WITH_AS(load_annotations(data_path("syntax_error.json")), doctest::Contains("line 2"),
                         ValidationError);
}

TEST_CASE("strict mode rejects unknown fields, lenient mode ignores them") {
    auto doc = read_json_file(data_path("two_cuts_annotations.json"));
    doc["cuts"][0]["stain"] = "HE";
    CHECK_THROWS_WITH_AS(parse_annotations(doc), doctest::Contains("stain"), ValidationError);
    CHECK(parse_annotations(doc, ParseMode::Lenient).cuts.size() == 2);
}

TEST_CASE("invalid class label is rejected") {
    auto doc = read_json_file(data_path("two_cuts_annotations.json"));
    doc["cuts"][1]["ground_truth"][0]["class"] = 2;
    CHECK_THROWS_WITH_AS(parse_annotations(doc), doctest::Contains("invalid class label"), ValidationError);
}

TEST_CASE("load_detections attaches to the named cuts") {
    const auto base = load_annotations(data_path("two_cuts_annotations.json"));
    const auto ds = load_detections(base, data_path("two_cuts_detections.json"));
    REQUIRE(ds.cuts.size() == 2);
    CHECK(ds.cuts[0].cut_id == "c1");
    CHECK(ds.cuts[0].detections.size() == 2);
    CHECK(ds.cuts[1].detections.size() == 1);
    CHECK(ds.total_detections() == 3);
    CHECK(ds.cuts[0].detections[0].aux_score == std::optional<double>(0.7));
    CHECK_FALSE(ds.cuts[0].detections[0].depth.has_value());
    CHECK(ds.cuts[1].detections[0].depth == std::optional<double>(0.25));
    CHECK(ds.cuts[0].detections[1].predicted_class() == 1);
    CHECK(ds.cuts[0].ground_truth == base.cuts[0].ground_truth);
}

TEST_CASE("load_detections errors") {
    const auto base = load_annotations(data_path("two_cuts_annotations.json"));
    CHECK_THROWS_WITH_AS(load_detections(base, data_path("bad_objectness_detections.json")),
                         doctest::Contains("objectness"), ValidationError);
    CHECK_THROWS_WITH_AS(load_detections(base, data_path("unknown_cut_detections.json")),
                         doctest::Contains("unknown cut id 'c99'"), ValidationError);
    CHECK_THROWS_WITH_AS(load_detections(base, data_path("wrong_scores_detections.json")),
                         doctest::Contains("class_scores"), ValidationError);
}

TEST_CASE("validate reports one violation per broken field") {
    DetectionDataset ds;
    ds.cuts.push_back(test::cut("a", {test::gt(0, 0, 10, 10)}, {test::det(0, 0, 10, 10, 0.5)}));
    ds.cuts.push_back(test::cut("b", {test::gt(0, 0, 10, 10)}, {}));
    CHECK(validate(ds).empty());

    SUBCASE("NaN coordinate") {
        ds.cuts[1].ground_truth[0].box.x = std::numeric_limits<double>::quiet_NaN();
        const auto v = validate(ds);
        REQUIRE(v.size() == 1);
        CHECK(v[0].cut_id == "b");
    }
    SUBCASE("negative width") {
        ds.cuts[0].detections[0].box.w = -3;
        const auto v = validate(ds);
        REQUIRE(v.size() == 1);
        CHECK(v[0].cut_id == "a");
        CHECK(v[0].message == "w > 0");
    }
    SUBCASE("score ranges") {
        ds.cuts[0].detections[0].aux_score = 1.5;
        ds.cuts[0].detections[0].depth = -0.1;
        CHECK(validate(ds).size() == 2);
        CHECK_THROWS_AS(require_valid(ds), ValidationError);
    }
}

TEST_CASE("round trip through JSON reproduces random datasets field by field") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 25; ++rep) {
        DetectionDataset ds;
        ds.num_classes = 1 + static_cast<int>(rng() % 3);
        const int cuts = static_cast<int>(rng() % 5);
        for (int c = 0; c < cuts; ++c) {
            CutRecord cut;
            cut.cut_id = "cut" + std::to_string(c);
            cut.group_id = "g" + std::to_string(c / 2);
            if (rng() % 2) cut.contour_id = "poly" + std::to_string(c);
            for (int g = static_cast<int>(rng() % 4); g > 0; --g) {
                cut.ground_truth.push_back(
                    {{u(rng) * 1e4, u(rng) * 1e4, 1 + u(rng) * 50, 1 + u(rng) * 50},
                     static_cast<int>(rng() % static_cast<unsigned>(ds.num_classes))});
            }
            for (int d = static_cast<int>(rng() % 5); d > 0; --d) {
                ScoredDetection det;
                det.box = {u(rng) * 1e4, u(rng) * 1e4, 1 + u(rng) * 50, 1 + u(rng) * 50};
                det.objectness = u(rng);
                for (int k = 0; k < ds.num_classes; ++k) det.class_scores.push_back(u(rng));
                if (rng() % 2) det.aux_score = u(rng);
                if (rng() % 2) det.depth = u(rng);
                cut.detections.push_back(det);
            }
            ds.cuts.push_back(cut);
        }
        REQUIRE(validate(ds).empty());
        const auto ann = nlohmann::json::parse(annotations_to_json(ds).dump());
        const auto dets = nlohmann::json::parse(detections_to_json(ds).dump());
        const auto back = attach_detections(parse_annotations(ann), dets);
        CHECK(back == ds);
    }
}

}  // TEST_SUITE
