#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace riskcal {

// Axis-aligned box in the cut's native pixel space. (x, y) is the top-left corner.
struct BBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double area() const { return w * h; }
    double center_x() const { return x + 0.5 * w; }
    double center_y() const { return y + 0.5 * h; }

    bool operator==(const BBox&) const = default;
};

struct ScoredDetection {
    BBox box;
    std::vector<double> class_scores;
    double objectness = 0.0;
    std::optional<double> aux_score;  // probability of a true detection from an auxiliary model
    std::optional<double> depth;      // 0 on the contour, 1 at the deepest interior point

    // Index of the highest class score (lowest index on ties); 0 when there are no scores.
    int predicted_class() const;

    bool operator==(const ScoredDetection&) const = default;
};

struct GroundTruthBox {
    BBox box;
    int class_label = 0;

    bool operator==(const GroundTruthBox&) const = default;
};

// One whole-slide cut: the unit at which precision is measured and calibrated.
struct CutRecord {
    std::string cut_id;
    std::string group_id;
    std::vector<GroundTruthBox> ground_truth;
    std::vector<ScoredDetection> detections;
    std::optional<std::string> contour_id;

    bool operator==(const CutRecord&) const = default;
};

struct DetectionDataset {
    int num_classes = 1;
    std::vector<CutRecord> cuts;

    std::size_t total_ground_truth() const;
    std::size_t total_detections() const;

    bool operator==(const DetectionDataset&) const = default;
};

struct Violation {
    std::string cut_id;
    std::string field;
    std::string message;
};

std::string to_string(const Violation& v);

enum class ParseMode { Strict, Lenient };

// Invariant check. Returns one entry per broken rule; empty means valid.
std::vector<Violation> validate(const DetectionDataset& dataset);

// Throws ValidationError listing every violation, if any.
void require_valid(const DetectionDataset& dataset);

// Annotation files carry ground truth only; detection lists come back empty.
DetectionDataset parse_annotations(const nlohmann::json& doc, ParseMode mode = ParseMode::Strict);
DetectionDataset load_annotations(const std::filesystem::path& path,
                                  ParseMode mode = ParseMode::Strict);

// Appends the detections of `doc` to the cuts they name. Cut order is kept.
DetectionDataset attach_detections(DetectionDataset dataset, const nlohmann::json& doc,
                                   ParseMode mode = ParseMode::Strict);
DetectionDataset load_detections(DetectionDataset dataset, const std::filesystem::path& path,
                                 ParseMode mode = ParseMode::Strict);

nlohmann::json annotations_to_json(const DetectionDataset& dataset);
nlohmann::json detections_to_json(const DetectionDataset& dataset);

// Reads and parses a JSON file; parse errors report line and column.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace riskcal
