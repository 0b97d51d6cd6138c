#include "riskcal/detection_data.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "riskcal/error.hpp"

namespace riskcal {

using nlohmann::json;

int ScoredDetection::predicted_class() const {
    int best = 0;
    for (std::size_t k = 1; k < class_scores.size(); ++k) {
        if (class_scores[k] > class_scores[best]) best = static_cast<int>(k);
    }
    return best;
}

std::size_t DetectionDataset::total_ground_truth() const {
    std::size_t n = 0;
    for (const auto& cut : cuts) n += cut.ground_truth.size();
    return n;
}

std::size_t DetectionDataset::total_detections() const {
    std::size_t n = 0;
    for (const auto& cut : cuts) n += cut.detections.size();
    return n;
}

std::string to_string(const Violation& v) {
    return "cut '" + v.cut_id + "': " + v.field + ": " + v.message;
}

namespace {

bool in_unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

void check_box(const BBox& b, const std::string& cut_id, const std::string& where,
               std::vector<Violation>& out) {
    for (auto [name, value] : {std::pair{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}}) {
        if (!std::isfinite(value)) out.push_back({cut_id, where + "." + name, "not finite"});
    }
    if (std::isfinite(b.w) && !(b.w > 0.0)) out.push_back({cut_id, where + ".w", "w > 0"});
    if (std::isfinite(b.h) && !(b.h > 0.0)) out.push_back({cut_id, where + ".h", "h > 0"});
}

// Walks a JSON object, recording the dotted path for error messages.
class Fields {
public:
    Fields(const json& obj, std::string path, ParseMode mode) : obj_(obj), path_(std::move(path)), mode_(mode) {
        if (!obj_.is_object()) fail("", "expected an object");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ValidationError(path_ + (key.empty() ? "" : "." + key) + ": " + what);
    }

    const json* find(const char* key) const {
        auto it = obj_.find(key);
        if (it == obj_.end() || it->is_null()) return nullptr;
        return &*it;
    }

    const json& require(const char* key) const {
        const json* v = find(key);
        if (v == nullptr) fail(key, "missing field");
        return *v;
    }

    double number(const char* key) const {
        const json& v = require(key);
        if (!v.is_number()) fail(key, "expected a number");
        return v.get<double>();
    }

    std::optional<double> optional_number(const char* key) const {
        const json* v = find(key);
        if (v == nullptr) return std::nullopt;
        if (!v->is_number()) fail(key, "expected a number");
        return v->get<double>();
    }

    std::string string(const char* key) const {
        const json& v = require(key);
        if (!v.is_string()) fail(key, "expected a string");
        return v.get<std::string>();
    }

    std::optional<std::string> optional_string(const char* key) const {
        const json* v = find(key);
        if (v == nullptr) return std::nullopt;
        if (!v->is_string()) fail(key, "expected a string");
        return v->get<std::string>();
    }

    const json& array(const char* key) const {
        const json& v = require(key);
        if (!v.is_array()) fail(key, "expected an array");
        return v;
    }

    void reject_unknown(std::initializer_list<const char*> known) const {
        if (mode_ == ParseMode::Lenient) return;
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            bool ok = false;
            for (const char* k : known) ok = ok || it.key() == k;
            if (!ok) fail(it.key(), "unknown field");
        }
    }

    const std::string& path() const { return path_; }

private:
    const json& obj_;
    std::string path_;
    ParseMode mode_;
};

BBox read_box(const Fields& f) {
    return BBox{f.number("x"), f.number("y"), f.number("w"), f.number("h")};
}

std::string line_context(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

json box_json(const BBox& b) { return json{{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}}; }

}  // namespace

std::vector<Violation> validate(const DetectionDataset& dataset) {
    std::vector<Violation> out;
    if (dataset.num_classes < 1) out.push_back({"", "num_classes", "K >= 1"});
    std::unordered_set<std::string> seen;
    for (const auto& cut : dataset.cuts) {
        if (cut.cut_id.empty()) out.push_back({cut.cut_id, "cut_id", "must be non-empty"});
        if (!seen.insert(cut.cut_id).second) out.push_back({cut.cut_id, "cut_id", "duplicate cut id"});
        for (std::size_t i = 0; i < cut.ground_truth.size(); ++i) {
            const auto& gt = cut.ground_truth[i];
            const std::string where = "ground_truth[" + std::to_string(i) + "]";
            check_box(gt.box, cut.cut_id, where, out);
            if (gt.class_label < 0 || gt.class_label >= dataset.num_classes) {
                out.push_back({cut.cut_id, where + ".class", "invalid class label " + std::to_string(gt.class_label)});
            }
        }
        for (std::size_t i = 0; i < cut.detections.size(); ++i) {
            const auto& d = cut.detections[i];
            const std::string where = "detections[" + std::to_string(i) + "]";
            check_box(d.box, cut.cut_id, where, out);
            if (!in_unit(d.objectness)) out.push_back({cut.cut_id, where + ".objectness", "outside [0,1]"});
            if (d.class_scores.size() != static_cast<std::size_t>(dataset.num_classes)) {
                out.push_back({cut.cut_id, where + ".class_scores", "length differs from num_classes"});
            }
            for (double s : d.class_scores) {
                if (!in_unit(s)) {
                    out.push_back({cut.cut_id, where + ".class_scores", "outside [0,1]"});
                    break;
                }
            }
            if (d.aux_score && !in_unit(*d.aux_score)) out.push_back({cut.cut_id, where + ".aux_score", "outside [0,1]"});
            if (d.depth && !in_unit(*d.depth)) out.push_back({cut.cut_id, where + ".depth", "outside [0,1]"});
        }
    }
    return out;
}

void require_valid(const DetectionDataset& dataset) {
    auto violations = validate(dataset);
    if (violations.empty()) return;
    std::string msg = "invalid dataset:";
    for (const auto& v : violations) msg += "\n  " + to_string(v);
    throw ValidationError(msg);
}

DetectionDataset parse_annotations(const json& doc, ParseMode mode) {
    Fields top(doc, "annotations", mode);
    top.reject_unknown({"num_classes", "cuts"});
    const json& k = top.require("num_classes");
    if (!k.is_number_integer()) top.fail("num_classes", "expected an integer");

    DetectionDataset ds;
    ds.num_classes = k.get<int>();
    const json& cuts = top.array("cuts");
    ds.cuts.reserve(cuts.size());
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        Fields c(cuts[i], "cuts[" + std::to_string(i) + "]", mode);
        c.reject_unknown({"cut_id", "group_id", "ground_truth", "contour_id"});
        CutRecord cut;
        cut.cut_id = c.string("cut_id");
        cut.group_id = c.string("group_id");
        cut.contour_id = c.optional_string("contour_id");
        const json& gts = c.array("ground_truth");
        for (std::size_t j = 0; j < gts.size(); ++j) {
            Fields g(gts[j], c.path() + ".ground_truth[" + std::to_string(j) + "]", mode);
            g.reject_unknown({"x", "y", "w", "h", "class"});
            const json& label = g.require("class");
            if (!label.is_number_integer()) g.fail("class", "expected an integer");
            cut.ground_truth.push_back({read_box(g), label.get<int>()});
        }
        ds.cuts.push_back(std::move(cut));
    }
    require_valid(ds);
    return ds;
}

DetectionDataset load_annotations(const std::filesystem::path& path, ParseMode mode) {
    return parse_annotations(read_json_file(path), mode);
}

DetectionDataset attach_detections(DetectionDataset dataset, const json& doc, ParseMode mode) {
    Fields top(doc, "detections-file", mode);
    top.reject_unknown({"detections"});
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < dataset.cuts.size(); ++i) index.emplace(dataset.cuts[i].cut_id, i);

    const json& dets = top.array("detections");
    for (std::size_t i = 0; i < dets.size(); ++i) {
        Fields f(dets[i], "detections[" + std::to_string(i) + "]", mode);
        f.reject_unknown({"cut_id", "x", "y", "w", "h", "objectness", "class_scores", "aux_score", "depth"});
        const std::string cut_id = f.string("cut_id");
        auto it = index.find(cut_id);
        if (it == index.end()) f.fail("cut_id", "unknown cut id '" + cut_id + "'");

        ScoredDetection d;
        d.box = read_box(f);
        d.objectness = f.number("objectness");
        if (!in_unit(d.objectness)) f.fail("objectness", "outside [0,1]");
        for (const json& s : f.array("class_scores")) {
            if (!s.is_number()) f.fail("class_scores", "expected numbers");
            d.class_scores.push_back(s.get<double>());
        }
        if (d.class_scores.size() != static_cast<std::size_t>(dataset.num_classes)) {
            f.fail("class_scores", "length " + std::to_string(d.class_scores.size()) + " differs from num_classes " +
                                       std::to_string(dataset.num_classes));
        }
        d.aux_score = f.optional_number("aux_score");
        d.depth = f.optional_number("depth");
        dataset.cuts[it->second].detections.push_back(std::move(d));
    }
    require_valid(dataset);
    return dataset;
}

DetectionDataset load_detections(DetectionDataset dataset, const std::filesystem::path& path, ParseMode mode) {
    return attach_detections(std::move(dataset), read_json_file(path), mode);
}

json annotations_to_json(const DetectionDataset& dataset) {
    json cuts = json::array();
    for (const auto& cut : dataset.cuts) {
        json gts = json::array();
        for (const auto& gt : cut.ground_truth) {
            json g = box_json(gt.box);
            g["class"] = gt.class_label;
            gts.push_back(std::move(g));
        }
        json c{{"cut_id", cut.cut_id}, {"group_id", cut.group_id}, {"ground_truth", std::move(gts)}};
        if (cut.contour_id) c["contour_id"] = *cut.contour_id;
        cuts.push_back(std::move(c));
    }
    return json{{"num_classes", dataset.num_classes}, {"cuts", std::move(cuts)}};
}

json detections_to_json(const DetectionDataset& dataset) {
    json dets = json::array();
    for (const auto& cut : dataset.cuts) {
        for (const auto& d : cut.detections) {
            json j = box_json(d.box);
            j["cut_id"] = cut.cut_id;
            j["objectness"] = d.objectness;
            j["class_scores"] = d.class_scores;
            if (d.aux_score) j["aux_score"] = *d.aux_score;
            if (d.depth) j["depth"] = *d.depth;
            dets.push_back(std::move(j));
        }
    }
    return json{{"detections", std::move(dets)}};
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": parse error at " + line_context(text, e.byte == 0 ? 0 : e.byte - 1) +
                              ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace riskcal
