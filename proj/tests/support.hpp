#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "riskcal/detection_data.hpp"

namespace riskcal::test {

inline std::filesystem::path data_path(const std::string& name) {
    return std::filesystem::path(RISKCAL_TEST_DATA_DIR) / name;
}

inline ScoredDetection det(double x, double y, double w, double h, double objectness, int num_classes = 1,
                           int cls = 0) {
    ScoredDetection d;
    d.box = {x, y, w, h};
    d.objectness = objectness;
    d.class_scores.assign(static_cast<std::size_t>(num_classes), 0.0);
    d.class_scores[static_cast<std::size_t>(cls)] = 1.0;
    return d;
}

inline GroundTruthBox gt(double x, double y, double w, double h, int cls = 0) { return {{x, y, w, h}, cls}; }

inline CutRecord cut(std::string id, std::vector<GroundTruthBox> gts, std::vector<ScoredDetection> dets,
                     std::string group = "") {
    CutRecord c;
    c.group_id = group.empty() ? id : std::move(group);
    c.cut_id = std::move(id);
    c.ground_truth = std::move(gts);
    c.detections = std::move(dets);
    return c;
}

// Fresh scratch directory under the build tree.
std::filesystem::path scratch_dir(const std::string& name);

// ---- independent oracles

// log P(Bin(n, p) <= k), from an exact integer sum over the dyadic expansion of p.
double oracle_binom_cdf_log(std::int64_t k, std::int64_t n, double p);

// Hoeffding-Bentkus log p-value with r_hat = num / den taken as an exact
// rational, evaluated with 256-bit floating point.
double oracle_hb_log_pvalue(std::int64_t n, std::int64_t num, std::int64_t den, double alpha);

// Bernoulli KL divergence by direct summation over the two outcomes.
long double direct_kl(long double a, long double b);

// Squared distance from every cell to the nearest exterior cell by exhaustive search.
std::vector<std::int64_t> brute_force_sq_distance(const std::vector<std::uint8_t>& inside, int width, int height);

}  // namespace riskcal::test
