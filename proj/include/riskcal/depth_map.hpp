#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "riskcal/detection_data.hpp"

namespace riskcal {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

// Simple polygon, implicitly closed, in cut pixel coordinates.
struct Contour {
    std::string contour_id;
    std::vector<Point> vertices;
};

double signed_area(std::span<const Point> polygon);

// Throws ValidationError for fewer than 3 vertices, zero area or a
// self-intersecting boundary.
void check(const Contour& contour);

// Even-odd point-in-polygon test.
bool contains(std::span<const Point> polygon, Point p);

// Cell grid over the cut. A cell is interior when its center is.
class RasterMask {
public:
    RasterMask(int width, int height, Point origin = {}, double cell_size = 1.0);

    int width() const { return width_; }
    int height() const { return height_; }
    Point origin() const { return origin_; }
    double cell_size() const { return cell_size_; }

    bool inside(int col, int row) const { return cells_[index(col, row)] != 0; }
    void set(int col, int row, bool value) { cells_[index(col, row)] = value ? 1 : 0; }
    std::size_t interior_count() const;
    double interior_area() const;

    // Cell containing a point, or false when the point falls off the grid.
    bool locate(Point p, int& col, int& row) const;

    std::size_t index(int col, int row) const {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col);
    }

private:
    int width_;
    int height_;
    Point origin_;
    double cell_size_;
    std::vector<std::uint8_t> cells_;
};

constexpr int kDefaultDepthResolution = 2048;

// `resolution` cells span the longer side of the contour's bounding box; one
// exterior cell of padding surrounds it. Requires resolution >= 64.
RasterMask rasterize(const Contour& contour, int resolution = kDefaultDepthResolution);

// Exact squared Euclidean distance, in cells, from every cell center to the
// nearest exterior cell center (0 on exterior cells). Throws ValidationError
// when the mask has no exterior cell.
std::vector<std::int64_t> squared_distance_transform(const RasterMask& mask);

// Boundary distances of a rasterized region together with the swept-area
// lookup: the fraction of the interior lying no deeper than a given distance.
class DepthField {
public:
    // Throws ValidationError on an empty interior.
    explicit DepthField(RasterMask mask);

    const RasterMask& mask() const { return mask_; }
    double distance_at(int col, int row) const;  // pixels
    double max_distance() const;                  // pixels
    double total_area() const { return mask_.interior_area(); }

    // Fraction of interior cells whose distance is <= the given one; 0 for
    // exterior cells, 1 at the deepest cell.
    double swept_fraction(std::int64_t squared_cells) const;
    double swept_fraction_at(int col, int row) const;

private:
    RasterMask mask_;
    std::vector<std::int64_t> squared_;
    std::vector<std::int64_t> sorted_interior_;
};

DepthField distance_field(RasterMask mask);

struct BoxDepth {
    double depth = 0.0;
    bool center_outside = false;
};

// Depth of the box center: 0 on the contour, 1 at the deepest point, 0 (and
// flagged) when the center lies outside the region.
BoxDepth depth_of_box(const DepthField& field, const BBox& box);

struct DepthAnnotation {
    DetectionDataset dataset;
    std::size_t boxes_outside = 0;
    std::vector<std::string> warnings;
};

// Fills `depth` on every detection. Cuts with detections but no usable
// contour are an error when `strict`, otherwise get depth 0 and a warning.
DepthAnnotation annotate_depths(DetectionDataset dataset, const std::map<std::string, Contour>& contours,
                                int resolution = kDefaultDepthResolution, bool strict = true);

std::map<std::string, Contour> parse_contours(const nlohmann::json& doc, ParseMode mode = ParseMode::Strict);
std::map<std::string, Contour> load_contours(const std::filesystem::path& path, ParseMode mode = ParseMode::Strict);
nlohmann::json contours_to_json(const std::map<std::string, Contour>& contours);

}  // namespace riskcal
