#include "riskcal/depth_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "riskcal/error.hpp"

namespace riskcal {

using nlohmann::json;

double signed_area(std::span<const Point> polygon) {
    double twice = 0.0;
    for (std::size_t i = 0, n = polygon.size(); i < n; ++i) {
        const Point& a = polygon[i];
        const Point& b = polygon[(i + 1) % n];
        twice += a.x * b.y - b.x * a.y;
    }
    return 0.5 * twice;
}

namespace {

double cross(Point o, Point a, Point b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

bool on_segment(Point a, Point b, Point p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Point p1, Point p2, Point q1, Point q2) {
    const double d1 = cross(q1, q2, p1);
    const double d2 = cross(q1, q2, p2);
    const double d3 = cross(p1, p2, q1);
    const double d4 = cross(p1, p2, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
    if (d1 == 0 && on_segment(q1, q2, p1)) return true;
    if (d2 == 0 && on_segment(q1, q2, p2)) return true;
    if (d3 == 0 && on_segment(p1, p2, q1)) return true;
    if (d4 == 0 && on_segment(p1, p2, q2)) return true;
    return false;
}

}  // namespace

void check(const Contour& contour) {
    const auto& v = contour.vertices;
    const std::string id = "contour '" + contour.contour_id + "': ";
    if (v.size() < 3) throw ValidationError(id + "degenerate polygon (fewer than 3 vertices)");
    for (const auto& p : v) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ValidationError(id + "non-finite vertex");
    }
    if (!(std::fabs(signed_area(v)) > 0.0)) throw ValidationError(id + "degenerate polygon (zero area)");
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            // Neighbouring edges share a vertex by construction.
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;
            if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n])) {
                throw ValidationError(id + "self-intersecting boundary (edges " + std::to_string(i) + " and " +
                                      std::to_string(j) + ")");
            }
        }
    }
}

bool contains(std::span<const Point> polygon, Point p) {
    bool in = false;
    for (std::size_t i = 0, n = polygon.size(), j = n - 1; i < n; j = i++) {
        const Point& a = polygon[i];
        const Point& b = polygon[j];
        if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) in = !in;
    }
    return in;
}

RasterMask::RasterMask(int width, int height, Point origin, double cell_size)
    : width_(width), height_(height), origin_(origin), cell_size_(cell_size) {
    if (width <= 0 || height <= 0) throw ValidationError("raster mask needs positive dimensions");
    if (!(cell_size > 0.0)) throw ValidationError("raster cell size must be positive");
    cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

std::size_t RasterMask::interior_count() const {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

double RasterMask::interior_area() const {
    return static_cast<double>(interior_count()) * cell_size_ * cell_size_;
}

bool RasterMask::locate(Point p, int& col, int& row) const {
    const double fc = std::floor((p.x - origin_.x) / cell_size_);
    const double fr = std::floor((p.y - origin_.y) / cell_size_);
    if (!(fc >= 0.0 && fr >= 0.0 && fc < width_ && fr < height_)) return false;
    col = static_cast<int>(fc);
    row = static_cast<int>(fr);
    return true;
}

RasterMask rasterize(const Contour& contour, int resolution) {
    if (resolution < 64) throw ValidationError("raster resolution must be at least 64");
    check(contour);
    const auto& v = contour.vertices;
    auto [min_x, max_x] = std::minmax_element(v.begin(), v.end(), [](Point a, Point b) { return a.x < b.x; });
    auto [min_y, max_y] = std::minmax_element(v.begin(), v.end(), [](Point a, Point b) { return a.y < b.y; });
    const double span_x = max_x->x - min_x->x;
    const double span_y = max_y->y - min_y->y;
    const double cell = std::max(span_x, span_y) / resolution;
    const int width = static_cast<int>(std::ceil(span_x / cell)) + 2;
    const int height = static_cast<int>(std::ceil(span_y / cell)) + 2;
    RasterMask mask(width, height, Point{min_x->x - cell, min_y->y - cell}, cell);

    const Point o = mask.origin();
    std::vector<double> crossings;
    for (int row = 0; row < height; ++row) {
        const double yc = o.y + (row + 0.5) * cell;
        crossings.clear();
        for (std::size_t i = 0, n = v.size(); i < n; ++i) {
            const Point& a = v[i];
            const Point& b = v[(i + 1) % n];
            if ((a.y > yc) != (b.y > yc)) crossings.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
        }
        std::sort(crossings.begin(), crossings.end());
        for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
            // Cells whose center x lies in [x0, x1).
            const int c0 = std::max(0, static_cast<int>(std::ceil((crossings[k] - o.x) / cell - 0.5)));
            const int c1 = std::min(width, static_cast<int>(std::ceil((crossings[k + 1] - o.x) / cell - 0.5)));
            for (int c = c0; c < c1; ++c) mask.set(c, row, true);
        }
    }
    return mask;
}

namespace {

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher), one line at a time.
void transform_1d(std::span<const double> f, std::span<double> d, std::vector<int>& v, std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    constexpr double inf = std::numeric_limits<double>::infinity();
    int k = 0;
    v[0] = 0;
    z[0] = -inf;
    z[1] = inf;
    for (int q = 1; q < n; ++q) {
        if (f[q] == inf) continue;
        if (f[v[k]] == inf) {
            v[k] = q;
            continue;
        }
        double s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
        while (s <= z[k]) {
            --k;
            s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = inf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = double(q - v[k]);
        d[q] = f[v[k]] == inf ? inf : dq * dq + f[v[k]];
    }
}

}  // namespace

std::vector<std::int64_t> squared_distance_transform(const RasterMask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    if (mask.interior_count() == static_cast<std::size_t>(w) * static_cast<std::size_t>(h)) {
        throw ValidationError("distance transform needs at least one exterior cell");
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> grid(static_cast<std::size_t>(w) * h);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) grid[mask.index(c, r)] = mask.inside(c, r) ? inf : 0.0;
    }

    const int longest = std::max(w, h);
    std::vector<double> f(longest);
    std::vector<double> d(longest);
    std::vector<int> v(longest);
    std::vector<double> z(longest + 1);

    for (int c = 0; c < w; ++c) {
        for (int r = 0; r < h; ++r) f[r] = grid[mask.index(c, r)];
        transform_1d(std::span(f).first(h), std::span(d).first(h), v, z);
        for (int r = 0; r < h; ++r) grid[mask.index(c, r)] = d[r];
    }
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) f[c] = grid[mask.index(c, r)];
        transform_1d(std::span(f).first(w), std::span(d).first(w), v, z);
        for (int c = 0; c < w; ++c) grid[mask.index(c, r)] = d[c];
    }

    std::vector<std::int64_t> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = static_cast<std::int64_t>(std::llround(grid[i]));
    return out;
}

DepthField::DepthField(RasterMask mask) : mask_(std::move(mask)) {
    if (mask_.interior_count() == 0) throw ValidationError("depth field needs a non-empty interior");
    squared_ = squared_distance_transform(mask_);
    sorted_interior_.reserve(mask_.interior_count());
    for (int r = 0; r < mask_.height(); ++r) {
        for (int c = 0; c < mask_.width(); ++c) {
            if (mask_.inside(c, r)) sorted_interior_.push_back(squared_[mask_.index(c, r)]);
        }
    }
    std::sort(sorted_interior_.begin(), sorted_interior_.end());
}

double DepthField::distance_at(int col, int row) const {
    return std::sqrt(static_cast<double>(squared_[mask_.index(col, row)])) * mask_.cell_size();
}

double DepthField::max_distance() const {
    return std::sqrt(static_cast<double>(sorted_interior_.back())) * mask_.cell_size();
}

double DepthField::swept_fraction(std::int64_t squared_cells) const {
    const auto it = std::upper_bound(sorted_interior_.begin(), sorted_interior_.end(), squared_cells);
    return static_cast<double>(it - sorted_interior_.begin()) / static_cast<double>(sorted_interior_.size());
}

double DepthField::swept_fraction_at(int col, int row) const {
    if (!mask_.inside(col, row)) return 0.0;
    return swept_fraction(squared_[mask_.index(col, row)]);
}

DepthField distance_field(RasterMask mask) { return DepthField(std::move(mask)); }

BoxDepth depth_of_box(const DepthField& field, const BBox& box) {
    int col = 0;
    int row = 0;
    if (!field.mask().locate({box.center_x(), box.center_y()}, col, row) || !field.mask().inside(col, row)) {
        return {0.0, true};
    }
    return {field.swept_fraction_at(col, row), false};
}

DepthAnnotation annotate_depths(DetectionDataset dataset, const std::map<std::string, Contour>& contours,
                                int resolution, bool strict) {
    DepthAnnotation out;
    std::unordered_map<std::string, DepthField> fields;
    for (auto& cut : dataset.cuts) {
        if (cut.detections.empty()) continue;
        const Contour* contour = nullptr;
        if (cut.contour_id) {
            auto it = contours.find(*cut.contour_id);
            if (it != contours.end()) contour = &it->second;
        }
        if (contour == nullptr) {
            const std::string msg = "cut '" + cut.cut_id + "': no contour" +
                                    (cut.contour_id ? " '" + *cut.contour_id + "'" : std::string());
            if (strict) throw ValidationError(msg);
            out.warnings.push_back(msg + "; depth set to 0");
            for (auto& d : cut.detections) d.depth = 0.0;
            continue;
        }
        auto it = fields.find(contour->contour_id);
        if (it == fields.end()) {
            it = fields.emplace(contour->contour_id, DepthField(rasterize(*contour, resolution))).first;
        }
        for (auto& d : cut.detections) {
            const auto bd = depth_of_box(it->second, d.box);
            d.depth = bd.depth;
            out.boxes_outside += bd.center_outside ? 1 : 0;
        }
    }
    out.dataset = std::move(dataset);
    return out;
}

std::map<std::string, Contour> parse_contours(const json& doc, ParseMode mode) {
    if (!doc.is_object() || !doc.contains("contours") || !doc.at("contours").is_array()) {
        throw ValidationError("contours file: expected {\"contours\": [...]}");
    }
    if (mode == ParseMode::Strict && doc.size() != 1) throw ValidationError("contours file: unknown top-level field");
    std::map<std::string, Contour> out;
    const json& list = doc.at("contours");
    for (std::size_t i = 0; i < list.size(); ++i) {
        const json& c = list[i];
        const std::string where = "contours[" + std::to_string(i) + "]";
        if (!c.is_object() || !c.contains("contour_id") || !c.at("contour_id").is_string() ||
            !c.contains("vertices") || !c.at("vertices").is_array()) {
            throw ValidationError(where + ": needs string 'contour_id' and array 'vertices'");
        }
        if (mode == ParseMode::Strict) {
            for (auto it = c.begin(); it != c.end(); ++it) {
                if (it.key() != "contour_id" && it.key() != "vertices") {
                    throw ValidationError(where + "." + it.key() + ": unknown field");
                }
            }
        }
        Contour contour;
        contour.contour_id = c.at("contour_id").get<std::string>();
        for (const json& p : c.at("vertices")) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                throw ValidationError(where + ".vertices: each vertex must be [x, y]");
            }
            contour.vertices.push_back({p[0].get<double>(), p[1].get<double>()});
        }
        check(contour);
        if (!out.emplace(contour.contour_id, contour).second) {
            throw ValidationError(where + ": duplicate contour id '" + contour.contour_id + "'");
        }
    }
    return out;
}

std::map<std::string, Contour> load_contours(const std::filesystem::path& path, ParseMode mode) {
    return parse_contours(read_json_file(path), mode);
}

json contours_to_json(const std::map<std::string, Contour>& contours) {
    json list = json::array();
    for (const auto& [id, c] : contours) {
        json verts = json::array();
        for (const auto& p : c.vertices) verts.push_back({p.x, p.y});
        list.push_back({{"contour_id", id}, {"vertices", std::move(verts)}});
    }
    return json{{"contours", std::move(list)}};
}

}  // namespace riskcal
