// src/raster/raster.cpp
#include "ariadne/raster.hpp"

#include <algorithm>
#include <cmath>

namespace ariadne {

GrayImage::GrayImage(int width, int height, double fill) : Grid<double>(width, height, fill) {}

GrayImage::GrayImage(int width, int height, std::vector<double> values)
    : Grid<double>(width, height, std::move(values)) {
    for (double v : this->values())
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw DataError("image intensity outside [0,1]");
}

BinaryMask::BinaryMask(int width, int height, bool fill)
    : Grid<std::uint8_t>(width, height, fill ? 1 : 0) {}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : Grid<std::uint8_t>(width, height, std::move(bits)) {
    for (auto& b : values()) b = b != 0 ? 1 : 0;
}

std::size_t BinaryMask::count() const noexcept {
    return static_cast<std::size_t>(std::count(values().begin(), values().end(), std::uint8_t{1}));
}

std::vector<Pixel> BinaryMask::foreground() const {
    std::vector<Pixel> out;
    for (int y = 0; y < height(); ++y)
        for (int x = 0; x < width(); ++x)
            if (test(x, y)) out.push_back({x, y});
    return out;
}

bool point_in_polygon(std::span<const Point2> vertices, Point2 p) noexcept {
    bool inside = false;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2& a = vertices[i];
        const Point2& b = vertices[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

BinaryMask rasterize_polygons(std::span<const PolygonAnnotation> annotations, int width, int height) {
    if (width <= 0 || height <= 0) throw ConfigError("rasterize_polygons: width and height must be positive");
    for (std::size_t i = 0; i < annotations.size(); ++i)
        if (annotations[i].vertices.size() < 3)
            throw DataError("annotation " + std::to_string(i) + " has fewer than 3 vertices");

    BinaryMask mask(width, height);
    std::vector<double> crossings;
    for (int y = 0; y < height; ++y) {
        const double cy = y + 0.5;
        for (const auto& poly : annotations) {
            // Scanline crossings at the row center; spans between crossing pairs
            // are inside this polygon. Polygons are OR-ed together.
            crossings.clear();
            const auto& v = poly.vertices;
            for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
                if ((v[i].y > cy) != (v[j].y > cy))
                    crossings.push_back(v[i].x + (cy - v[i].y) * (v[j].x - v[i].x) / (v[j].y - v[i].y));
            }
            std::sort(crossings.begin(), crossings.end());
            for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
                // Centers cx = x + 0.5 with crossings[k] <= cx < crossings[k+1].
                const int x0 = std::max(0, static_cast<int>(std::ceil(crossings[k] - 0.5)));
                const int x1 = std::min(width - 1, static_cast<int>(std::ceil(crossings[k + 1] - 0.5)) - 1);
                for (int x = x0; x <= x1; ++x) mask.at(x, y) = 1;
            }
        }
    }
    return mask;
}

}  // namespace ariadne
