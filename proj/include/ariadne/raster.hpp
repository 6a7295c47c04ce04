// include/ariadne/raster.hpp
// Grid containers, PGM mask/image I/O and LabelMe polygon rasterization.
//
// Coordinates are (x = column, y = row) with the origin at the top-left
// pixel. Pixel (x, y) covers [x, x+1) x [y, y+1); its center is (x+0.5, y+0.5).
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ariadne/error.hpp"

namespace ariadne {

struct Pixel {
    int x = 0;
    int y = 0;

    friend bool operator==(const Pixel&, const Pixel&) = default;
    friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

// Row-major grid of values; the shape contract shared by images and masks.
template <class T>
class Grid {
public:
    Grid() = default;
    Grid(int width, int height, T fill = T{})
        : width_(width), height_(height),
          values_(static_cast<std::size_t>(checked_area(width, height)), fill) {}
    Grid(int width, int height, std::vector<T> values)
        : width_(width), height_(height), values_(std::move(values)) {
        if (values_.size() != static_cast<std::size_t>(checked_area(width, height)))
            throw ShapeError("grid value count does not match " + std::to_string(width) + "x" +
                             std::to_string(height));
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    bool in_bounds(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    T& at(int x, int y) noexcept { return values_[index(x, y)]; }
    const T& at(int x, int y) const noexcept { return values_[index(x, y)]; }
    T& operator[](std::size_t i) noexcept { return values_[i]; }
    const T& operator[](std::size_t i) const noexcept { return values_[i]; }

    std::span<T> values() noexcept { return values_; }
    std::span<const T> values() const noexcept { return values_; }

    bool same_shape(const Grid& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    static long long checked_area(int width, int height) {
        if (width < 0 || height < 0) throw ShapeError("negative grid dimension");
        return static_cast<long long>(width) * height;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> values_;
};

// Intensities in [0, 1].
class GrayImage : public Grid<double> {
public:
    GrayImage() = default;
    GrayImage(int width, int height, double fill = 0.0);
    GrayImage(int width, int height, std::vector<double> values);
};

// Foreground is 1, background 0. Stored as bytes for cheap random access.
class BinaryMask : public Grid<std::uint8_t> {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height, bool fill = false);
    BinaryMask(int width, int height, std::vector<std::uint8_t> bits);

    bool test(int x, int y) const noexcept { return at(x, y) != 0; }
    // Out-of-frame pixels read as background.
    bool test_or_background(int x, int y) const noexcept { return in_bounds(x, y) && at(x, y) != 0; }
    void set(int x, int y, bool on = true) noexcept { at(x, y) = on ? 1 : 0; }

    std::size_t count() const noexcept;
    std::vector<Pixel> foreground() const;
};

// Throws ShapeError unless both grids have equal width and height.
template <class A, class B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, std::string_view what) {
    if (a.width() != b.width() || a.height() != b.height())
        throw ShapeError(std::string(what) + ": shape mismatch " + std::to_string(a.width()) + "x" +
                         std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                         std::to_string(b.height()));
}

struct PolygonAnnotation {
    std::string label;
    std::vector<Point2> vertices;
};

// Pixel is foreground iff its center lies inside at least one polygon under
// the even-odd rule. Throws DataError naming the first polygon with fewer
// than three vertices.
BinaryMask rasterize_polygons(std::span<const PolygonAnnotation> annotations, int width, int height);

// Even-odd point-in-polygon for a single point.
bool point_in_polygon(std::span<const Point2> vertices, Point2 p) noexcept;

struct LabelMeWarning {
    std::size_t shape_index;
    std::string message;
};

struct LabelMeDocument {
    std::vector<PolygonAnnotation> polygons;
    std::vector<LabelMeWarning> warnings;
    int image_width = 0;   // 0 when the document omits it
    int image_height = 0;
};

// Parses a LabelMe JSON document. Only "polygon" shapes are kept (a missing
// shape_type counts as polygon); other shape types produce a warning.
LabelMeDocument parse_labelme(std::string_view json_text);

// Binary PGM (P5, maxval 255). Masks use 0 = background, 255 = foreground.
BinaryMask load_mask(const std::filesystem::path& path);
void store_mask(const BinaryMask& mask, const std::filesystem::path& path);
BinaryMask decode_mask_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_mask_pgm(const BinaryMask& mask);

// 8-bit grayscale PGM normalized to [0, 1] on load, quantized on store.
GrayImage load_image(const std::filesystem::path& path);
void store_image(const GrayImage& image, const std::filesystem::path& path);
GrayImage decode_image_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_image_pgm(const GrayImage& image);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace ariadne
