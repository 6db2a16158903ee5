#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pe {

struct ColorRGB {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;

    bool operator==(const ColorRGB&) const = default;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point2&) const = default;
};

inline constexpr double kMaxThickness = 0.25;

/// A round-capped, round-joined polyline. Coordinates are normalized to
/// [0,1] on both axes; thickness is a fraction of min(width, height).
struct Stroke {
    std::vector<Point2> points;
    double thickness = 0.05;
    std::size_t color_index = 0;

    bool operator==(const Stroke&) const = default;
};

/// The search variable: a palette, a background entry and strokes in
/// painter's order (later strokes cover earlier ones).
struct Drawing {
    std::vector<ColorRGB> palette;
    std::size_t background_index = 0;
    std::vector<Stroke> strokes;
    double aspect = 1.0;

    bool operator==(const Drawing&) const = default;
};

/// Row-major H x W x 3 image with values in [0,1].
struct RasterImage {
    int width = 0;
    int height = 0;
    std::vector<float> pixels;

    RasterImage() = default;
    RasterImage(int w, int h, float fill = 0.0f);

    float& at(int x, int y, int c) { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
    float at(int x, int y, int c) const { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }

    bool operator==(const RasterImage&) const = default;
};

struct Violation {
    /// Stroke index, or -1 for drawing-level fields.
    int stroke = -1;
    std::string field;
    std::string message;
};

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

struct StrokeCountBounds {
    std::size_t min = 0;
    std::size_t max = static_cast<std::size_t>(-1);
};

/// Every invariant violation; empty means the drawing is valid.
std::vector<Violation> validate(const Drawing& drawing, StrokeCountBounds bounds = {});

/// Throws ValidationError when validate() reports anything.
void require_valid(const Drawing& drawing, StrokeCountBounds bounds = {});

/// Rasterizes strokes over the background with supersample x supersample
/// box-filtered antialiasing. Bit-identical output for identical inputs.
RasterImage rasterize(const Drawing& drawing, int width, int height, int supersample = 4);

/// Single SVG 1.1 document; the genome is embedded as a metadata comment so
/// parse_svg() recovers it exactly.
std::string to_svg(const Drawing& drawing, double width_units);
Drawing parse_svg(const std::string& svg);

std::string describe(const std::vector<Violation>& violations);

}  // namespace pe
