#include "pe/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <sstream>

#include "pe/genome_io.hpp"

namespace pe {

RasterImage::RasterImage(int w, int h, float fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, fill) {}

ValidationError::ValidationError(std::vector<Violation> violations)
    : std::runtime_error("invalid drawing: " + describe(violations)), violations_(std::move(violations)) {}

std::string describe(const std::vector<Violation>& violations) {
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        const auto& v = violations[i];
        if (i) os << "; ";
        if (v.stroke >= 0) os << "stroke " << v.stroke << " ";
        os << v.field << ": " << v.message;
    }
    return os.str();
}

namespace {

bool unit_range(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

}  // namespace

std::vector<Violation> validate(const Drawing& drawing, StrokeCountBounds bounds) {
    std::vector<Violation> out;
    if (drawing.palette.empty()) out.push_back({-1, "palette", "palette must have at least one color"});
    for (std::size_t i = 0; i < drawing.palette.size(); ++i) {
        const auto& c = drawing.palette[i];
        if (!unit_range(c.r) || !unit_range(c.g) || !unit_range(c.b))
            out.push_back({-1, "palette[" + std::to_string(i) + "]", "color channel outside [0,1]"});
    }
    if (drawing.background_index >= drawing.palette.size())
        out.push_back({-1, "background_index", "index " + std::to_string(drawing.background_index) + " outside palette"});
    if (!std::isfinite(drawing.aspect) || drawing.aspect <= 0.0)
        out.push_back({-1, "aspect", "aspect must be positive"});
    const auto n = drawing.strokes.size();
    if (n < bounds.min || n > bounds.max)
        out.push_back({-1, "strokes", "stroke count " + std::to_string(n) + " outside configured bounds"});

    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = drawing.strokes[i];
        const int si = static_cast<int>(i);
        if (s.points.size() < 2) out.push_back({si, "points", "a stroke needs at least 2 points"});
        for (std::size_t k = 0; k < s.points.size(); ++k) {
            const auto& p = s.points[k];
            if (!unit_range(p.x))
                out.push_back({si, "points[" + std::to_string(k) + "].x", "coordinate " + std::to_string(p.x) + " outside [0,1]"});
            if (!unit_range(p.y))
                out.push_back({si, "points[" + std::to_string(k) + "].y", "coordinate " + std::to_string(p.y) + " outside [0,1]"});
        }
        if (!std::isfinite(s.thickness) || s.thickness <= 0.0 || s.thickness > kMaxThickness)
            out.push_back({si, "thickness", "thickness " + std::to_string(s.thickness) + " outside (0, 0.25]"});
        if (s.color_index >= drawing.palette.size())
            out.push_back({si, "color_index", "index " + std::to_string(s.color_index) + " outside palette"});
    }
    return out;
}

void require_valid(const Drawing& drawing, StrokeCountBounds bounds) {
    auto v = validate(drawing, bounds);
    if (!v.empty()) throw ValidationError(std::move(v));
}

namespace {

struct Interval {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double a, double b) {
        lo = std::min(lo, a);
        hi = std::max(hi, b);
    }
    bool empty() const { return lo > hi; }
};

struct Segment {
    double ax, ay, bx, by;
};

// Stroke geometry in pixel units.
struct PixelStroke {
    std::vector<Segment> segments;
    double radius = 0.0;
    double ymin = 0.0;
    double ymax = 0.0;
    std::uint16_t color = 0;
};

void disc_span(double cx, double cy, double r, double y, Interval& span) {
    const double dy = y - cy;
    if (std::abs(dy) > r) return;
    const double s = std::sqrt(r * r - dy * dy);
    span.add(cx - s, cx + s);
}

// Horizontal line y intersected with the stadium (convex hull of the two end
// discs) of one segment. The stadium is convex, so the hull of the pieces
// cut from both discs and the side rectangle is the whole chord.
Interval stadium_span(const Segment& s, double r, double y) {
    Interval span;
    disc_span(s.ax, s.ay, r, y, span);
    disc_span(s.bx, s.by, r, y, span);
    const double dx = s.bx - s.ax;
    const double dy = s.by - s.ay;
    const double len = std::hypot(dx, dy);
    if (len > 0.0) {
        const double nx = -dy / len * r;
        const double ny = dx / len * r;
        const double cx[4] = {s.ax + nx, s.bx + nx, s.bx - nx, s.ax - nx};
        const double cy[4] = {s.ay + ny, s.by + ny, s.by - ny, s.ay - ny};
        for (int e = 0; e < 4; ++e) {
            const int f = (e + 1) % 4;
            const double y0 = cy[e] - y;
            const double y1 = cy[f] - y;
            if ((y0 > 0.0 && y1 > 0.0) || (y0 < 0.0 && y1 < 0.0)) continue;
            if (y0 == y1) {
                span.add(std::min(cx[e], cx[f]), std::max(cx[e], cx[f]));
                continue;
            }
            const double t = y0 / (y0 - y1);
            const double x = cx[e] + t * (cx[f] - cx[e]);
            span.add(x, x);
        }
    }
    return span;
}

std::vector<PixelStroke> to_pixel_space(const Drawing& drawing, int width, int height) {
    const double scale = std::min(width, height);
    std::vector<PixelStroke> out;
    out.reserve(drawing.strokes.size());
    for (const auto& s : drawing.strokes) {
        PixelStroke ps;
        ps.radius = 0.5 * s.thickness * scale;
        ps.color = static_cast<std::uint16_t>(s.color_index);
        ps.ymin = std::numeric_limits<double>::infinity();
        ps.ymax = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k + 1 < s.points.size(); ++k) {
            Segment seg{s.points[k].x * width, s.points[k].y * height, s.points[k + 1].x * width,
                        s.points[k + 1].y * height};
            ps.ymin = std::min({ps.ymin, seg.ay - ps.radius, seg.by - ps.radius});
            ps.ymax = std::max({ps.ymax, seg.ay + ps.radius, seg.by + ps.radius});
            ps.segments.push_back(seg);
        }
        out.push_back(std::move(ps));
    }
    return out;
}

}  // namespace

RasterImage rasterize(const Drawing& drawing, int width, int height, int supersample) {
    if (width < 1 || height < 1) throw std::invalid_argument("rasterize: width and height must be >= 1");
    if (supersample < 1) throw std::invalid_argument("rasterize: supersample must be >= 1");
    require_valid(drawing);
    if (drawing.palette.size() > std::numeric_limits<std::uint16_t>::max())
        throw std::invalid_argument("rasterize: palette too large");

    const auto strokes = to_pixel_space(drawing, width, height);
    const int ss = supersample;
    const int row_samples = width * ss;
    const std::size_t palette_size = drawing.palette.size();
    const auto background = static_cast<std::uint16_t>(drawing.background_index);
    const double inv_ss = 1.0 / ss;
    const std::uint32_t samples_per_pixel = static_cast<std::uint32_t>(ss) * ss;

    RasterImage img(width, height);
    std::vector<std::uint16_t> row(row_samples);
    std::vector<std::uint32_t> counts(static_cast<std::size_t>(width) * palette_size);

    for (int py = 0; py < height; ++py) {
        std::fill(counts.begin(), counts.end(), 0u);
        for (int sy = 0; sy < ss; ++sy) {
            const double y = py + (sy + 0.5) * inv_ss;
            std::fill(row.begin(), row.end(), background);
            for (const auto& st : strokes) {
                if (y < st.ymin || y > st.ymax) continue;
                for (const auto& seg : st.segments) {
                    const Interval span = stadium_span(seg, st.radius, y);
                    if (span.empty()) continue;
                    // Sample i sits at x = (i + 0.5) / ss.
                    const double lo = std::ceil(span.lo * ss - 0.5);
                    const double hi = std::floor(span.hi * ss - 0.5);
                    const int i0 = static_cast<int>(std::max(lo, 0.0));
                    const int i1 = static_cast<int>(std::min(hi, static_cast<double>(row_samples - 1)));
                    if (i0 > i1) continue;
                    std::fill(row.begin() + i0, row.begin() + i1 + 1, st.color);
                }
            }
            for (int i = 0; i < row_samples; ++i) ++counts[static_cast<std::size_t>(i / ss) * palette_size + row[i]];
        }
        for (int px = 0; px < width; ++px) {
            const std::uint32_t* c = &counts[static_cast<std::size_t>(px) * palette_size];
            double acc[3] = {0.0, 0.0, 0.0};
            bool solid = false;
            for (std::size_t k = 0; k < palette_size; ++k) {
                if (c[k] == 0) continue;
                const auto& col = drawing.palette[k];
                if (c[k] == samples_per_pixel) {
                    img.at(px, py, 0) = static_cast<float>(col.r);
                    img.at(px, py, 1) = static_cast<float>(col.g);
                    img.at(px, py, 2) = static_cast<float>(col.b);
                    solid = true;
                    break;
                }
                acc[0] += c[k] * col.r;
                acc[1] += c[k] * col.g;
                acc[2] += c[k] * col.b;
            }
            if (solid) continue;
            for (int ch = 0; ch < 3; ++ch)
                img.at(px, py, ch) = static_cast<float>(std::clamp(acc[ch] / samples_per_pixel, 0.0, 1.0));
        }
    }
    return img;
}

namespace {

std::string hex_color(const ColorRGB& c) {
    auto q = [](double v) { return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); };
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", q(c.r), q(c.g), q(c.b));
    return buf;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

constexpr const char* kGenomeTag = "<!-- pe-genome:";

}  // namespace

std::string to_svg(const Drawing& drawing, double width_units) {
    require_valid(drawing);
    if (!(width_units > 0.0)) throw std::invalid_argument("to_svg: width_units must be positive");
    const double w = width_units;
    const double h = width_units / drawing.aspect;
    const double scale = std::min(w, h);

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(w) << "\" height=\"" << num(h)
       << "\" viewBox=\"0 0 " << num(w) << " " << num(h) << "\">\n";
    // Compact JSON never contains "--" because every number is nonnegative.
    os << kGenomeTag << " " << drawing_to_json(drawing).dump() << " -->\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << num(w) << "\" height=\"" << num(h) << "\" fill=\""
       << hex_color(drawing.palette[drawing.background_index]) << "\"/>\n";
    for (const auto& s : drawing.strokes) {
        os << "<path d=\"";
        for (std::size_t k = 0; k < s.points.size(); ++k)
            os << (k ? " L " : "M ") << num(s.points[k].x * w) << " " << num(s.points[k].y * h);
        os << "\" fill=\"none\" stroke=\"" << hex_color(drawing.palette[s.color_index]) << "\" stroke-width=\""
           << num(s.thickness * scale) << "\" stroke-linecap=\"round\" stroke-linejoin=\"round\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

Drawing parse_svg(const std::string& svg) {
    const auto start = svg.find(kGenomeTag);
    if (start == std::string::npos) throw GenomeFormatError("SVG carries no embedded genome");
    const auto body = start + std::char_traits<char>::length(kGenomeTag);
    const auto end = svg.find("-->", body);
    if (end == std::string::npos) throw GenomeFormatError("unterminated genome comment");
    return parse_genome(svg.substr(body, end - body));
}

}  // namespace pe
