#include "pe/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pe {

namespace {

const char* name_of(ResizeMode m) {
    return m == ResizeMode::Direct ? "direct-resize" : "resize-shorter-then-center-crop";
}

const char* name_of(ChannelOrder o) { return o == ChannelOrder::RGB ? "RGB" : "BGR"; }

const char* name_of(Layout l) { return l == Layout::ChannelsFirst ? "channels-first" : "channels-last"; }

std::array<double, 2> bounds_of(ValueRange r) {
    switch (r) {
        case ValueRange::Unit: return {0.0, 1.0};
        case ValueRange::Symmetric: return {-1.0, 1.0};
        case ValueRange::Byte: return {0.0, 255.0};
    }
    return {0.0, 1.0};
}

std::array<double, 3> triple(const nlohmann::json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 3) throw std::invalid_argument(std::string(key) + " must have 3 entries");
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

// Source coordinate for destination index with half-pixel centers.
struct Tap {
    int i0;
    int i1;
    double w1;
};

Tap tap(int dst, int dst_size, int src_size) {
    const double scale = static_cast<double>(src_size) / dst_size;
    double s = (dst + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src_size - 1));
    const int i0 = static_cast<int>(std::floor(s));
    const int i1 = std::min(i0 + 1, src_size - 1);
    return {i0, i1, s - i0};
}

}  // namespace

std::vector<std::string> check_preprocess(const PreprocessSpec& spec) {
    std::vector<std::string> out;
    if (spec.input_size < 8) out.push_back("input_size must be >= 8");
    for (double s : spec.channel_stds)
        if (!(s > 0.0) || !std::isfinite(s)) out.push_back("channel_stds must be strictly positive");
    for (double m : spec.channel_means)
        if (!std::isfinite(m)) out.push_back("channel_means must be finite");
    return out;
}

nlohmann::ordered_json preprocess_to_json(const PreprocessSpec& spec) {
    nlohmann::ordered_json j;
    j["input_size"] = spec.input_size;
    j["resize_mode"] = name_of(spec.resize_mode);
    const auto b = bounds_of(spec.value_range);
    j["value_range"] = {b[0], b[1]};
    j["channel_means"] = spec.channel_means;
    j["channel_stds"] = spec.channel_stds;
    j["channel_order"] = name_of(spec.channel_order);
    j["layout"] = name_of(spec.layout);
    return j;
}

PreprocessSpec preprocess_from_json(const nlohmann::json& j) {
    PreprocessSpec spec;
    try {
        spec.input_size = j.at("input_size").get<int>();
        if (j.contains("resize_mode")) {
            const auto m = j.at("resize_mode").get<std::string>();
            if (m == "direct-resize") spec.resize_mode = ResizeMode::Direct;
            else if (m == "resize-shorter-then-center-crop") spec.resize_mode = ResizeMode::ShorterThenCenterCrop;
            else throw std::invalid_argument("unknown resize_mode '" + m + "'");
        }
        if (j.contains("value_range")) {
            const auto& v = j.at("value_range");
            if (!v.is_array() || v.size() != 2) throw std::invalid_argument("value_range must be [lo,hi]");
            const double lo = v[0].get<double>(), hi = v[1].get<double>();
            if (lo == 0.0 && hi == 1.0) spec.value_range = ValueRange::Unit;
            else if (lo == -1.0 && hi == 1.0) spec.value_range = ValueRange::Symmetric;
            else if (lo == 0.0 && hi == 255.0) spec.value_range = ValueRange::Byte;
            else throw std::invalid_argument("value_range must be [0,1], [-1,1] or [0,255]");
        }
        if (j.contains("channel_means")) spec.channel_means = triple(j, "channel_means");
        if (j.contains("channel_stds")) spec.channel_stds = triple(j, "channel_stds");
        if (j.contains("channel_order")) {
            const auto o = j.at("channel_order").get<std::string>();
            if (o == "RGB") spec.channel_order = ChannelOrder::RGB;
            else if (o == "BGR") spec.channel_order = ChannelOrder::BGR;
            else throw std::invalid_argument("unknown channel_order '" + o + "'");
        }
        if (j.contains("layout")) {
            const auto l = j.at("layout").get<std::string>();
            if (l == "channels-first") spec.layout = Layout::ChannelsFirst;
            else if (l == "channels-last") spec.layout = Layout::ChannelsLast;
            else throw std::invalid_argument("unknown layout '" + l + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("preprocess: ") + e.what());
    }
    if (auto problems = check_preprocess(spec); !problems.empty())
        throw std::invalid_argument("preprocess: " + problems.front());
    return spec;
}

RasterImage resize_bilinear(const RasterImage& image, int width, int height) {
    if (width < 1 || height < 1) throw std::invalid_argument("resize_bilinear: empty target");
    if (image.width == width && image.height == height) return image;
    RasterImage out(width, height);
    std::vector<Tap> xs(width);
    for (int x = 0; x < width; ++x) xs[x] = tap(x, width, image.width);
    for (int y = 0; y < height; ++y) {
        const Tap ty = tap(y, height, image.height);
        for (int x = 0; x < width; ++x) {
            const Tap& tx = xs[x];
            for (int c = 0; c < 3; ++c) {
                const double top = (1.0 - tx.w1) * image.at(tx.i0, ty.i0, c) + tx.w1 * image.at(tx.i1, ty.i0, c);
                const double bot = (1.0 - tx.w1) * image.at(tx.i0, ty.i1, c) + tx.w1 * image.at(tx.i1, ty.i1, c);
                out.at(x, y, c) = static_cast<float>((1.0 - ty.w1) * top + ty.w1 * bot);
            }
        }
    }
    return out;
}

Tensor preprocess(const RasterImage& image, const PreprocessSpec& spec) {
    if (image.width < 1 || image.height < 1) throw std::invalid_argument("preprocess: empty image");
    const int s = spec.input_size;

    RasterImage sized;
    if (spec.resize_mode == ResizeMode::Direct) {
        sized = resize_bilinear(image, s, s);
    } else {
        const bool wide = image.width >= image.height;
        const int shorter = wide ? image.height : image.width;
        const int longer = wide ? image.width : image.height;
        const int scaled = std::max(s, static_cast<int>(std::lround(static_cast<double>(longer) * s / shorter)));
        const RasterImage r = wide ? resize_bilinear(image, scaled, s) : resize_bilinear(image, s, scaled);
        const int x0 = (r.width - s) / 2;
        const int y0 = (r.height - s) / 2;
        sized = RasterImage(s, s);
        for (int y = 0; y < s; ++y)
            for (int x = 0; x < s; ++x)
                for (int c = 0; c < 3; ++c) sized.at(x, y, c) = r.at(x + x0, y + y0, c);
    }

    const auto [lo, hi] = bounds_of(spec.value_range);
    Tensor t;
    t.shape = spec.layout == Layout::ChannelsFirst ? std::vector<int>{3, s, s} : std::vector<int>{s, s, 3};
    t.data.resize(static_cast<std::size_t>(3) * s * s);
    for (int c = 0; c < 3; ++c) {
        const int src_c = spec.channel_order == ChannelOrder::RGB ? c : 2 - c;
        const double mean = spec.channel_means[c];
        const double std = spec.channel_stds[c];
        for (int y = 0; y < s; ++y) {
            for (int x = 0; x < s; ++x) {
                const double v = lo + (hi - lo) * sized.at(x, y, src_c);
                const std::size_t idx = spec.layout == Layout::ChannelsFirst
                                            ? (static_cast<std::size_t>(c) * s + y) * s + x
                                            : (static_cast<std::size_t>(y) * s + x) * 3 + c;
                t.data[idx] = static_cast<float>((v - mean) / std);
            }
        }
    }
    return t;
}

}  // namespace pe
