#pragma once

#include <array>
#include <vector>

#include "json.hpp"
#include "pe/render.hpp"

namespace pe {

enum class ResizeMode { Direct, ShorterThenCenterCrop };
enum class ValueRange { Unit, Symmetric, Byte };  // [0,1], [-1,1], [0,255]
enum class ChannelOrder { RGB, BGR };
enum class Layout { ChannelsFirst, ChannelsLast };

struct PreprocessSpec {
    int input_size = 224;
    ResizeMode resize_mode = ResizeMode::Direct;
    ValueRange value_range = ValueRange::Unit;
    std::array<double, 3> channel_means{0.0, 0.0, 0.0};
    std::array<double, 3> channel_stds{1.0, 1.0, 1.0};
    ChannelOrder channel_order = ChannelOrder::RGB;
    Layout layout = Layout::ChannelsFirst;

    bool operator==(const PreprocessSpec&) const = default;
};

/// Dense float tensor; shape is (3,S,S) or (S,S,3) without a batch axis.
struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;
};

std::vector<std::string> check_preprocess(const PreprocessSpec& spec);

nlohmann::ordered_json preprocess_to_json(const PreprocessSpec& spec);
PreprocessSpec preprocess_from_json(const nlohmann::json& j);

/// Bilinear resize with half-pixel centers and edge clamping.
RasterImage resize_bilinear(const RasterImage& image, int width, int height);

/// Resize per mode, map to value_range, normalize per channel, then reorder
/// channels and layout.
Tensor preprocess(const RasterImage& image, const PreprocessSpec& spec);

}  // namespace pe
