#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "pe/render.hpp"

namespace pe {

class ImageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Decodes PNG or JPEG into RGB values in [0,1]. 16-bit PNGs keep their
/// precision; alpha is dropped.
RasterImage load_image(const std::filesystem::path& path);
RasterImage decode_image(const std::vector<std::uint8_t>& bytes);

/// 8-bit PNG; values are rounded to the nearest of 256 levels.
std::vector<std::uint8_t> encode_png(const RasterImage& image);
void save_png(const std::filesystem::path& path, const RasterImage& image);

bool has_image_extension(const std::filesystem::path& path);

}  // namespace pe
