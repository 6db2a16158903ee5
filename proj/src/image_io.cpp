#include "pe/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace pe {

namespace {

RasterImage from_mat(const cv::Mat& decoded, const std::string& what) {
    if (decoded.empty()) throw ImageError("cannot decode " + what + " (unsupported format or corrupt data)");
    cv::Mat rgb;
    switch (decoded.channels()) {
        case 1: cv::cvtColor(decoded, rgb, cv::COLOR_GRAY2RGB); break;
        case 3: cv::cvtColor(decoded, rgb, cv::COLOR_BGR2RGB); break;
        case 4: cv::cvtColor(decoded, rgb, cv::COLOR_BGRA2RGB); break;
        default: throw ImageError(what + ": unsupported channel count");
    }
    double full_scale = 1.0;
    switch (rgb.depth()) {
        case CV_8U: full_scale = 255.0; break;
        case CV_16U: full_scale = 65535.0; break;
        case CV_32F: full_scale = 1.0; break;
        default: throw ImageError(what + ": unsupported sample depth");
    }
    RasterImage img(rgb.cols, rgb.rows);
    for (int y = 0; y < rgb.rows; ++y) {
        for (int x = 0; x < rgb.cols; ++x) {
            for (int c = 0; c < 3; ++c) {
                double v = 0.0;
                if (rgb.depth() == CV_8U) v = rgb.at<cv::Vec3b>(y, x)[c];
                else if (rgb.depth() == CV_16U) v = rgb.at<cv::Vec3w>(y, x)[c];
                else v = rgb.at<cv::Vec3f>(y, x)[c];
                img.at(x, y, c) = static_cast<float>(std::clamp(v / full_scale, 0.0, 1.0));
            }
        }
    }
    return img;
}

cv::Mat to_bgr8(const RasterImage& image) {
    cv::Mat bgr(image.height, image.width, CV_8UC3);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            auto& px = bgr.at<cv::Vec3b>(y, x);
            for (int c = 0; c < 3; ++c)
                px[2 - c] = static_cast<uchar>(std::lround(std::clamp(image.at(x, y, c), 0.0f, 1.0f) * 255.0f));
        }
    }
    return bgr;
}

constexpr int kDecodeFlags = cv::IMREAD_ANYCOLOR | cv::IMREAD_ANYDEPTH;

}  // namespace

RasterImage load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageError("cannot open image " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.empty()) throw ImageError("image " + path.string() + " is empty");
    return from_mat(cv::imdecode(bytes, kDecodeFlags), path.string());
}

RasterImage decode_image(const std::vector<std::uint8_t>& bytes) {
    if (bytes.empty()) throw ImageError("empty image buffer");
    return from_mat(cv::imdecode(bytes, kDecodeFlags), "image buffer");
}

std::vector<std::uint8_t> encode_png(const RasterImage& image) {
    if (image.width < 1 || image.height < 1) throw ImageError("cannot encode an empty image");
    std::vector<std::uint8_t> out;
    if (!cv::imencode(".png", to_bgr8(image), out)) throw ImageError("PNG encoding failed");
    return out;
}

void save_png(const std::filesystem::path& path, const RasterImage& image) {
    const auto bytes = encode_png(image);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ImageError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

bool has_image_extension(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".jpe";
}

}  // namespace pe
