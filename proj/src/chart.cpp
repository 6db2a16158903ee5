#include "pe/chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <opencv2/imgproc.hpp>

#include "pe/image_io.hpp"

namespace pe {

namespace {

constexpr int kPanelW = 320;
constexpr int kPanelH = 200;
constexpr int kPad = 10;
constexpr int kBarH = 22;
constexpr int kLabelW = 150;

const cv::Scalar kInk(30, 30, 30);
const cv::Scalar kEnsembleBg(170, 240, 255);  // BGR yellow tint
const cv::Scalar kHoldoutBg(255, 255, 255);
const cv::Scalar kTargetBar(60, 170, 60);
const cv::Scalar kOtherBar(170, 130, 90);

std::string clip(const std::string& s, std::size_t n) { return s.size() <= n ? s : s.substr(0, n - 2) + ".."; }

void draw_panel(cv::Mat& canvas, const ModelTransfer& m, int x0, int y0) {
    cv::Rect area(x0, y0, kPanelW, kPanelH);
    cv::rectangle(canvas, area, m.ensemble ? kEnsembleBg : kHoldoutBg, cv::FILLED);
    cv::rectangle(canvas, area, kInk, 1);
    cv::putText(canvas, clip(m.name, 34), {x0 + kPad, y0 + 22}, cv::FONT_HERSHEY_SIMPLEX, 0.5, kInk, 1, cv::LINE_AA);
    if (!m.error.empty()) {
        cv::putText(canvas, "failed: " + clip(m.error, 30), {x0 + kPad, y0 + 60}, cv::FONT_HERSHEY_SIMPLEX, 0.4,
                    cv::Scalar(0, 0, 200), 1, cv::LINE_AA);
        return;
    }
    const int bar_max = kPanelW - kLabelW - 2 * kPad - 40;
    for (std::size_t i = 0; i < m.top_k.size() && i < 6; ++i) {
        const auto& p = m.top_k[i];
        const int y = y0 + 40 + static_cast<int>(i) * (kBarH + 6);
        const bool is_target = m.target_label_id && p.label_id == *m.target_label_id;
        cv::putText(canvas, clip(p.label_name, 20), {x0 + kPad, y + 15}, cv::FONT_HERSHEY_SIMPLEX, 0.4, kInk, 1,
                    cv::LINE_AA);
        const int len = std::max(1, static_cast<int>(std::lround(p.probability * bar_max)));
        cv::rectangle(canvas, cv::Rect(x0 + kLabelW, y, len, kBarH), is_target ? kTargetBar : kOtherBar, cv::FILLED);
        char buf[16];
        std::snprintf(buf, sizeof buf, "%.3f", p.probability);
        cv::putText(canvas, buf, {x0 + kLabelW + len + 4, y + 15}, cv::FONT_HERSHEY_SIMPLEX, 0.35, kInk, 1,
                    cv::LINE_AA);
    }
}

}  // namespace

RasterImage transfer_chart(const TransferReport& report) {
    const int n = std::max<int>(1, static_cast<int>(report.models.size()));
    const int cols = std::min(n, 4);
    const int rows = (n + cols - 1) / cols;
    cv::Mat canvas(rows * (kPanelH + kPad) + kPad, cols * (kPanelW + kPad) + kPad, CV_8UC3, cv::Scalar(245, 245, 245));
    for (int i = 0; i < static_cast<int>(report.models.size()); ++i)
        draw_panel(canvas, report.models[i], kPad + (i % cols) * (kPanelW + kPad), kPad + (i / cols) * (kPanelH + kPad));

    RasterImage img(canvas.cols, canvas.rows);
    for (int y = 0; y < canvas.rows; ++y)
        for (int x = 0; x < canvas.cols; ++x) {
            const auto& px = canvas.at<cv::Vec3b>(y, x);
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = px[2 - c] / 255.0f;
        }
    return img;
}

void write_transfer_chart(const std::filesystem::path& path, const TransferReport& report) {
    save_png(path, transfer_chart(report));
}

}  // namespace pe
