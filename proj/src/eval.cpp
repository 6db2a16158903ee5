#include "pe/eval.hpp"

#include <algorithm>
#include <numeric>

#include "pe/image_io.hpp"
#include "pe/parallel.hpp"

namespace pe {

namespace {

// Descending probability, then ascending id.
bool ranks_before(std::span<const double> p, std::size_t a, std::size_t b) {
    if (p[a] != p[b]) return p[a] > p[b];
    return a < b;
}

std::optional<double> rate(std::size_t hits, std::size_t total) {
    if (total == 0) return std::nullopt;
    return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

std::vector<Prediction> topk(std::span<const double> probabilities, std::size_t k, const std::vector<std::string>* labels) {
    if (k < 1) throw std::invalid_argument("topk: k must be >= 1");
    k = std::min(k, probabilities.size());
    std::vector<std::size_t> order(probabilities.size());
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) { return ranks_before(probabilities, a, b); });
    std::vector<Prediction> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const auto id = order[i];
        std::string name = labels && id < labels->size() ? (*labels)[id] : std::to_string(id);
        out.push_back({id, std::move(name), probabilities[id]});
    }
    return out;
}

std::size_t target_rank(std::span<const double> probabilities, std::size_t target) {
    if (target >= probabilities.size()) throw std::out_of_range("target_rank: target outside probability vector");
    std::size_t rank = 1;
    for (std::size_t i = 0; i < probabilities.size(); ++i)
        if (i != target && ranks_before(probabilities, i, target)) ++rank;
    return rank;
}

TransferReport transfer_matrix(const RasterImage& image, const std::vector<TransferModel>& models, std::size_t k,
                               std::size_t workers) {
    if (models.empty()) throw std::invalid_argument("transfer_matrix: no models");
    TransferReport report;
    report.models.resize(models.size());

    parallel_for(models.size(), workers, [&](std::size_t i) {
        const auto& m = models[i];
        auto& row = report.models[i];
        row.name = m.name;
        row.ensemble = m.ensemble;
        row.target_label = m.target_label;
        if (!m.backend) {
            row.error = m.load_error.empty() ? "model not loaded" : m.load_error;
            return;
        }
        try {
            const auto& labels = m.backend->labels();
            const auto target = resolve_label(labels, m.target_label);
            const auto probs = m.backend->classify(image);
            row.target_label_id = target;
            row.target_label = labels[target];
            row.top_k = topk(probs, k, &labels);
            row.target_probability = probs[target];
            row.target_rank = target_rank(probs, target);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });

    std::size_t holdouts = 0, top1 = 0, top5 = 0;
    for (const auto& row : report.models) {
        if (!row.error.empty()) {
            ++report.summary.failed_models;
            continue;
        }
        if (row.ensemble) continue;
        ++holdouts;
        if (row.target_rank <= 1) ++top1;
        if (row.target_rank <= 5) ++top5;
    }
    report.summary.holdout_models = holdouts;
    report.summary.top1_rate = rate(top1, holdouts);
    report.summary.top5_rate = rate(top5, holdouts);
    return report;
}

nlohmann::ordered_json to_json(const TransferReport& report) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["image"] = report.image;
    ordered_json models = ordered_json::array();
    for (const auto& m : report.models) {
        ordered_json jm;
        jm["name"] = m.name;
        jm["ensemble"] = m.ensemble;
        ordered_json top = ordered_json::array();
        for (const auto& p : m.top_k) top.push_back({{"label", p.label_name}, {"p", p.probability}});
        jm["topk"] = std::move(top);
        jm["target_label"] = m.target_label;
        if (m.error.empty()) {
            jm["target_p"] = m.target_probability;
            jm["target_rank"] = m.target_rank;
        } else {
            jm["target_p"] = nullptr;
            jm["target_rank"] = nullptr;
            jm["error"] = m.error;
        }
        models.push_back(std::move(jm));
    }
    j["models"] = std::move(models);
    ordered_json summary;
    summary["top1_rate"] = report.summary.top1_rate ? ordered_json(*report.summary.top1_rate) : ordered_json(nullptr);
    summary["top5_rate"] = report.summary.top5_rate ? ordered_json(*report.summary.top5_rate) : ordered_json(nullptr);
    summary["holdout_models"] = report.summary.holdout_models;
    summary["failed_models"] = report.summary.failed_models;
    j["summary"] = std::move(summary);
    return j;
}

AmplificationResult amplification_from_scores(double drawing_score, std::vector<double> validation_scores) {
    if (validation_scores.empty()) throw std::invalid_argument("amplification: no validation scores");
    AmplificationResult r;
    r.drawing_score = drawing_score;
    std::size_t at_or_above = 0, below = 0;
    for (double v : validation_scores) {
        if (v >= drawing_score) ++at_or_above;
        else ++below;
    }
    r.rank = 1 + at_or_above;
    r.percentile = static_cast<double>(below) / static_cast<double>(validation_scores.size());
    r.validation_scores = std::move(validation_scores);
    return r;
}

AmplificationResult amplification_rank(const RasterImage& image, const std::vector<RasterImage>& validation_images,
                                       const Classifier& model, std::size_t target_label_id, std::size_t workers) {
    if (validation_images.empty()) throw std::invalid_argument("amplification: no validation images");
    if (target_label_id >= model.labels().size()) throw std::out_of_range("amplification: target label out of range");
    const double drawing = model.classify(image)[target_label_id];
    std::vector<double> scores(validation_images.size());
    parallel_for(validation_images.size(), workers,
                 [&](std::size_t i) { scores[i] = model.classify(validation_images[i])[target_label_id]; });
    return amplification_from_scores(drawing, std::move(scores));
}

AmplificationResult amplification_rank_files(const RasterImage& image,
                                             const std::vector<std::filesystem::path>& validation_files,
                                             const Classifier& model, std::size_t target_label_id,
                                             std::size_t workers) {
    if (target_label_id >= model.labels().size()) throw std::out_of_range("amplification: target label out of range");
    std::vector<std::optional<double>> scores(validation_files.size());
    std::vector<std::string> errors(validation_files.size());
    parallel_for(validation_files.size(), workers, [&](std::size_t i) {
        try {
            scores[i] = model.classify(load_image(validation_files[i]))[target_label_id];
        } catch (const ImageError& e) {
            errors[i] = e.what();
        }
    });

    std::vector<double> ok;
    std::vector<std::string> used;
    std::vector<SkippedFile> skipped;
    for (std::size_t i = 0; i < validation_files.size(); ++i) {
        if (scores[i]) {
            ok.push_back(*scores[i]);
            used.push_back(validation_files[i].string());
        } else {
            skipped.push_back({validation_files[i].string(), errors[i]});
        }
    }
    if (ok.empty()) throw std::invalid_argument("amplification: no decodable validation images");
    const double drawing = model.classify(image)[target_label_id];
    auto r = amplification_from_scores(drawing, std::move(ok));
    r.validation_files = std::move(used);
    r.skipped = std::move(skipped);
    return r;
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && has_image_extension(entry.path())) out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

nlohmann::ordered_json to_json(const AmplificationResult& r) {
    nlohmann::ordered_json j;
    j["drawing_score"] = r.drawing_score;
    j["rank"] = r.rank;
    j["of"] = r.validation_scores.size() + 1;
    j["percentile"] = r.percentile;
    j["validation_scores"] = r.validation_scores;
    if (!r.validation_files.empty()) j["validation_files"] = r.validation_files;
    nlohmann::ordered_json skipped = nlohmann::ordered_json::array();
    for (const auto& s : r.skipped) skipped.push_back({{"path", s.path}, {"reason", s.reason}});
    j["skipped"] = std::move(skipped);
    return j;
}

}  // namespace pe
