#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pe/classifier.hpp"
#include "pe/render.hpp"

namespace pe {

inline constexpr std::size_t kDefaultTopK = 5;

struct Prediction {
    std::size_t label_id = 0;
    std::string label_name;
    double probability = 0.0;
};

/// The k most probable labels in descending order, ties broken by lower id.
/// k is truncated to the vector length. Names come from `labels` if given.
std::vector<Prediction> topk(std::span<const double> probabilities, std::size_t k = kDefaultTopK,
                             const std::vector<std::string>* labels = nullptr);

/// 1-based position of `target` in the same ordering topk() uses.
std::size_t target_rank(std::span<const double> probabilities, std::size_t target);

/// One model taking part in a transfer evaluation. A model that failed to
/// load carries load_error and no backend.
struct TransferModel {
    std::string name;
    std::shared_ptr<const Classifier> backend;
    std::string load_error;
    /// Target label, resolved per model because label spaces may differ.
    std::string target_label;
    bool ensemble = false;
};

struct ModelTransfer {
    std::string name;
    bool ensemble = false;
    std::vector<Prediction> top_k;
    std::string target_label;
    std::optional<std::size_t> target_label_id;
    double target_probability = 0.0;
    std::size_t target_rank = 0;
    /// Non-empty when the model could not be evaluated.
    std::string error;
};

struct TransferSummary {
    /// Undefined (nullopt) when no holdout model was evaluated.
    std::optional<double> top1_rate;
    std::optional<double> top5_rate;
    std::size_t holdout_models = 0;
    std::size_t failed_models = 0;
};

struct TransferReport {
    std::string image;
    std::vector<ModelTransfer> models;
    TransferSummary summary;
};

TransferReport transfer_matrix(const RasterImage& image, const std::vector<TransferModel>& models,
                               std::size_t k = kDefaultTopK, std::size_t workers = 1);

nlohmann::ordered_json to_json(const TransferReport& report);

struct SkippedFile {
    std::string path;
    std::string reason;
};

struct AmplificationResult {
    double drawing_score = 0.0;
    std::vector<double> validation_scores;
    std::size_t rank = 1;
    double percentile = 0.0;
    std::vector<std::string> validation_files;
    std::vector<SkippedFile> skipped;
};

/// Ties with validation scores rank above the drawing.
AmplificationResult amplification_from_scores(double drawing_score, std::vector<double> validation_scores);

AmplificationResult amplification_rank(const RasterImage& image, const std::vector<RasterImage>& validation_images,
                                       const Classifier& model, std::size_t target_label_id, std::size_t workers = 1);

/// Unreadable files are skipped and listed in the result. Throws
/// std::invalid_argument when no file could be scored.
AmplificationResult amplification_rank_files(const RasterImage& image,
                                             const std::vector<std::filesystem::path>& validation_files,
                                             const Classifier& model, std::size_t target_label_id,
                                             std::size_t workers = 1);

/// Image files directly inside `dir`, sorted by name.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

nlohmann::ordered_json to_json(const AmplificationResult& result);

}  // namespace pe
