#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pe/preprocess.hpp"
#include "pe/render.hpp"

namespace pe {

/// Raised while constructing a backend: bad manifest, unreadable model,
/// output width that disagrees with the label file.
class ModelLoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by classify() on a loaded backend.
class ClassifierError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A loaded image classifier. Implementations are immutable after
/// construction and safe to call concurrently.
class Classifier {
public:
    virtual ~Classifier() = default;

    virtual const std::string& name() const = 0;
    virtual const std::vector<std::string>& labels() const = 0;

    /// Probability vector over labels(); sums to 1.
    virtual std::vector<double> classify(const RasterImage& image) const = 0;
};

std::vector<double> softmax(std::span<const double> logits);

/// Analytic classifier over labels {red, green, blue}: logits are
/// temperature * (mean R, mean G, mean B).
class ToyClassifier final : public Classifier {
public:
    explicit ToyClassifier(std::string name = "toy", double temperature = 10.0);

    const std::string& name() const override { return name_; }
    const std::vector<std::string>& labels() const override { return labels_; }
    std::vector<double> classify(const RasterImage& image) const override;

    double temperature() const { return temperature_; }

private:
    std::string name_;
    double temperature_;
    std::vector<std::string> labels_;
};

struct ModelManifest {
    std::string name;
    std::filesystem::path model_path;
    std::filesystem::path labels_path;
    PreprocessSpec preprocess;
    bool output_is_probabilities = false;
};

/// Relative model/labels paths resolve against the manifest's directory.
ModelManifest load_manifest(const std::filesystem::path& path);
ModelManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::ordered_json manifest_to_json(const ModelManifest& manifest);

/// One label per line; line index is the label id. Trailing '\r' is dropped.
std::vector<std::string> read_labels(const std::filesystem::path& path);

/// ONNX network run through OpenCV's dnn module. Sessions are pooled because
/// a cv::dnn::Net is not reentrant.
class OnnxClassifier final : public Classifier {
public:
    static std::unique_ptr<OnnxClassifier> load(const ModelManifest& manifest, std::size_t sessions = 1);
    ~OnnxClassifier() override;

    const std::string& name() const override { return manifest_.name; }
    const std::vector<std::string>& labels() const override { return labels_; }
    std::vector<double> classify(const RasterImage& image) const override;

    const ModelManifest& manifest() const { return manifest_; }

private:
    struct Pool;
    OnnxClassifier(ModelManifest manifest, std::vector<std::string> labels, std::unique_ptr<Pool> pool);

    ModelManifest manifest_;
    std::vector<std::string> labels_;
    std::unique_ptr<Pool> pool_;
};

/// "toy" (and "toy:<name>") names the built-in analytic backend; anything
/// else is read as a manifest path.
std::shared_ptr<const Classifier> load_classifier(const std::string& ref, std::size_t sessions = 1);

class LabelError : public std::invalid_argument {
public:
    LabelError(const std::string& what, std::vector<std::string> suggestions)
        : std::invalid_argument(what), suggestions_(std::move(suggestions)) {}
    const std::vector<std::string>& suggestions() const { return suggestions_; }

private:
    std::vector<std::string> suggestions_;
};

/// Accepts a label name (exact, then case-insensitive) or a decimal id.
/// Unknown names throw LabelError listing the closest labels.
std::size_t resolve_label(const std::vector<std::string>& labels, const std::string& name_or_id);

std::vector<std::string> nearest_labels(const std::vector<std::string>& labels, const std::string& query,
                                        std::size_t max_results = 3);

}  // namespace pe
