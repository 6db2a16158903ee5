#include "pe/classifier.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>

#include <opencv2/core.hpp>
#include <opencv2/dnn.hpp>

namespace pe {

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> out(logits.size());
    if (logits.empty()) return out;
    const double peak = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - peak);
        total += out[i];
    }
    for (auto& v : out) v /= total;
    return out;
}

ToyClassifier::ToyClassifier(std::string name, double temperature)
    : name_(std::move(name)), temperature_(temperature), labels_{"red", "green", "blue"} {}

std::vector<double> ToyClassifier::classify(const RasterImage& image) const {
    const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
    if (n == 0) throw ClassifierError("toy classifier: empty image");
    std::array<double, 3> mean{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c) mean[c] += image.pixels[i * 3 + c];
    std::array<double, 3> logits{};
    for (int c = 0; c < 3; ++c) logits[c] = temperature_ * mean[c] / static_cast<double>(n);
    return softmax(logits);
}

ModelManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    ModelManifest m;
    try {
        m.name = j.at("name").get<std::string>();
        m.model_path = j.at("model_path").get<std::string>();
        m.labels_path = j.at("labels_path").get<std::string>();
        m.preprocess = preprocess_from_json(j.at("preprocess"));
        m.output_is_probabilities = j.at("output_is_probabilities").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw ModelLoadError(std::string("manifest: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ModelLoadError(std::string("manifest: ") + e.what());
    }
    if (m.name.empty()) throw ModelLoadError("manifest: name must not be empty");
    if (!base_dir.empty()) {
        if (m.model_path.is_relative()) m.model_path = base_dir / m.model_path;
        if (m.labels_path.is_relative()) m.labels_path = base_dir / m.labels_path;
    }
    return m;
}

ModelManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ModelLoadError("cannot open manifest " + path.string());
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ModelLoadError("manifest " + path.string() + " is not valid JSON");
    return manifest_from_json(j, path.parent_path());
}

nlohmann::ordered_json manifest_to_json(const ModelManifest& m) {
    nlohmann::ordered_json j;
    j["name"] = m.name;
    j["model_path"] = m.model_path.string();
    j["labels_path"] = m.labels_path.string();
    j["preprocess"] = preprocess_to_json(m.preprocess);
    j["output_is_probabilities"] = m.output_is_probabilities;
    return j;
}

std::vector<std::string> read_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ModelLoadError("cannot open labels file " + path.string());
    std::vector<std::string> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        labels.push_back(line);
    }
    while (!labels.empty() && labels.back().empty()) labels.pop_back();
    return labels;
}

struct OnnxClassifier::Pool {
    std::vector<cv::dnn::Net> nets;
    std::vector<std::size_t> idle;
    std::mutex mutex;
    std::condition_variable ready;

    std::size_t acquire() {
        std::unique_lock lock(mutex);
        ready.wait(lock, [&] { return !idle.empty(); });
        const auto slot = idle.back();
        idle.pop_back();
        return slot;
    }

    void release(std::size_t slot) {
        {
            std::lock_guard lock(mutex);
            idle.push_back(slot);
        }
        ready.notify_one();
    }
};

namespace {

cv::Mat to_blob(const Tensor& t) {
    std::vector<int> dims{1};
    dims.insert(dims.end(), t.shape.begin(), t.shape.end());
    cv::Mat blob(static_cast<int>(dims.size()), dims.data(), CV_32F);
    std::copy(t.data.begin(), t.data.end(), blob.ptr<float>());
    return blob;
}

std::vector<double> run_net(cv::dnn::Net& net, const cv::Mat& blob) {
    net.setInput(blob);
    cv::Mat out = net.forward();
    cv::Mat flat = out.reshape(1, 1);
    if (flat.depth() != CV_32F) flat.convertTo(flat, CV_32F);
    std::vector<double> values(flat.total());
    const float* p = flat.ptr<float>();
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = p[i];
    return values;
}

}  // namespace

OnnxClassifier::OnnxClassifier(ModelManifest manifest, std::vector<std::string> labels, std::unique_ptr<Pool> pool)
    : manifest_(std::move(manifest)), labels_(std::move(labels)), pool_(std::move(pool)) {}

OnnxClassifier::~OnnxClassifier() = default;

std::unique_ptr<OnnxClassifier> OnnxClassifier::load(const ModelManifest& manifest, std::size_t sessions) {
    if (!std::filesystem::exists(manifest.model_path))
        throw ModelLoadError(manifest.name + ": model file " + manifest.model_path.string() + " does not exist");
    auto labels = read_labels(manifest.labels_path);
    if (labels.empty()) throw ModelLoadError(manifest.name + ": labels file is empty");

    std::ifstream in(manifest.model_path, std::ios::binary);
    std::vector<uchar> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    auto pool = std::make_unique<Pool>();
    sessions = std::max<std::size_t>(sessions, 1);
    try {
        for (std::size_t i = 0; i < sessions; ++i) {
            auto net = cv::dnn::readNetFromONNX(bytes);
            if (net.empty()) throw ModelLoadError(manifest.name + ": model file could not be parsed");
            net.setPreferableBackend(cv::dnn::DNN_BACKEND_OPENCV);
            net.setPreferableTarget(cv::dnn::DNN_TARGET_CPU);
            pool->nets.push_back(std::move(net));
            pool->idle.push_back(i);
        }
        // Probe the output width once so a label mismatch fails at load time.
        Tensor probe;
        const int s = manifest.preprocess.input_size;
        probe.shape = manifest.preprocess.layout == Layout::ChannelsFirst ? std::vector<int>{3, s, s}
                                                                          : std::vector<int>{s, s, 3};
        probe.data.assign(static_cast<std::size_t>(3) * s * s, 0.0f);
        const auto out = run_net(pool->nets.front(), to_blob(probe));
        if (out.size() != labels.size())
            throw ModelLoadError(manifest.name + ": model output width " + std::to_string(out.size()) +
                                 " does not match " + std::to_string(labels.size()) + " labels");
    } catch (const cv::Exception& e) {
        throw ModelLoadError(manifest.name + ": " + e.what());
    }
    return std::unique_ptr<OnnxClassifier>(new OnnxClassifier(manifest, std::move(labels), std::move(pool)));
}

std::vector<double> OnnxClassifier::classify(const RasterImage& image) const {
    const cv::Mat blob = to_blob(preprocess(image, manifest_.preprocess));
    struct Lease {
        Pool& pool;
        std::size_t slot;
        ~Lease() { pool.release(slot); }
    } lease{*pool_, pool_->acquire()};
    std::vector<double> out;
    try {
        out = run_net(pool_->nets[lease.slot], blob);
    } catch (const cv::Exception& e) {
        throw ClassifierError(manifest_.name + ": " + e.what());
    }
    if (out.size() != labels_.size()) throw ClassifierError(manifest_.name + ": unexpected output width");
    for (double v : out)
        if (!std::isfinite(v)) throw ClassifierError(manifest_.name + ": non-finite model output");
    return manifest_.output_is_probabilities ? out : softmax(out);
}

std::shared_ptr<const Classifier> load_classifier(const std::string& ref, std::size_t sessions) {
    if (ref == "toy") return std::make_shared<ToyClassifier>();
    if (ref.rfind("toy:", 0) == 0) return std::make_shared<ToyClassifier>(ref.substr(4));
    return OnnxClassifier::load(load_manifest(ref), sessions);
}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::vector<std::string> synonyms(const std::string& label) {
    std::vector<std::string> out;
    std::stringstream ss(label);
    std::string part;
    while (std::getline(ss, part, ',')) out.push_back(lower(trim(part)));
    return out;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    std::iota(prev.begin(), prev.end(), 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace

std::vector<std::string> nearest_labels(const std::vector<std::string>& labels, const std::string& query,
                                        std::size_t max_results) {
    const auto q = lower(query);
    std::vector<std::pair<std::size_t, std::size_t>> ranked;  // (distance, label id)
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::size_t best = edit_distance(q, lower(labels[i]));
        for (const auto& s : synonyms(labels[i])) best = std::min(best, edit_distance(q, s));
        ranked.emplace_back(best, i);
    }
    std::stable_sort(ranked.begin(), ranked.end());
    std::vector<std::string> out;
    for (std::size_t i = 0; i < ranked.size() && out.size() < max_results; ++i) out.push_back(labels[ranked[i].second]);
    return out;
}

std::size_t resolve_label(const std::vector<std::string>& labels, const std::string& name_or_id) {
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == name_or_id) return i;

    std::size_t id = 0;
    const char* first = name_or_id.data();
    const char* last = first + name_or_id.size();
    if (auto [ptr, ec] = std::from_chars(first, last, id); ec == std::errc() && ptr == last && !name_or_id.empty()) {
        if (id < labels.size()) return id;
        throw LabelError("label id " + name_or_id + " outside " + std::to_string(labels.size()) + " labels", {});
    }

    const auto q = lower(trim(name_or_id));
    std::optional<std::size_t> match;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto syn = synonyms(labels[i]);
        if (lower(labels[i]) == q || std::find(syn.begin(), syn.end(), q) != syn.end()) {
            if (match) throw LabelError("label '" + name_or_id + "' is ambiguous", {labels[*match], labels[i]});
            match = i;
        }
    }
    if (match) return *match;

    auto near = nearest_labels(labels, name_or_id);
    std::string msg = "unknown label '" + name_or_id + "'";
    if (!near.empty()) {
        msg += "; did you mean";
        for (std::size_t i = 0; i < near.size(); ++i) msg += (i ? ", '" : " '") + near[i] + "'";
        msg += "?";
    }
    throw LabelError(msg, std::move(near));
}

}  // namespace pe
