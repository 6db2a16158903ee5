#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "pe/classifier.hpp"
#include "pe/preprocess.hpp"
#include "support/oracles.hpp"

using namespace pe;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = PE_FIXTURES;

RasterImage solid(int w, int h, double r, double g, double b) {
    RasterImage img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            img.at(x, y, 0) = static_cast<float>(r);
            img.at(x, y, 1) = static_cast<float>(g);
            img.at(x, y, 2) = static_cast<float>(b);
        }
    return img;
}

RasterImage random_image(std::mt19937& rng, int w, int h) {
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    RasterImage img(w, h);
    for (auto& v : img.pixels) v = u(rng);
    return img;
}

std::array<double, 3> channel_means(const RasterImage& img) {
    std::array<double, 3> m{};
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) m[c] += img.at(x, y, c);
    for (auto& v : m) v /= double(img.width) * img.height;
    return m;
}

}  // namespace

TEST_CASE("bilinear resize of a 2x2 checkerboard") {
    RasterImage src(2, 2);
    for (int c = 0; c < 3; ++c) {
        src.at(0, 0, c) = 1.0f;
        src.at(1, 1, c) = 1.0f;
    }
    // Half-pixel centers put destination samples at -0.25, 0.25, 0.75, 1.25.
    const double w[4][2] = {{1, 0}, {0.75, 0.25}, {0.25, 0.75}, {0, 1}};
    const auto out = resize_bilinear(src, 4, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            const double expected = w[y][0] * w[x][0] + w[y][1] * w[x][1];
            CHECK(out.at(x, y, 0) == doctest::Approx(expected).epsilon(1e-6));
        }
    CHECK(out.at(1, 1, 2) == doctest::Approx(0.625));
}

TEST_CASE("preprocess shapes, ranges and normalization") {
    PreprocessSpec spec;
    spec.input_size = 8;

    SUBCASE("channels-first shape and zero normalization") {
        spec.channel_means = {0.5, 0.25, 0.75};
        spec.channel_stds = {0.5, 0.25, 0.25};
        const auto t = preprocess(solid(20, 10, 0.5, 0.25, 0.75), spec);
        CHECK(t.shape == std::vector<int>{3, 8, 8});
        for (float v : t.data) CHECK(v == doctest::Approx(0.0).epsilon(1e-6));
    }
    SUBCASE("channels-last BGR keeps per-position channel order") {
        spec.layout = Layout::ChannelsLast;
        spec.channel_order = ChannelOrder::BGR;
        const auto t = preprocess(solid(8, 8, 0.1, 0.2, 0.3), spec);
        CHECK(t.shape == std::vector<int>{8, 8, 3});
        CHECK(t.data[0] == doctest::Approx(0.3));
        CHECK(t.data[1] == doctest::Approx(0.2));
        CHECK(t.data[2] == doctest::Approx(0.1));
    }
    SUBCASE("value ranges") {
        spec.value_range = ValueRange::Byte;
        CHECK(preprocess(solid(8, 8, 1, 1, 1), spec).data[0] == doctest::Approx(255.0));
        spec.value_range = ValueRange::Symmetric;
        CHECK(preprocess(solid(8, 8, 0, 0, 0), spec).data[0] == doctest::Approx(-1.0));
        CHECK(preprocess(solid(8, 8, 0.5, 0.5, 0.5), spec).data[0] == doctest::Approx(0.0));
    }
    SUBCASE("center crop takes the middle of the longer side") {
        spec.resize_mode = ResizeMode::ShorterThenCenterCrop;
        RasterImage img(24, 8);
        for (int y = 0; y < 8; ++y)
            for (int x = 8; x < 16; ++x) img.at(x, y, 0) = 1.0f;
        const auto t = preprocess(img, spec);
        for (int i = 0; i < 64; ++i) CHECK(t.data[i] == doctest::Approx(1.0));
    }
    SUBCASE("invalid specs are rejected") {
        spec.channel_stds = {1, 0, 1};
        CHECK_FALSE(check_preprocess(spec).empty());
        auto j = preprocess_to_json(PreprocessSpec{});
        j["value_range"] = {0, 2};
        CHECK_THROWS_AS(preprocess_from_json(j), std::invalid_argument);
    }
    SUBCASE("json round trip") {
        spec.resize_mode = ResizeMode::ShorterThenCenterCrop;
        spec.layout = Layout::ChannelsLast;
        spec.channel_order = ChannelOrder::BGR;
        spec.value_range = ValueRange::Symmetric;
        CHECK(preprocess_from_json(nlohmann::json::parse(preprocess_to_json(spec).dump())) == spec);
    }
}

TEST_CASE("toy classifier matches its closed form") {
    ToyClassifier toy;
    CHECK(toy.labels() == std::vector<std::string>{"red", "green", "blue"});

    const auto red = toy.classify(solid(16, 16, 1, 0, 0));
    CHECK(red[0] == doctest::Approx(std::exp(10.0) / (std::exp(10.0) + 2.0)).epsilon(1e-12));
    CHECK(red[0] == doctest::Approx(0.99990921).epsilon(1e-8));

    const auto gray = toy.classify(solid(5, 7, 0.4, 0.4, 0.4));
    for (double p : gray) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    RasterImage half(10, 10);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 10; ++x) half.at(x, y, x < 5 ? 0 : 2) = 1.0f;
    const auto hp = toy.classify(half);
    const auto expect = oracle::toy_closed_form(0.5, 0.0, 0.5);
    for (int k = 0; k < 3; ++k) CHECK(hp[k] == doctest::Approx(expect[k]).epsilon(1e-12));

    std::mt19937 rng(5);
    for (int i = 0; i < 20; ++i) {
        const auto img = random_image(rng, 7 + i, 9);
        const auto m = channel_means(img);
        const auto p = toy.classify(img);
        const auto e = oracle::toy_closed_form(m[0], m[1], m[2]);
        for (int k = 0; k < 3; ++k) CHECK(std::abs(p[k] - e[k]) < 1e-9);
    }
}

TEST_CASE("softmax is stable for large logits") {
    const std::vector<double> logits{1000.0, 1000.0, -1000.0};
    const auto p = softmax(logits);
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[2] == doctest::Approx(0.0));
}

TEST_CASE("onnx logits model agrees with the toy classifier") {
    const auto onnx = OnnxClassifier::load(load_manifest(kFixtures / "rgb_logits.json"));
    ToyClassifier toy;
    CHECK(onnx->labels() == toy.labels());
    CHECK(onnx->name() == "rgb_logits");
    std::mt19937 rng(9);
    for (int i = 0; i < 10; ++i) {
        // 16x16 matches input_size, so no resampling separates the two.
        const auto img = random_image(rng, 16, 16);
        const auto a = onnx->classify(img);
        const auto b = toy.classify(img);
        REQUIRE(a.size() == 3);
        for (int k = 0; k < 3; ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-5));
    }
}

TEST_CASE("onnx channels-last model that already outputs probabilities") {
    const auto onnx = OnnxClassifier::load(load_manifest(kFixtures / "rgb_softmax_nhwc.json"));
    const auto p = onnx->classify(solid(16, 16, 0.0, 0.0, 1.0));
    const auto e = oracle::toy_closed_form(0.0, 0.0, 1.0);
    for (int k = 0; k < 3; ++k) CHECK(p[k] == doctest::Approx(e[k]).epsilon(1e-5));
}

TEST_CASE("onnx cnn models produce distributions over their labels") {
    for (const char* name : {"cnn0.json", "cnn1.json", "cnn2.json"}) {
        const auto c = load_classifier((kFixtures / name).string(), 2);
        CHECK(c->labels().size() == 10);
        std::mt19937 rng(1);
        const auto p = c->classify(random_image(rng, 48, 40));
        double sum = 0.0;
        for (double v : p) sum += v;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("model loading failures") {
    SUBCASE("label count mismatch") {
        try {
            OnnxClassifier::load(load_manifest(kFixtures / "mismatch.json"));
            FAIL("expected ModelLoadError");
        } catch (const ModelLoadError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("10") != std::string::npos);
            CHECK(msg.find("4") != std::string::npos);
        }
    }
    SUBCASE("missing model file") {
        auto m = load_manifest(kFixtures / "rgb_logits.json");
        m.model_path = kFixtures / "does_not_exist.onnx";
        CHECK_THROWS_AS(OnnxClassifier::load(m), ModelLoadError);
    }
    SUBCASE("missing manifest") {
        CHECK_THROWS_AS(load_classifier((kFixtures / "nope.json").string()), ModelLoadError);
    }
}

TEST_CASE("fixture manifests satisfy the manifest schema") {
    std::ifstream in(kFixtures / "manifest.schema.json");
    const auto schema = nlohmann::json::parse(in);
    const auto& pre_schema = schema["properties"]["preprocess"];
    for (const char* name : {"rgb_logits.json", "rgb_softmax_nhwc.json", "cnn0.json", "mismatch.json"}) {
        std::ifstream f(kFixtures / name);
        const auto j = nlohmann::json::parse(f);
        for (const auto& key : schema["required"]) CHECK(j.contains(key.get<std::string>()));
        for (const auto& key : pre_schema["required"]) CHECK(j["preprocess"].contains(key.get<std::string>()));
        const auto& p = j["preprocess"];
        for (const char* field : {"resize_mode", "value_range", "channel_order", "layout"}) {
            const auto& allowed = pre_schema["properties"][field]["enum"];
            CHECK(std::find(allowed.begin(), allowed.end(), p[field]) != allowed.end());
        }
        // What we write back must also satisfy the schema and parse identically.
        const auto m = manifest_from_json(j, kFixtures);
        const auto back = nlohmann::json::parse(manifest_to_json(m).dump());
        for (const auto& key : schema["required"]) CHECK(back.contains(key.get<std::string>()));
        CHECK(manifest_from_json(back, kFixtures).preprocess == m.preprocess);
    }
}

TEST_CASE("manifest parsing rejects malformed input") {
    std::ifstream f(kFixtures / "rgb_logits.json");
    const auto good = nlohmann::json::parse(f);
    auto j = good;
    j.erase("labels_path");
    CHECK_THROWS_AS(manifest_from_json(j), ModelLoadError);
    j = good;
    j["preprocess"]["layout"] = "sideways";
    CHECK_THROWS_AS(manifest_from_json(j), ModelLoadError);
    j = good;
    j["output_is_probabilities"] = "yes";
    CHECK_THROWS_AS(manifest_from_json(j), ModelLoadError);
}

TEST_CASE("label resolution") {
    const std::vector<std::string> labels{"tench", "tick", "electric guitar", "acoustic guitar", "Great white shark, white shark"};
    CHECK(resolve_label(labels, "tick") == 1);
    CHECK(resolve_label(labels, "2") == 2);
    CHECK(resolve_label(labels, "TICK") == 1);
    CHECK(resolve_label(labels, "white shark") == 4);
    try {
        resolve_label(labels, "tickk");
        FAIL("expected LabelError");
    } catch (const LabelError& e) {
        REQUIRE_FALSE(e.suggestions().empty());
        CHECK(e.suggestions().front() == "tick");
        CHECK(std::string(e.what()).find("did you mean 'tick'") != std::string::npos);
    }
    CHECK_THROWS_AS(resolve_label(labels, "99"), LabelError);
}
