#include "pe/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pe {

const char* aggregation_name(Aggregation a) {
    switch (a) {
        case Aggregation::Mean: return "mean";
        case Aggregation::Min: return "min";
        case Aggregation::GeometricMean: return "geometric-mean";
    }
    return "mean";
}

Aggregation aggregation_from_name(const std::string& name) {
    if (name == "mean") return Aggregation::Mean;
    if (name == "min") return Aggregation::Min;
    if (name == "geometric-mean") return Aggregation::GeometricMean;
    throw std::invalid_argument("unknown aggregation '" + name + "' (expected mean, min or geometric-mean)");
}

std::vector<std::string> check_objective(const ObjectiveConfig& config) {
    std::vector<std::string> out;
    if (config.members.empty()) out.push_back("objective needs at least one member");
    bool any_positive = false;
    for (std::size_t i = 0; i < config.members.size(); ++i) {
        const auto& m = config.members[i];
        const auto tag = "member " + std::to_string(i) + ": ";
        if (!m.backend) {
            out.push_back(tag + "no backend");
            continue;
        }
        if (m.target_label_id >= m.backend->labels().size()) out.push_back(tag + "target label id out of range");
        if (!std::isfinite(m.weight) || m.weight < 0.0) out.push_back(tag + "weight must be nonnegative");
        any_positive = any_positive || m.weight > 0.0;
    }
    if (!config.members.empty() && !any_positive) out.push_back("at least one member needs a positive weight");
    if (config.render_size < 1) out.push_back("render_size must be >= 1");
    if (config.supersample < 1) out.push_back("supersample must be >= 1");
    return out;
}

double aggregate(std::span<const double> p, std::span<const double> w, Aggregation aggregation) {
    if (p.size() != w.size() || p.empty()) throw std::invalid_argument("aggregate: mismatched or empty inputs");
    double total_w = 0.0;
    for (double x : w) total_w += x;
    if (!(total_w > 0.0)) throw std::invalid_argument("aggregate: weights sum to zero");

    double result = 0.0;
    switch (aggregation) {
        case Aggregation::Mean:
            for (std::size_t i = 0; i < p.size(); ++i) result += w[i] * p[i];
            result /= total_w;
            break;
        case Aggregation::GeometricMean: {
            double log_sum = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) log_sum += w[i] * std::log(std::max(p[i], kGeometricFloor));
            result = std::exp(log_sum / total_w);
            break;
        }
        case Aggregation::Min:
            result = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < p.size(); ++i)
                if (w[i] > 0.0) result = std::min(result, p[i]);
            break;
    }
    return std::clamp(result, 0.0, 1.0);
}

int render_height(int render_size, double aspect) {
    return std::max(1, static_cast<int>(std::lround(render_size / aspect)));
}

EnsembleScore score_image(const RasterImage& image, const ObjectiveConfig& config) {
    EnsembleScore out;
    std::vector<double> probs, weights;
    probs.reserve(config.members.size());
    weights.reserve(config.members.size());
    for (const auto& m : config.members) {
        std::vector<double> p;
        try {
            p = m.backend->classify(image);
        } catch (const std::exception& e) {
            throw MemberError(m.backend->name(), e.what());
        }
        if (m.target_label_id >= p.size()) throw MemberError(m.backend->name(), "target label id out of range");
        const double target = p[m.target_label_id];
        out.per_member.push_back({m.backend->name(), m.backend->labels()[m.target_label_id], m.target_label_id, target});
        probs.push_back(target);
        weights.push_back(m.weight);
    }
    out.aggregate = aggregate(probs, weights, config.aggregation);
    return out;
}

EnsembleScore score(const Drawing& drawing, const ObjectiveConfig& config) {
    const auto image = rasterize(drawing, config.render_size, render_height(config.render_size, drawing.aspect),
                                 config.supersample);
    return score_image(image, config);
}

Objective make_objective(const ObjectiveConfig& config) {
    if (auto problems = check_objective(config); !problems.empty())
        throw std::invalid_argument("invalid objective config: " + problems.front());
    return [config](const Drawing& d) { return score(d, config).aggregate; };
}

}  // namespace pe
