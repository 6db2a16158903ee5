#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pe/classifier.hpp"
#include "pe/render.hpp"
#include "pe/search.hpp"

namespace pe {

enum class Aggregation { Mean, Min, GeometricMean };

const char* aggregation_name(Aggregation a);
Aggregation aggregation_from_name(const std::string& name);

inline constexpr double kGeometricFloor = 1e-12;

struct EnsembleMember {
    std::shared_ptr<const Classifier> backend;
    std::size_t target_label_id = 0;
    double weight = 1.0;
};

struct ObjectiveConfig {
    std::vector<EnsembleMember> members;
    Aggregation aggregation = Aggregation::Mean;
    /// Drawings are rasterized once at render_size wide, then resized per member.
    int render_size = 512;
    int supersample = 4;
};

std::vector<std::string> check_objective(const ObjectiveConfig& config);

struct MemberScore {
    std::string name;
    std::string target_label;
    std::size_t target_label_id = 0;
    double probability = 0.0;
};

struct EnsembleScore {
    double aggregate = 0.0;
    std::vector<MemberScore> per_member;
};

/// A classifier failure with the member it came from.
class MemberError : public std::runtime_error {
public:
    MemberError(std::string member, const std::string& what)
        : std::runtime_error(member + ": " + what), member_(std::move(member)) {}
    const std::string& member() const { return member_; }

private:
    std::string member_;
};

/// Weighted arithmetic mean, weighted geometric mean over max(p, 1e-12), or
/// the unweighted minimum over members with positive weight.
double aggregate(std::span<const double> probabilities, std::span<const double> weights, Aggregation aggregation);

EnsembleScore score(const Drawing& drawing, const ObjectiveConfig& config);
EnsembleScore score_image(const RasterImage& image, const ObjectiveConfig& config);

/// Render height for a drawing rasterized render_size wide.
int render_height(int render_size, double aspect);

/// Adapts score() to the search's Objective signature.
Objective make_objective(const ObjectiveConfig& config);

}  // namespace pe
