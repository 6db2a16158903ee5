#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "pe/render.hpp"

namespace pe {

enum class MutationOp : int {
    JitterPoint = 0,
    TranslateStroke,
    ChangeThickness,
    ChangeStrokeColor,
    ChangePaletteColor,
    AddStroke,
    RemoveStroke,
    SwapStrokeOrder,
};

inline constexpr std::size_t kMutationOpCount = 8;

const char* mutation_op_name(MutationOp op);
MutationOp mutation_op_from_name(const std::string& name);

struct CountBounds {
    std::size_t min = 0;
    std::size_t max = 0;

    bool operator==(const CountBounds&) const = default;
};

struct SearchConfig {
    std::uint64_t seed = 0;
    std::size_t iterations = 249;
    std::size_t candidates_per_iter = 8;
    CountBounds stroke_count_bounds{5, 20};
    CountBounds points_per_stroke_bounds{2, 4};
    std::size_t palette_size = 4;
    std::array<double, kMutationOpCount> mutation_weights{1, 1, 1, 1, 1, 1, 1, 1};
    /// Non-improving iterations before re-randomizing; 0 disables restarts.
    std::size_t stagnation_restart = 100;
    double jitter_sigma = 0.05;
    double thickness_sigma = 0.02;
    double color_sigma = 0.1;

    bool operator==(const SearchConfig&) const = default;
};

/// Empty when the config satisfies its invariants.
std::vector<std::string> check_config(const SearchConfig& config);

/// Largest iteration count whose evaluation total 1 + iterations *
/// candidates_per_iter stays within budget.
std::size_t iterations_for_budget(std::size_t budget, std::size_t candidates_per_iter);

nlohmann::ordered_json search_config_to_json(const SearchConfig& config);
/// Missing keys keep their defaults.
SearchConfig search_config_from_json(const nlohmann::json& j);

using Rng = std::mt19937_64;

/// Fixed 64-bit mix of (seed, a, b) used to derive independent rng streams.
std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

Drawing random_genome(Rng& rng, const SearchConfig& config);

/// Applies exactly one weighted mutation op that is applicable to the genome.
/// Returns the input unchanged only when no op with positive weight applies.
Drawing mutate(const Drawing& genome, Rng& rng, const SearchConfig& config);

/// Same as mutate() but also reports which op ran.
Drawing mutate(const Drawing& genome, Rng& rng, const SearchConfig& config, MutationOp* applied);

struct SearchResult {
    Drawing best_genome;
    double best_score = 0.0;
    std::vector<double> trace;
    std::size_t evaluations = 0;
    std::size_t restarts = 0;
};

/// Objective failure surfaced with the genome that triggered it.
class SearchError : public std::runtime_error {
public:
    SearchError(const std::string& what, std::string genome_json)
        : std::runtime_error(what), genome_json_(std::move(genome_json)) {}
    const std::string& genome_json() const { return genome_json_; }

private:
    std::string genome_json_;
};

using Objective = std::function<double(const Drawing&)>;

struct SearchOptions {
    std::size_t workers = 1;
    /// Called after every iteration with (iteration, best-so-far score).
    std::function<void(std::size_t, double)> on_iteration;
};

SearchResult hill_climb(const Objective& objective, const SearchConfig& config, const SearchOptions& options = {});

/// "iteration,best_score" rows, iteration 0 being the initial genome.
std::string trace_csv(const std::vector<double>& trace);

}  // namespace pe
