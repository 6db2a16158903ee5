#include "pe/search.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pe/genome_io.hpp"
#include "pe/parallel.hpp"

namespace pe {

namespace {

constexpr std::array<const char*, kMutationOpCount> kOpNames = {
    "jitter-point",       "translate-stroke", "change-thickness", "change-stroke-color",
    "change-palette-color", "add-stroke",     "remove-stroke",    "swap-stroke-order",
};

constexpr double kMinThickness = 1e-3;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

std::size_t uniform_count(Rng& rng, CountBounds b) {
    return std::uniform_int_distribution<std::size_t>(b.min, b.max)(rng);
}

double gaussian(Rng& rng, double sigma) {
    if (sigma <= 0.0) return 0.0;
    return std::normal_distribution<double>(0.0, sigma)(rng);
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

ColorRGB random_color(Rng& rng) { return {uniform01(rng), uniform01(rng), uniform01(rng)}; }

Stroke random_stroke(Rng& rng, const SearchConfig& config, std::size_t palette_size) {
    Stroke s;
    const auto n = uniform_count(rng, config.points_per_stroke_bounds);
    s.points.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double x = uniform01(rng);
        const double y = uniform01(rng);
        s.points.push_back({x, y});
    }
    // 1 - U[0,1) lies in (0,1], so thickness is never zero.
    s.thickness = kMaxThickness * (1.0 - uniform01(rng));
    s.color_index = uniform_index(rng, palette_size);
    return s;
}

bool applicable(MutationOp op, const Drawing& g, const SearchConfig& config) {
    const auto n = g.strokes.size();
    switch (op) {
        case MutationOp::JitterPoint:
        case MutationOp::TranslateStroke:
        case MutationOp::ChangeThickness:
            return n > 0;
        case MutationOp::ChangeStrokeColor:
            return n > 0 && g.palette.size() >= 2;
        case MutationOp::ChangePaletteColor:
            return !g.palette.empty();
        case MutationOp::AddStroke:
            return n < config.stroke_count_bounds.max;
        case MutationOp::RemoveStroke:
            return n > 0 && n > config.stroke_count_bounds.min;
        case MutationOp::SwapStrokeOrder:
            return n >= 2;
    }
    return false;
}

}  // namespace

const char* mutation_op_name(MutationOp op) { return kOpNames[static_cast<std::size_t>(op)]; }

MutationOp mutation_op_from_name(const std::string& name) {
    for (std::size_t i = 0; i < kOpNames.size(); ++i)
        if (name == kOpNames[i]) return static_cast<MutationOp>(i);
    throw std::invalid_argument("unknown mutation op '" + name + "'");
}

std::vector<std::string> check_config(const SearchConfig& c) {
    std::vector<std::string> out;
    if (c.candidates_per_iter < 1) out.push_back("candidates_per_iter must be >= 1");
    if (c.stroke_count_bounds.min > c.stroke_count_bounds.max) out.push_back("stroke_count_bounds must be ordered");
    if (c.points_per_stroke_bounds.min > c.points_per_stroke_bounds.max)
        out.push_back("points_per_stroke_bounds must be ordered");
    if (c.points_per_stroke_bounds.min < 2) out.push_back("points_per_stroke_bounds.min must be >= 2");
    if (c.palette_size < 1) out.push_back("palette_size must be >= 1");
    double total = 0.0;
    for (double w : c.mutation_weights) {
        if (!std::isfinite(w) || w < 0.0) out.push_back("mutation weights must be finite and nonnegative");
        else total += w;
    }
    if (total <= 0.0) out.push_back("mutation weights must not all be zero");
    for (double s : {c.jitter_sigma, c.thickness_sigma, c.color_sigma})
        if (!std::isfinite(s) || s < 0.0) out.push_back("mutation sigmas must be finite and nonnegative");
    return out;
}

std::size_t iterations_for_budget(std::size_t budget, std::size_t candidates_per_iter) {
    if (budget == 0 || candidates_per_iter == 0) return 0;
    return (budget - 1) / candidates_per_iter;
}

nlohmann::ordered_json search_config_to_json(const SearchConfig& c) {
    nlohmann::ordered_json j;
    j["seed"] = c.seed;
    j["iterations"] = c.iterations;
    j["candidates_per_iter"] = c.candidates_per_iter;
    j["stroke_count_bounds"] = {c.stroke_count_bounds.min, c.stroke_count_bounds.max};
    j["points_per_stroke_bounds"] = {c.points_per_stroke_bounds.min, c.points_per_stroke_bounds.max};
    j["palette_size"] = c.palette_size;
    nlohmann::ordered_json w;
    for (std::size_t i = 0; i < kMutationOpCount; ++i) w[kOpNames[i]] = c.mutation_weights[i];
    j["mutation_weights"] = std::move(w);
    j["stagnation_restart"] = c.stagnation_restart;
    j["jitter_sigma"] = c.jitter_sigma;
    j["thickness_sigma"] = c.thickness_sigma;
    j["color_sigma"] = c.color_sigma;
    return j;
}

SearchConfig search_config_from_json(const nlohmann::json& j) {
    SearchConfig c;
    if (!j.is_object()) throw std::invalid_argument("search config must be an object");
    auto bounds = [&](const char* key, CountBounds& b) {
        if (!j.contains(key)) return;
        const auto& v = j.at(key);
        if (!v.is_array() || v.size() != 2) throw std::invalid_argument(std::string(key) + " must be [min,max]");
        b = {v[0].get<std::size_t>(), v[1].get<std::size_t>()};
    };
    try {
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("iterations")) c.iterations = j.at("iterations").get<std::size_t>();
        if (j.contains("candidates_per_iter")) c.candidates_per_iter = j.at("candidates_per_iter").get<std::size_t>();
        bounds("stroke_count_bounds", c.stroke_count_bounds);
        bounds("points_per_stroke_bounds", c.points_per_stroke_bounds);
        if (j.contains("palette_size")) c.palette_size = j.at("palette_size").get<std::size_t>();
        if (j.contains("mutation_weights")) {
            const auto& w = j.at("mutation_weights");
            if (!w.is_object()) throw std::invalid_argument("mutation_weights must be an object of op -> weight");
            c.mutation_weights.fill(0.0);
            for (const auto& [name, value] : w.items())
                c.mutation_weights[static_cast<std::size_t>(mutation_op_from_name(name))] = value.get<double>();
        }
        if (j.contains("stagnation_restart")) c.stagnation_restart = j.at("stagnation_restart").get<std::size_t>();
        if (j.contains("jitter_sigma")) c.jitter_sigma = j.at("jitter_sigma").get<double>();
        if (j.contains("thickness_sigma")) c.thickness_sigma = j.at("thickness_sigma").get<double>();
        if (j.contains("color_sigma")) c.color_sigma = j.at("color_sigma").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("search config: ") + e.what());
    }
    return c;
}

std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xd6e8feb86659fd93ull));
}

Drawing random_genome(Rng& rng, const SearchConfig& config) {
    Drawing d;
    d.palette.reserve(config.palette_size);
    for (std::size_t i = 0; i < config.palette_size; ++i) d.palette.push_back(random_color(rng));
    d.background_index = uniform_index(rng, config.palette_size);
    const auto n = uniform_count(rng, config.stroke_count_bounds);
    d.strokes.reserve(n);
    for (std::size_t i = 0; i < n; ++i) d.strokes.push_back(random_stroke(rng, config, config.palette_size));
    return d;
}

Drawing mutate(const Drawing& genome, Rng& rng, const SearchConfig& config) {
    return mutate(genome, rng, config, nullptr);
}

Drawing mutate(const Drawing& genome, Rng& rng, const SearchConfig& config, MutationOp* applied) {
    std::array<double, kMutationOpCount> weights{};
    double total = 0.0;
    for (std::size_t i = 0; i < kMutationOpCount; ++i) {
        if (applicable(static_cast<MutationOp>(i), genome, config)) weights[i] = config.mutation_weights[i];
        total += weights[i];
    }
    Drawing out = genome;
    if (total <= 0.0) return out;

    const double u = uniform01(rng) * total;
    std::size_t pick = 0;
    double acc = 0.0;
    for (std::size_t i = 0; i < kMutationOpCount; ++i) {
        if (weights[i] <= 0.0) continue;
        pick = i;
        acc += weights[i];
        if (u < acc) break;
    }
    const auto op = static_cast<MutationOp>(pick);
    if (applied) *applied = op;

    auto& strokes = out.strokes;
    switch (op) {
        case MutationOp::JitterPoint: {
            auto& s = strokes[uniform_index(rng, strokes.size())];
            auto& p = s.points[uniform_index(rng, s.points.size())];
            const double dx = gaussian(rng, config.jitter_sigma);
            const double dy = gaussian(rng, config.jitter_sigma);
            p.x = clamp01(p.x + dx);
            p.y = clamp01(p.y + dy);
            break;
        }
        case MutationOp::TranslateStroke: {
            auto& s = strokes[uniform_index(rng, strokes.size())];
            const double dx = gaussian(rng, config.jitter_sigma);
            const double dy = gaussian(rng, config.jitter_sigma);
            for (auto& p : s.points) {
                p.x = clamp01(p.x + dx);
                p.y = clamp01(p.y + dy);
            }
            break;
        }
        case MutationOp::ChangeThickness: {
            auto& s = strokes[uniform_index(rng, strokes.size())];
            s.thickness = std::clamp(s.thickness + gaussian(rng, config.thickness_sigma), kMinThickness, kMaxThickness);
            break;
        }
        case MutationOp::ChangeStrokeColor: {
            auto& s = strokes[uniform_index(rng, strokes.size())];
            // Pick among the other palette entries.
            const auto k = uniform_index(rng, out.palette.size() - 1);
            s.color_index = k >= s.color_index ? k + 1 : k;
            break;
        }
        case MutationOp::ChangePaletteColor: {
            auto& c = out.palette[uniform_index(rng, out.palette.size())];
            const double dr = gaussian(rng, config.color_sigma);
            const double dg = gaussian(rng, config.color_sigma);
            const double db = gaussian(rng, config.color_sigma);
            c = {clamp01(c.r + dr), clamp01(c.g + dg), clamp01(c.b + db)};
            break;
        }
        case MutationOp::AddStroke: {
            const auto pos = std::uniform_int_distribution<std::size_t>(0, strokes.size())(rng);
            strokes.insert(strokes.begin() + static_cast<std::ptrdiff_t>(pos),
                           random_stroke(rng, config, out.palette.size()));
            break;
        }
        case MutationOp::RemoveStroke:
            strokes.erase(strokes.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, strokes.size())));
            break;
        case MutationOp::SwapStrokeOrder: {
            const auto i = uniform_index(rng, strokes.size());
            auto j = uniform_index(rng, strokes.size() - 1);
            if (j >= i) ++j;
            std::swap(strokes[i], strokes[j]);
            break;
        }
    }
    return out;
}

namespace {

double evaluate(const Objective& objective, const Drawing& genome) {
    double score = 0.0;
    try {
        score = objective(genome);
    } catch (const std::exception& e) {
        throw SearchError(std::string("objective failed: ") + e.what(), serialize_genome(genome));
    }
    if (!std::isfinite(score) || score < 0.0 || score > 1.0)
        throw SearchError("objective returned " + std::to_string(score) + ", outside [0,1]", serialize_genome(genome));
    return score;
}

}  // namespace

SearchResult hill_climb(const Objective& objective, const SearchConfig& config, const SearchOptions& options) {
    if (auto problems = check_config(config); !problems.empty()) {
        std::string msg = "invalid search config:";
        for (const auto& p : problems) msg += " " + p + ";";
        throw std::invalid_argument(msg);
    }

    SearchResult result;
    Rng init(derive_stream(config.seed, 0, 0));
    Drawing incumbent = random_genome(init, config);
    double incumbent_score = evaluate(objective, incumbent);
    result.evaluations = 1;
    result.best_genome = incumbent;
    result.best_score = incumbent_score;
    result.trace.reserve(config.iterations + 1);
    result.trace.push_back(result.best_score);

    const std::size_t n = config.candidates_per_iter;
    std::vector<Drawing> candidates(n);
    std::vector<double> scores(n);
    std::size_t stagnant = 0;

    for (std::size_t t = 1; t <= config.iterations; ++t) {
        const bool restart = config.stagnation_restart > 0 && stagnant >= config.stagnation_restart;
        parallel_for(n, options.workers, [&](std::size_t i) {
            Rng rng(derive_stream(config.seed, t, i));
            candidates[i] = restart ? random_genome(rng, config) : mutate(incumbent, rng, config);
            scores[i] = evaluate(objective, candidates[i]);
        });
        result.evaluations += n;

        std::size_t best = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (scores[i] > scores[best]) best = i;

        if (restart) {
            // A restart iteration spends its candidates on fresh genomes and
            // adopts the best of them unconditionally.
            incumbent = candidates[best];
            incumbent_score = scores[best];
            stagnant = 0;
            ++result.restarts;
        } else if (scores[best] > incumbent_score) {
            incumbent = candidates[best];
            incumbent_score = scores[best];
            stagnant = 0;
        } else {
            ++stagnant;
        }

        if (scores[best] > result.best_score) {
            result.best_score = scores[best];
            result.best_genome = candidates[best];
        }
        result.trace.push_back(result.best_score);
        if (options.on_iteration) options.on_iteration(t, result.best_score);
    }
    return result;
}

std::string trace_csv(const std::vector<double>& trace) {
    std::ostringstream os;
    os.precision(17);
    os << "iteration,best_score\n";
    for (std::size_t i = 0; i < trace.size(); ++i) os << i << "," << trace[i] << "\n";
    return os.str();
}

}  // namespace pe
