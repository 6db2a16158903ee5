#include <atomic>
#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "pe/genome_io.hpp"
#include "pe/render.hpp"
#include "pe/search.hpp"

using namespace pe;

namespace {

StrokeCountBounds bounds_of(const SearchConfig& c) {
    return {c.stroke_count_bounds.min, c.stroke_count_bounds.max};
}

std::size_t changed_points(const Stroke& a, const Stroke& b) {
    std::size_t n = 0;
    for (std::size_t k = 0; k < a.points.size(); ++k)
        if (a.points[k].x != b.points[k].x || a.points[k].y != b.points[k].y) ++n;
    return n;
}

std::size_t changed_strokes(const Drawing& a, const Drawing& b) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.strokes.size(); ++i) {
        const auto& s = a.strokes[i];
        const auto& t = b.strokes[i];
        if (changed_points(s, t) || s.thickness != t.thickness || s.color_index != t.color_index) ++n;
    }
    return n;
}

std::size_t changed_palette(const Drawing& a, const Drawing& b) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.palette.size(); ++i)
        if (!(a.palette[i] == b.palette[i])) ++n;
    return n;
}

/// Mean x of each stroke's first point; cheap and in [0,1].
double mean_first_coord(const Drawing& d) {
    if (d.strokes.empty()) return 0.0;
    double s = 0.0;
    for (const auto& st : d.strokes) s += st.points.front().x;
    return s / d.strokes.size();
}

}  // namespace

TEST_CASE("random genomes respect the configured bounds") {
    SearchConfig c;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Rng rng(derive_stream(seed, 0, 0));
        const auto g = random_genome(rng, c);
        CHECK(validate(g, bounds_of(c)).empty());
        CHECK(g.palette.size() == c.palette_size);
        CHECK(g.strokes.size() >= 5);
        CHECK(g.strokes.size() <= 20);
        for (const auto& s : g.strokes) {
            CHECK(s.points.size() >= 2);
            CHECK(s.points.size() <= 4);
            CHECK(s.thickness > 0.0);
            CHECK(s.thickness <= kMaxThickness);
        }
    }
}

TEST_CASE("random genome stroke count is uniform over the bounds") {
    SearchConfig c;
    double total = 0.0;
    std::set<std::size_t> seen;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        Rng rng(derive_stream(seed, 0, 0));
        const auto n = random_genome(rng, c).strokes.size();
        total += n;
        seen.insert(n);
    }
    CHECK(std::abs(total / 1000.0 - 12.5) <= 0.75);
    CHECK(seen.size() == 16);
}

TEST_CASE("random genomes are a pure function of the rng state") {
    SearchConfig c;
    Rng a(derive_stream(42, 0, 0));
    Rng b(derive_stream(42, 0, 0));
    CHECK(serialize_genome(random_genome(a, c)) == serialize_genome(random_genome(b, c)));
    Rng other(derive_stream(43, 0, 0));
    Rng again(derive_stream(42, 0, 0));
    CHECK(serialize_genome(random_genome(other, c)) != serialize_genome(random_genome(again, c)));
}

TEST_CASE("derived streams differ across seed, iteration and candidate") {
    std::set<std::uint64_t> values;
    for (std::uint64_t s = 0; s < 4; ++s)
        for (std::uint64_t t = 0; t < 16; ++t)
            for (std::uint64_t i = 0; i < 16; ++i) values.insert(derive_stream(s, t, i));
    CHECK(values.size() == 4 * 16 * 16);
}

TEST_CASE("mutation keeps genomes valid and changes exactly what the op names") {
    SearchConfig c;
    std::map<MutationOp, int> counts;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        Rng init(derive_stream(seed, 0, 0));
        const auto g = random_genome(init, c);
        Rng rng(derive_stream(seed, 1, 0));
        MutationOp op{};
        const auto m = mutate(g, rng, c, &op);
        ++counts[op];
        REQUIRE(validate(m, bounds_of(c)).empty());
        CHECK(m.background_index == g.background_index);
        switch (op) {
            case MutationOp::JitterPoint: {
                REQUIRE(m.strokes.size() == g.strokes.size());
                CHECK(changed_strokes(g, m) <= 1);
                std::size_t pts = 0;
                for (std::size_t i = 0; i < g.strokes.size(); ++i) pts += changed_points(g.strokes[i], m.strokes[i]);
                CHECK(pts <= 1);
                CHECK(changed_palette(g, m) == 0);
                break;
            }
            case MutationOp::TranslateStroke:
            case MutationOp::ChangeThickness:
            case MutationOp::ChangeStrokeColor:
                REQUIRE(m.strokes.size() == g.strokes.size());
                CHECK(changed_strokes(g, m) <= 1);
                CHECK(changed_palette(g, m) == 0);
                if (op == MutationOp::ChangeStrokeColor) CHECK(changed_strokes(g, m) == 1);
                break;
            case MutationOp::ChangePaletteColor:
                CHECK(changed_strokes(g, m) == 0);
                CHECK(changed_palette(g, m) <= 1);
                break;
            case MutationOp::AddStroke:
                CHECK(m.strokes.size() == g.strokes.size() + 1);
                CHECK(changed_palette(g, m) == 0);
                break;
            case MutationOp::RemoveStroke:
                CHECK(m.strokes.size() + 1 == g.strokes.size());
                CHECK(changed_palette(g, m) == 0);
                break;
            case MutationOp::SwapStrokeOrder:
                REQUIRE(m.strokes.size() == g.strokes.size());
                CHECK(changed_strokes(g, m) <= 2);
                CHECK(changed_palette(g, m) == 0);
                break;
        }
    }
    CHECK(counts.size() == kMutationOpCount);
}

TEST_CASE("mutation is deterministic for a given rng state") {
    SearchConfig c;
    Rng init(derive_stream(7, 0, 0));
    const auto g = random_genome(init, c);
    for (std::uint64_t i = 0; i < 50; ++i) {
        Rng a(derive_stream(7, 1, i));
        Rng b(derive_stream(7, 1, i));
        CHECK(serialize_genome(mutate(g, a, c)) == serialize_genome(mutate(g, b, c)));
    }
}

TEST_CASE("mutation only picks applicable ops") {
    SearchConfig c;
    c.stroke_count_bounds = {0, 1};
    Drawing empty;
    empty.palette = {{0, 0, 0}};
    for (std::uint64_t i = 0; i < 100; ++i) {
        Rng rng(derive_stream(1, 1, i));
        MutationOp op{};
        const auto m = mutate(empty, rng, c, &op);
        CHECK((op == MutationOp::AddStroke || op == MutationOp::ChangePaletteColor));
        CHECK(validate(m, {0, 1}).empty());
    }

    SUBCASE("weights select a single op") {
        SearchConfig only;
        only.mutation_weights.fill(0.0);
        only.mutation_weights[static_cast<std::size_t>(MutationOp::SwapStrokeOrder)] = 1.0;
        Rng init(derive_stream(3, 0, 0));
        const auto g = random_genome(init, only);
        for (std::uint64_t i = 0; i < 20; ++i) {
            Rng rng(derive_stream(3, 1, i));
            MutationOp op{};
            mutate(g, rng, only, &op);
            CHECK(op == MutationOp::SwapStrokeOrder);
        }
    }

    SUBCASE("no applicable op returns the input") {
        SearchConfig only;
        only.mutation_weights.fill(0.0);
        only.mutation_weights[static_cast<std::size_t>(MutationOp::RemoveStroke)] = 1.0;
        only.stroke_count_bounds = {0, 0};
        Rng rng(1);
        CHECK(serialize_genome(mutate(empty, rng, only)) == serialize_genome(empty));
    }
}

TEST_CASE("zero iterations evaluates only the initial genome") {
    SearchConfig c;
    c.iterations = 0;
    int calls = 0;
    const auto r = hill_climb([&](const Drawing&) { ++calls; return 0.5; }, c);
    CHECK(calls == 1);
    CHECK(r.evaluations == 1);
    CHECK(r.trace.size() == 1);
    CHECK(r.best_score == 0.5);
    Rng init(derive_stream(c.seed, 0, 0));
    CHECK(serialize_genome(r.best_genome) == serialize_genome(random_genome(init, c)));
}

TEST_CASE("hill climbing accounting and monotone trace") {
    SearchConfig c;
    c.iterations = 60;
    c.candidates_per_iter = 5;
    c.stagnation_restart = 10;
    std::atomic<int> calls{0};
    const auto r = hill_climb([&](const Drawing& d) { ++calls; return mean_first_coord(d); }, c);
    CHECK(r.evaluations == 1 + 60 * 5);
    CHECK(calls.load() == 301);
    REQUIRE(r.trace.size() == 61);
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] >= r.trace[i - 1]);
    CHECK(r.best_score == r.trace.back());
    CHECK(mean_first_coord(r.best_genome) == r.best_score);
    CHECK(r.trace.back() > r.trace.front());
}

TEST_CASE("stagnation triggers restarts") {
    SearchConfig c;
    c.iterations = 30;
    c.candidates_per_iter = 2;
    c.stagnation_restart = 5;
    const auto r = hill_climb([](const Drawing&) { return 0.25; }, c);
    // Every 6th iteration is a restart after 5 stagnant ones.
    CHECK(r.restarts == 5);
    CHECK(r.evaluations == 61);
    c.stagnation_restart = 0;
    CHECK(hill_climb([](const Drawing&) { return 0.25; }, c).restarts == 0);
}

TEST_CASE("search results do not depend on worker count") {
    SearchConfig c;
    c.seed = 11;
    c.iterations = 40;
    c.candidates_per_iter = 8;
    const Objective obj = [](const Drawing& d) { return mean_first_coord(d); };
    const auto a = hill_climb(obj, c, {1, {}});
    const auto b = hill_climb(obj, c, {8, {}});
    CHECK(serialize_genome(a.best_genome) == serialize_genome(b.best_genome));
    CHECK(a.trace == b.trace);
    CHECK(a.restarts == b.restarts);
}

TEST_CASE("objective failures carry the offending genome") {
    SearchConfig c;
    c.iterations = 3;
    SUBCASE("exception") {
        try {
            hill_climb([](const Drawing&) -> double { throw std::runtime_error("backend exploded"); }, c);
            FAIL("expected SearchError");
        } catch (const SearchError& e) {
            CHECK(std::string(e.what()).find("backend exploded") != std::string::npos);
            CHECK_NOTHROW(parse_genome(e.genome_json()));
        }
    }
    SUBCASE("out of range") {
        CHECK_THROWS_AS(hill_climb([](const Drawing&) { return 1.5; }, c), SearchError);
        CHECK_THROWS_AS(hill_climb([](const Drawing&) { return std::nan(""); }, c), SearchError);
    }
}

TEST_CASE("search config validation and JSON") {
    SearchConfig c;
    CHECK(check_config(c).empty());
    CHECK(1 + c.iterations * c.candidates_per_iter <= 2000);
    CHECK(iterations_for_budget(2000, 8) == 249);
    CHECK(iterations_for_budget(1, 8) == 0);

    SearchConfig bad;
    bad.candidates_per_iter = 0;
    bad.stroke_count_bounds = {9, 3};
    bad.mutation_weights.fill(0.0);
    CHECK(check_config(bad).size() == 3);

    c.seed = 99;
    c.mutation_weights[2] = 3.5;
    const auto j = search_config_to_json(c);
    CHECK(j["mutation_weights"]["change-thickness"] == 3.5);
    CHECK(search_config_from_json(nlohmann::json::parse(j.dump())) == c);

    const auto partial = search_config_from_json(nlohmann::json::parse(R"({"mutation_weights": {"add-stroke": 2}})"));
    CHECK(partial.mutation_weights[static_cast<std::size_t>(MutationOp::AddStroke)] == 2.0);
    CHECK(partial.mutation_weights[0] == 0.0);
    CHECK_THROWS_AS(search_config_from_json(nlohmann::json::parse(R"({"mutation_weights": {"explode": 1}})")),
                    std::invalid_argument);
}

TEST_CASE("trace csv") {
    CHECK(trace_csv({0.25, 0.5}) == "iteration,best_score\n0,0.25\n1,0.5\n");
}
