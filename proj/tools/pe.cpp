// pe: command-line front end. Parsing and wiring only; behavior lives in
// pe::app and is tested through the library.

#include <iostream>

#include "CLI11.hpp"
#include "pe/app.hpp"
#include "pe/parallel.hpp"

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace pe::app;

    CLI::App cli{"Evolve stroke drawings against classifier ensembles and evaluate their transfer"};
    cli.require_subcommand(1);
    std::size_t workers = pe::default_workers();
    cli.add_option("--workers", workers, "Worker threads (default: $PE_WORKERS or hardware threads)")
        ->check(CLI::PositiveNumber);

    auto* draw = cli.add_subcommand("draw", "Search for a drawing that maximizes the ensemble objective");
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    draw->add_option("--config", config_path, "Run config JSON")->required();
    draw->add_option("--seed", seed, "Override search.seed");
    draw->add_option("--out", out_dir, "Override output_dir");
    draw->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

    auto* eval = cli.add_subcommand("eval", "Top-k transfer report for an image across models");
    EvalOptions eval_opts;
    std::string models_arg, ensemble_arg, remote_arg;
    bool chart = false;
    std::string chart_out = "transfer_chart.png";
    std::string eval_out;
    eval->add_option("--image", eval_opts.image, "Image to evaluate (PNG/JPEG)")->required();
    eval->add_option("--models", models_arg, "Comma-separated manifest paths (or 'toy')");
    eval->add_option("--ensemble", ensemble_arg, "Comma-separated names of models used in the search");
    eval->add_option("--target-label", eval_opts.target_label, "Target label name or id")->required();
    eval->add_option("--k", eval_opts.k, "Predictions per model")->capture_default_str();
    eval->add_flag("--chart", chart, "Also write a bar-chart grid PNG");
    eval->add_option("--chart-out", chart_out, "Chart path")->capture_default_str();
    eval->add_option("--out", eval_out, "Also write the report JSON here");
    eval->add_option("--remote", remote_arg, "Comma-separated remote classifier endpoints");
    eval->add_option("--remote-timeout", eval_opts.remote_timeout, "Seconds per remote request")
        ->capture_default_str();
    eval->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

    auto* rank = cli.add_subcommand("rank", "Rank an image's target response against validation images");
    RankOptions rank_opts;
    std::string rank_out;
    rank->add_option("--image", rank_opts.image, "Image to rank")->required();
    rank->add_option("--validation", rank_opts.validation_dir, "Directory of validation images")->required();
    rank->add_option("--model", rank_opts.model, "Manifest path (or 'toy')")->required();
    rank->add_option("--target-label", rank_opts.target_label, "Target label name or id")->required();
    rank->add_option("--out", rank_out, "Also write the result JSON here");
    rank->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

    auto* render = cli.add_subcommand("render", "Render a genome to PNG and/or SVG");
    RenderOptions render_opts;
    std::string png, svg;
    render->add_option("--genome", render_opts.genome, "Genome JSON")->required();
    render->add_option("--png", png, "PNG output path");
    render->add_option("--svg", svg, "SVG output path");
    render->add_option("--size", render_opts.size, "Output width in pixels / SVG units")->capture_default_str();
    render->add_option("--supersample", render_opts.supersample, "Antialiasing factor")->capture_default_str();

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    if (*draw) {
        RunConfig config;
        try {
            config = load_run_config(config_path);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitUsage;
        }
        if (seed) config.search.seed = *seed;
        if (out_dir) config.output_dir = *out_dir;
        return run_draw(config, workers, std::cerr);
    }
    if (*eval) {
        eval_opts.models = split_list(models_arg);
        eval_opts.ensemble = split_list(ensemble_arg);
        eval_opts.remote_endpoints = split_list(remote_arg);
        if (chart) eval_opts.chart = chart_out;
        if (!eval_out.empty()) eval_opts.out = eval_out;
        eval_opts.workers = workers;
        return run_eval(eval_opts, std::cout, std::cerr);
    }
    if (*rank) {
        if (!rank_out.empty()) rank_opts.out = rank_out;
        rank_opts.workers = workers;
        return run_rank(rank_opts, std::cout, std::cerr);
    }
    if (*render) {
        if (!png.empty()) render_opts.png = png;
        if (!svg.empty()) render_opts.svg = svg;
        return run_render(render_opts, std::cerr);
    }
    return kExitUsage;
}
