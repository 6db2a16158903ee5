#include "pe/app.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "pe/chart.hpp"
#include "pe/eval.hpp"
#include "pe/genome_io.hpp"
#include "pe/image_io.hpp"
#include "pe/remote.hpp"

namespace pe::app {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

bool is_builtin(const std::string& model) { return model == "toy" || model.rfind("toy:", 0) == 0; }

}  // namespace

RunConfig run_config_from_json(const json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    RunConfig c;
    try {
        if (j.contains("search")) {
            const auto& s = j.at("search");
            c.search = search_config_from_json(s);
            if (s.contains("budget")) {
                if (s.contains("iterations")) throw ConfigError("search: give either 'budget' or 'iterations'");
                c.search.iterations =
                    iterations_for_budget(s.at("budget").get<std::size_t>(), c.search.candidates_per_iter);
            }
        }
        if (!j.contains("objective")) throw ConfigError("run config needs an 'objective' section");
        const auto& o = j.at("objective");
        if (!o.contains("members") || !o.at("members").is_array() || o.at("members").empty())
            throw ConfigError("objective.members must be a nonempty array");
        for (const auto& m : o.at("members")) {
            MemberSpec spec;
            spec.model = m.at("model").get<std::string>();
            const auto& target = m.at("target_label");
            spec.target_label = target.is_number_integer() ? std::to_string(target.get<long long>())
                                                           : target.get<std::string>();
            if (m.contains("weight")) spec.weight = m.at("weight").get<double>();
            if (!is_builtin(spec.model) && fs::path(spec.model).is_relative() && !base_dir.empty())
                spec.model = (base_dir / spec.model).string();
            c.members.push_back(std::move(spec));
        }
        if (o.contains("aggregation")) c.aggregation = aggregation_from_name(o.at("aggregation").get<std::string>());
        if (o.contains("render_size")) c.render_size = o.at("render_size").get<int>();
        if (o.contains("supersample")) c.supersample = o.at("supersample").get<int>();
        if (j.contains("output_dir")) {
            c.output_dir = j.at("output_dir").get<std::string>();
            if (c.output_dir.is_relative() && !base_dir.empty()) c.output_dir = base_dir / c.output_dir;
        }
        if (j.contains("emit")) {
            const auto& e = j.at("emit");
            c.emit.png = e.value("png", c.emit.png);
            c.emit.svg = e.value("svg", c.emit.svg);
            c.emit.report = e.value("report", c.emit.report);
            c.emit.trace = e.value("trace", c.emit.trace);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("run config: ") + e.what());
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    std::string problems;
    for (const auto& p : check_config(c.search)) problems += " " + p + ";";
    if (c.render_size < 1) problems += " render_size must be >= 1;";
    if (c.supersample < 1) problems += " supersample must be >= 1;";
    bool any_positive = false;
    for (const auto& m : c.members) {
        if (!(m.weight >= 0.0)) problems += " member weights must be nonnegative;";
        any_positive = any_positive || m.weight > 0.0;
        if (!is_builtin(m.model) && !fs::exists(m.model)) problems += " manifest " + m.model + " does not exist;";
    }
    if (!any_positive) problems += " at least one member needs a positive weight;";
    if (!problems.empty()) throw ConfigError("invalid run config:" + problems);
    return c;
}

ordered_json run_config_to_json(const RunConfig& c) {
    ordered_json j;
    j["search"] = search_config_to_json(c.search);
    ordered_json members = ordered_json::array();
    for (const auto& m : c.members)
        members.push_back({{"model", m.model}, {"target_label", m.target_label}, {"weight", m.weight}});
    j["objective"] = {{"members", std::move(members)},
                      {"aggregation", aggregation_name(c.aggregation)},
                      {"render_size", c.render_size},
                      {"supersample", c.supersample}};
    j["output_dir"] = c.output_dir.string();
    j["emit"] = {{"png", c.emit.png}, {"svg", c.emit.svg}, {"report", c.emit.report}, {"trace", c.emit.trace}};
    return j;
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open run config " + path.string());
    const json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("run config " + path.string() + " is not valid JSON");
    return run_config_from_json(j, path.parent_path());
}

namespace {

ordered_json member_scores_json(const EnsembleScore& s) {
    ordered_json arr = ordered_json::array();
    for (const auto& m : s.per_member)
        arr.push_back({{"name", m.name},
                       {"target_label", m.target_label},
                       {"target_label_id", m.target_label_id},
                       {"probability", m.probability}});
    return arr;
}

int fail_draw(const RunConfig& config, int code, const std::string& message, std::ostream& log,
              const std::string& genome_json = {}) {
    log << "error: " << message << "\n";
    ordered_json record;
    record["tool_version"] = kToolVersion;
    record["status"] = "error";
    record["exit_code"] = code;
    record["error"] = message;
    if (!genome_json.empty()) record["failing_genome"] = json::parse(genome_json);
    record["config"] = run_config_to_json(config);
    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (!ec) {
        try {
            write_text(config.output_dir / ArtifactNames::record, dump(record));
        } catch (const std::exception&) {
        }
    }
    return code;
}

}  // namespace

int run_draw(const RunConfig& config, std::size_t workers, std::ostream& log) {
    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) {
        log << "error: cannot create output directory " << config.output_dir << ": " << ec.message() << "\n";
        return kExitUsage;
    }
    workers = std::max<std::size_t>(workers, 1);

    ObjectiveConfig objective;
    objective.aggregation = config.aggregation;
    objective.render_size = config.render_size;
    objective.supersample = config.supersample;
    for (const auto& m : config.members) {
        std::shared_ptr<const Classifier> backend;
        try {
            backend = load_classifier(m.model, workers);
        } catch (const std::exception& e) {
            return fail_draw(config, kExitBackend, std::string("backend load failed: ") + e.what(), log);
        }
        std::size_t target = 0;
        try {
            target = resolve_label(backend->labels(), m.target_label);
        } catch (const LabelError& e) {
            return fail_draw(config, kExitUsage, backend->name() + ": " + e.what(), log);
        }
        objective.members.push_back({backend, target, m.weight});
    }

    SearchResult result;
    EnsembleScore final_score;
    try {
        const auto fn = make_objective(objective);
        SearchOptions options;
        options.workers = workers;
        const std::size_t every = std::max<std::size_t>(config.search.iterations / 10, 1);
        options.on_iteration = [&](std::size_t t, double best) {
            if (t % every == 0 || t == config.search.iterations)
                log << "iteration " << t << "/" << config.search.iterations << " best " << best << "\n";
        };
        result = hill_climb(fn, config.search, options);
        final_score = score(result.best_genome, objective);
    } catch (const SearchError& e) {
        return fail_draw(config, kExitRuntime, e.what(), log, e.genome_json());
    } catch (const std::exception& e) {
        return fail_draw(config, kExitRuntime, e.what(), log);
    }

    ordered_json artifacts = ordered_json::array();
    try {
        if (config.emit.report) {
            write_genome(config.output_dir / ArtifactNames::genome, result.best_genome);
            ordered_json report;
            report["aggregate"] = final_score.aggregate;
            report["aggregation"] = aggregation_name(config.aggregation);
            report["per_member"] = member_scores_json(final_score);
            write_text(config.output_dir / ArtifactNames::report, dump(report));
            artifacts.push_back(ArtifactNames::genome);
            artifacts.push_back(ArtifactNames::report);
        }
        if (config.emit.png) {
            const auto& g = result.best_genome;
            save_png(config.output_dir / ArtifactNames::png,
                     rasterize(g, config.render_size, render_height(config.render_size, g.aspect), config.supersample));
            artifacts.push_back(ArtifactNames::png);
        }
        if (config.emit.svg) {
            write_text(config.output_dir / ArtifactNames::svg, to_svg(result.best_genome, config.render_size));
            artifacts.push_back(ArtifactNames::svg);
        }
        if (config.emit.trace) {
            write_text(config.output_dir / ArtifactNames::trace, trace_csv(result.trace));
            artifacts.push_back(ArtifactNames::trace);
        }

        ordered_json record;
        record["tool_version"] = kToolVersion;
        record["status"] = "ok";
        record["seed"] = config.search.seed;
        record["config"] = run_config_to_json(config);
        record["evaluations"] = result.evaluations;
        record["restarts"] = result.restarts;
        record["best_score"] = result.best_score;
        record["per_member"] = member_scores_json(final_score);
        record["best_genome"] = drawing_to_json(result.best_genome);
        record["artifacts"] = std::move(artifacts);
        write_text(config.output_dir / ArtifactNames::record, dump(record));
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    log << "best score " << result.best_score << " after " << result.evaluations << " evaluations\n";
    return kExitOk;
}

namespace {

std::string model_display_name(const std::string& ref) {
    if (is_builtin(ref)) return ref == "toy" ? "toy" : ref.substr(4);
    return fs::path(ref).stem().string();
}

bool listed(const std::vector<std::string>& names, const std::string& ref, const std::string& name) {
    for (const auto& n : names)
        if (n == ref || n == name || n == model_display_name(ref)) return true;
    return false;
}

}  // namespace

int run_eval(const EvalOptions& o, std::ostream& out, std::ostream& err) {
    RasterImage image;
    try {
        image = load_image(o.image);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    if (o.models.empty() && o.remote_endpoints.empty()) {
        err << "error: no models given\n";
        return kExitUsage;
    }
    if (o.k < 1) {
        err << "error: --k must be >= 1\n";
        return kExitUsage;
    }

    ordered_json report_json;
    std::size_t failures = 0;
    if (!o.models.empty()) {
        std::vector<TransferModel> models;
        for (const auto& ref : o.models) {
            TransferModel m;
            m.name = model_display_name(ref);
            m.target_label = o.target_label;
            try {
                m.backend = load_classifier(ref, o.workers);
                m.name = m.backend->name();
            } catch (const std::exception& e) {
                m.load_error = e.what();
                err << "warning: " << ref << ": " << e.what() << "\n";
            }
            m.ensemble = listed(o.ensemble, ref, m.name);
            models.push_back(std::move(m));
        }
        auto report = transfer_matrix(image, models, o.k, o.workers);
        report.image = o.image.string();
        failures = report.summary.failed_models;
        for (const auto& row : report.models)
            if (!row.error.empty()) err << "warning: " << row.name << ": " << row.error << "\n";
        report_json = to_json(report);
        if (o.chart) {
            try {
                write_transfer_chart(*o.chart, report);
            } catch (const std::exception& e) {
                err << "error: chart: " << e.what() << "\n";
                return kExitRuntime;
            }
        }
    } else {
        report_json["image"] = o.image.string();
        report_json["models"] = ordered_json::array();
    }

    if (!o.remote_endpoints.empty()) {
        ordered_json remote = ordered_json::array();
        for (const auto& endpoint : o.remote_endpoints) {
            ordered_json r;
            r["endpoint"] = endpoint;
            try {
                const auto result = classify_remote(endpoint, image, o.remote_timeout);
                ordered_json labels = ordered_json::array();
                for (const auto& l : result.labels) labels.push_back({{"name", l.name}, {"score", l.score}});
                r["labels"] = std::move(labels);
                r["probabilistic"] = result.probabilistic;
            } catch (const RemoteError& e) {
                r["error"] = e.what();
                r["retryable"] = e.retryable();
                ++failures;
                err << "warning: " << endpoint << ": " << e.what() << "\n";
            }
            remote.push_back(std::move(r));
        }
        report_json["remote"] = std::move(remote);
    }

    const auto text = dump(report_json);
    out << text;
    if (o.out) {
        try {
            write_text(*o.out, text);
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return kExitRuntime;
        }
    }
    const std::size_t total = o.models.size() + o.remote_endpoints.size();
    return failures == total ? kExitBackend : kExitOk;
}

int run_rank(const RankOptions& o, std::ostream& out, std::ostream& err) {
    RasterImage image;
    try {
        image = load_image(o.image);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    std::vector<fs::path> files;
    if (fs::is_directory(o.validation_dir)) files = list_images(o.validation_dir);
    if (files.empty()) {
        err << "error: validation directory " << o.validation_dir << " contains no images\n";
        return kExitUsage;
    }

    std::shared_ptr<const Classifier> model;
    try {
        model = load_classifier(o.model, o.workers);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitBackend;
    }
    std::size_t target = 0;
    try {
        target = resolve_label(model->labels(), o.target_label);
    } catch (const LabelError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    AmplificationResult result;
    try {
        result = amplification_rank_files(image, files, *model, target, o.workers);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    for (const auto& s : result.skipped) err << "warning: skipped " << s.path << ": " << s.reason << "\n";

    auto j = to_json(result);
    j["image"] = o.image.string();
    j["model"] = model->name();
    j["target_label"] = model->labels()[target];
    const auto text = dump(j);
    out << text;
    if (o.out) {
        try {
            write_text(*o.out, text);
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return kExitRuntime;
        }
    }
    return kExitOk;
}

int run_render(const RenderOptions& o, std::ostream& err) {
    if (!o.png && !o.svg) {
        err << "error: nothing to render (give --png and/or --svg)\n";
        return kExitUsage;
    }
    if (o.size < 1 || o.supersample < 1) {
        err << "error: --size and --supersample must be >= 1\n";
        return kExitUsage;
    }
    Drawing genome;
    try {
        genome = read_genome(o.genome);
        require_valid(genome);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    try {
        if (o.png) save_png(*o.png, rasterize(genome, o.size, render_height(o.size, genome.aspect), o.supersample));
        if (o.svg) write_text(*o.svg, to_svg(genome, o.size));
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace pe::app
