#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "pe/objective.hpp"
#include "pe/search.hpp"

namespace pe::app {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,
    kExitBackend = 3,
    kExitRuntime = 4,
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct EmitFlags {
    bool png = true;
    bool svg = true;
    /// Best genome JSON plus the final per-member score report.
    bool report = true;
    bool trace = true;
};

struct MemberSpec {
    /// Manifest path, or "toy" for the built-in analytic classifier.
    std::string model;
    /// Label name or decimal id in that model's label space.
    std::string target_label;
    double weight = 1.0;
};

struct RunConfig {
    SearchConfig search;
    std::vector<MemberSpec> members;
    Aggregation aggregation = Aggregation::Mean;
    int render_size = 512;
    int supersample = 4;
    std::filesystem::path output_dir = "pe_out";
    EmitFlags emit;
};

/// Relative model paths and output_dir resolve against base_dir. A search
/// "budget" key, when present, sets iterations via iterations_for_budget().
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::ordered_json run_config_to_json(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

/// Names of the files run_draw() writes into output_dir.
struct ArtifactNames {
    static constexpr const char* genome = "best_genome.json";
    static constexpr const char* png = "best.png";
    static constexpr const char* svg = "best.svg";
    static constexpr const char* trace = "trace.csv";
    static constexpr const char* report = "report.json";
    static constexpr const char* record = "run_record.json";
};

int run_draw(const RunConfig& config, std::size_t workers, std::ostream& log);

struct EvalOptions {
    std::filesystem::path image;
    std::vector<std::string> models;
    std::vector<std::string> ensemble;
    std::string target_label;
    std::size_t k = 5;
    std::optional<std::filesystem::path> chart;
    std::optional<std::filesystem::path> out;
    std::vector<std::string> remote_endpoints;
    double remote_timeout = 10.0;
    std::size_t workers = 1;
};

int run_eval(const EvalOptions& options, std::ostream& out, std::ostream& err);

struct RankOptions {
    std::filesystem::path image;
    std::filesystem::path validation_dir;
    std::string model;
    std::string target_label;
    std::optional<std::filesystem::path> out;
    std::size_t workers = 1;
};

int run_rank(const RankOptions& options, std::ostream& out, std::ostream& err);

struct RenderOptions {
    std::filesystem::path genome;
    std::optional<std::filesystem::path> png;
    std::optional<std::filesystem::path> svg;
    int size = 1024;
    int supersample = 4;
};

int run_render(const RenderOptions& options, std::ostream& err);

}  // namespace pe::app
