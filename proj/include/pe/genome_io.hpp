#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "pe/render.hpp"

namespace pe {

class GenomeFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kGenomeVersion = 1;

nlohmann::ordered_json drawing_to_json(const Drawing& drawing);

/// Parses the genome schema; structural problems throw GenomeFormatError.
/// Range checks are left to validate().
Drawing drawing_from_json(const nlohmann::json& j);

std::string serialize_genome(const Drawing& drawing);
Drawing parse_genome(const std::string& text);

void write_genome(const std::filesystem::path& path, const Drawing& drawing);
Drawing read_genome(const std::filesystem::path& path);

}  // namespace pe
