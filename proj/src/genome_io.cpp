#include "pe/genome_io.hpp"

#include <fstream>
#include <sstream>

namespace pe {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json drawing_to_json(const Drawing& drawing) {
    ordered_json j;
    j["version"] = kGenomeVersion;
    ordered_json palette = ordered_json::array();
    for (const auto& c : drawing.palette) palette.push_back({c.r, c.g, c.b});
    j["palette"] = std::move(palette);
    j["background_index"] = drawing.background_index;
    j["aspect"] = drawing.aspect;
    ordered_json strokes = ordered_json::array();
    for (const auto& s : drawing.strokes) {
        ordered_json pts = ordered_json::array();
        for (const auto& p : s.points) pts.push_back({p.x, p.y});
        ordered_json js;
        js["points"] = std::move(pts);
        js["thickness"] = s.thickness;
        js["color_index"] = s.color_index;
        strokes.push_back(std::move(js));
    }
    j["strokes"] = std::move(strokes);
    return j;
}

namespace {

double number_at(const json& arr, std::size_t i, const char* what) {
    if (!arr.is_array() || arr.size() <= i || !arr[i].is_number())
        throw GenomeFormatError(std::string("expected numeric array for ") + what);
    return arr[i].get<double>();
}

std::size_t index_field(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<long long>() < 0)
        throw GenomeFormatError(std::string("field '") + key + "' must be a nonnegative integer");
    return j[key].get<std::size_t>();
}

}  // namespace

Drawing drawing_from_json(const json& j) {
    if (!j.is_object()) throw GenomeFormatError("genome must be a JSON object");
    if (!j.contains("version") || j["version"] != kGenomeVersion)
        throw GenomeFormatError("unsupported genome version");
    if (!j.contains("palette") || !j["palette"].is_array())
        throw GenomeFormatError("field 'palette' must be an array");
    if (!j.contains("strokes") || !j["strokes"].is_array())
        throw GenomeFormatError("field 'strokes' must be an array");

    Drawing d;
    for (const auto& c : j["palette"]) {
        if (!c.is_array() || c.size() != 3) throw GenomeFormatError("palette entries must be [r,g,b]");
        d.palette.push_back({number_at(c, 0, "palette"), number_at(c, 1, "palette"), number_at(c, 2, "palette")});
    }
    d.background_index = index_field(j, "background_index");
    if (j.contains("aspect")) {
        if (!j["aspect"].is_number()) throw GenomeFormatError("field 'aspect' must be a number");
        d.aspect = j["aspect"].get<double>();
    }
    for (const auto& js : j["strokes"]) {
        if (!js.is_object() || !js.contains("points") || !js["points"].is_array())
            throw GenomeFormatError("stroke must have a 'points' array");
        Stroke s;
        for (const auto& p : js["points"]) {
            if (!p.is_array() || p.size() != 2) throw GenomeFormatError("points must be [x,y]");
            s.points.push_back({number_at(p, 0, "point"), number_at(p, 1, "point")});
        }
        if (!js.contains("thickness") || !js["thickness"].is_number())
            throw GenomeFormatError("stroke 'thickness' must be a number");
        s.thickness = js["thickness"].get<double>();
        s.color_index = index_field(js, "color_index");
        d.strokes.push_back(std::move(s));
    }
    return d;
}

std::string serialize_genome(const Drawing& drawing) { return drawing_to_json(drawing).dump(2) + "\n"; }

Drawing parse_genome(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw GenomeFormatError("genome is not valid JSON");
    return drawing_from_json(j);
}

void write_genome(const std::filesystem::path& path, const Drawing& drawing) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << serialize_genome(drawing);
}

Drawing read_genome(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_genome(ss.str());
}

}  // namespace pe
