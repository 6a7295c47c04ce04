// src/synth/bundle.cpp
#include <fstream>
#include <sstream>

#include "ariadne/synth_angio.hpp"

namespace ariadne {

void write_case_bundle(const SyntheticCase& c, const SynthConfig& cfg, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError(dir.string() + ": cannot create directory: " + ec.message());
    store_image(c.image, dir / "image.pgm");
    store_mask(c.gt_mask, dir / "mask.pgm");

    nlohmann::json stenoses = nlohmann::json::array();
    for (const auto& s : c.stenoses)
        stenoses.push_back({{"x", s.centroid.x}, {"y", s.centroid.y}, {"severity", s.severity}, {"baseline_radius", s.baseline_radius}});
    nlohmann::json artifacts = nlohmann::json::array();
    for (const auto& a : c.artifacts) artifacts.push_back({{"kind", to_string(a.kind)}, {"x", a.location.x}, {"y", a.location.y}});
    const nlohmann::json doc = {{"seed", c.seed}, {"width", c.gt_mask.width()}, {"height", c.gt_mask.height()},
                                {"stenoses", stenoses}, {"artifacts", artifacts}, {"config", to_json(cfg)}};
    const std::string text = doc.dump(2) + "\n";
    write_file_bytes(dir / "case.json", {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

CaseBundle read_case_bundle(const std::filesystem::path& dir) {
    CaseBundle b;
    b.data.image = load_image(dir / "image.pgm");
    b.data.gt_mask = load_mask(dir / "mask.pgm");
    require_same_shape(b.data.image, b.data.gt_mask, (dir / "mask.pgm").string());

    const auto bytes = read_file_bytes(dir / "case.json");
    const auto where = (dir / "case.json").string();
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(bytes.begin(), bytes.end());
        b.data.seed = doc.at("seed").get<std::uint64_t>();
        for (const auto& s : doc.at("stenoses"))
            b.data.stenoses.push_back({{s.at("x").get<int>(), s.at("y").get<int>()}, s.at("severity").get<double>(),
                                       s.at("baseline_radius").get<double>()});
        for (const auto& a : doc.at("artifacts")) {
            const auto kind = a.at("kind").get<std::string>();
            if (kind != "crossing" && kind != "bifurcation") throw DataError(where + ": unknown artifact kind " + kind);
            b.data.artifacts.push_back({kind == "crossing" ? ArtifactKind::Crossing : ArtifactKind::Bifurcation,
                                        {a.at("x").get<int>(), a.at("y").get<int>()}});
        }
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(where + ": invalid JSON", e.byte);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(where + ": " + e.what());
    }
    try {
        b.config = synth_config_from_json(doc.at("config"));
    } catch (const ConfigError& e) {
        throw DataError(where + ": " + e.what());
    }
    for (const auto& s : b.data.stenoses)
        if (!b.data.gt_mask.in_bounds(s.centroid.x, s.centroid.y)) throw DataError(where + ": stenosis outside the image");
    return b;
}

}  // namespace ariadne
