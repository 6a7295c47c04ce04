// include/ariadne/synth_angio.hpp
// Procedural angiogram-like cases: a branching tube tree with planted
// stenoses, crossing vessels and noisy contrast, plus mask degradations used
// to build losing samples for preference training.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ariadne/raster.hpp"

namespace ariadne {

struct SynthConfig {
    int width = 256;
    int height = 256;
    int depth = 2;             // branching levels below the trunk
    int branches = 2;          // children per branch
    double radius_min = 1.5;   // px, terminal taper floor
    double radius_max = 5.0;   // px, trunk radius upper bound
    int n_stenoses = 1;
    double severity_min = 0.5;
    double severity_max = 0.75;
    double stenosis_min_radius = 3.0;  // only segments at least this wide get a lesion
    int n_crossings = 1;
    double noise_min = 0.04;   // per-case uniform noise amplitude range
    double noise_max = 0.12;
    double contrast = 0.4;
    double background_gradient = 0.15;

    friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

// Throws ConfigError on out-of-range fields.
void validate(const SynthConfig& cfg);
nlohmann::json to_json(const SynthConfig& cfg);
// Missing keys keep their defaults; unknown keys throw ConfigError.
SynthConfig synth_config_from_json(const nlohmann::json& j);

struct Stenosis {
    Pixel centroid;
    double severity = 0.0;         // 1 - min radius / baseline radius
    double baseline_radius = 0.0;  // px
};

enum class ArtifactKind { Bifurcation, Crossing };

struct Artifact {
    ArtifactKind kind = ArtifactKind::Bifurcation;
    Pixel location;
};

struct SyntheticCase {
    GrayImage image;
    BinaryMask gt_mask;  // one connected component
    std::vector<Stenosis> stenoses;
    std::vector<Artifact> artifacts;
    std::uint64_t seed = 0;
};

// Deterministic per (cfg, seed). Throws ConfigError for invalid fields and
// DataError when the canvas cannot hold the tree or the requested lesions.
SyntheticCase generate_case(const SynthConfig& cfg, std::uint64_t seed);

struct DegradeSpec {
    enum class Mode { None, Fragment, OverDilate, SpuriousBlob };
    Mode mode = Mode::None;
    int gap_px = 2;       // fragment
    int n_cuts = 1;       // fragment
    int dilate_px = 1;    // over_dilate
    int n_blobs = 1;      // spurious_blob
    std::uint64_t seed = 0;

    static DegradeSpec none() { return {}; }
    static DegradeSpec fragment(int gap_px, int n_cuts, std::uint64_t seed);
    static DegradeSpec over_dilate(int px, std::uint64_t seed);
    static DegradeSpec spurious_blob(int n, std::uint64_t seed);
};

// Fragment cuts bands of gap_px across the local centerline, each one
// verified to split a component; blobs are disjoint from the mask and each
// other. Throws DataError for an empty mask or when no valid cut/blob site
// exists, ConfigError for invalid spec fields.
BinaryMask degrade(const BinaryMask& mask, const DegradeSpec& spec);

// Bundle directory: image.pgm, mask.pgm, case.json.
void write_case_bundle(const SyntheticCase& c, const SynthConfig& cfg, const std::filesystem::path& dir);
struct CaseBundle {
    SyntheticCase data;
    SynthConfig config;
};
CaseBundle read_case_bundle(const std::filesystem::path& dir);

std::string to_string(ArtifactKind kind);

}  // namespace ariadne
