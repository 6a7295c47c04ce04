// src/nn/checkpoint.cpp
#include "ariadne/raster.hpp"
#include "ariadne/tiny_nn.hpp"

namespace ariadne::nn {
namespace {

constexpr const char* kFormat = "ariadne-mlp";
constexpr int kVersion = 1;

std::string sizes_text(const std::vector<int>& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
    return out + "]";
}

}  // namespace

nlohmann::json to_json(const MlpParams& p) {
    nlohmann::json layers = nlohmann::json::array();
    for (int l = 0; l < p.layers(); ++l) {
        std::vector<double> w;
        for (int r = 0; r < p.W[l].rows(); ++r)
            for (int c = 0; c < p.W[l].cols(); ++c) w.push_back(p.W[l](r, c));
        std::vector<double> b(p.b[l].data(), p.b[l].data() + p.b[l].size());
        layers.push_back({{"weights", w}, {"bias", b}});
    }
    return {{"format", kFormat}, {"version", kVersion}, {"sizes", p.sizes}, {"seed", p.seed}, {"layers", layers}};
}

MlpParams mlp_from_json(const nlohmann::json& j, const std::vector<int>& expected_sizes) {
    try {
        if (j.at("format").get<std::string>() != kFormat) throw DataError("checkpoint: unknown format");
        if (j.at("version").get<int>() != kVersion)
            throw DataError("checkpoint: unsupported version " + std::to_string(j.at("version").get<int>()));
        const auto sizes = j.at("sizes").get<std::vector<int>>();
        if (!expected_sizes.empty() && sizes != expected_sizes)
            throw ShapeError("checkpoint: network " + sizes_text(sizes) + " does not match expected " +
                             sizes_text(expected_sizes));
        MlpParams p = MlpParams::zeros(sizes);
        p.seed = j.at("seed").get<std::uint64_t>();
        const auto& layers = j.at("layers");
        if (!layers.is_array() || static_cast<int>(layers.size()) != p.layers())
            throw ShapeError("checkpoint: layer count does not match sizes");
        for (int l = 0; l < p.layers(); ++l) {
            const auto w = layers[l].at("weights").get<std::vector<double>>();
            const auto b = layers[l].at("bias").get<std::vector<double>>();
            if (static_cast<Eigen::Index>(w.size()) != p.W[l].size() || static_cast<Eigen::Index>(b.size()) != p.b[l].size())
                throw ShapeError("checkpoint: layer " + std::to_string(l) + " has the wrong number of values");
            std::size_t k = 0;
            for (int r = 0; r < p.W[l].rows(); ++r)
                for (int c = 0; c < p.W[l].cols(); ++c) p.W[l](r, c) = w[k++];
            for (int i = 0; i < p.b[l].size(); ++i) p.b[l](i) = b[i];
        }
        p.validate();
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("checkpoint: ") + e.what());
    }
}

void save_checkpoint(const MlpParams& params, const std::filesystem::path& path) {
    const std::string text = to_json(params).dump() + "\n";
    write_file_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

MlpParams load_checkpoint(const std::filesystem::path& path, const std::vector<int>& expected_sizes) {
    const auto bytes = read_file_bytes(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": invalid JSON", e.byte);
    }
    try {
        return mlp_from_json(j, expected_sizes);
    } catch (const ShapeError& e) {
        throw ShapeError(path.string() + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

}  // namespace ariadne::nn
