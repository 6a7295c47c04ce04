// src/harness/run_config.cpp
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <string_view>

#include "ariadne/harness.hpp"
#include "ariadne/json_fields.hpp"
#include "ariadne/raster.hpp"

namespace ariadne::harness {

void validate(const RunConfig& c) {
    validate(c.synth);
    pref::validate(c.seg);
    ppo::validate(c.ppo);
    const auto& d = c.data;
    if (d.n_cases < 0 || d.agent_train_cases < 0 || d.benchmark_cases < 0)
        throw ConfigError("data: case counts must be >= 0");
    if (d.held_out < 0) throw ConfigError("data.held_out must be >= 0");
    if (!(c.det_tolerance > 0)) throw ConfigError("det_tolerance must be > 0");
    if (!(c.nsd_tolerance >= 0)) throw ConfigError("nsd_tolerance must be >= 0");
    if (c.out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j = {
        {"synth", to_json(c.synth)},
        {"seg", pref::to_json(c.seg)},
        {"ppo", ppo::to_json(c.ppo)},
        {"data",
         {{"n_cases", c.data.n_cases},
          {"held_out", c.data.held_out},
          {"agent_train_cases", c.data.agent_train_cases},
          {"benchmark_cases", c.data.benchmark_cases}}},
        {"det_tolerance", c.det_tolerance},
        {"nsd_tolerance", c.nsd_tolerance},
        {"out_dir", c.out_dir},
    };
    if (c.seed) j["seed"] = *c.seed;
    return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig c;
    std::uint64_t seed = 0;
    FieldReader r(j, "config");
    r.section("synth", [&](const nlohmann::json& v) { c.synth = synth_config_from_json(v); })
        .section("seg", [&](const nlohmann::json& v) { c.seg = pref::stage_config_from_json(v); })
        .section("ppo", [&](const nlohmann::json& v) { c.ppo = ppo::ppo_config_from_json(v); })
        .section("data",
                 [&](const nlohmann::json& v) {
                     FieldReader(v, "data")
                         .read("n_cases", c.data.n_cases)
                         .read("held_out", c.data.held_out)
                         .read("agent_train_cases", c.data.agent_train_cases)
                         .read("benchmark_cases", c.data.benchmark_cases)
                         .finish();
                 })
        .read("det_tolerance", c.det_tolerance)
        .read("nsd_tolerance", c.nsd_tolerance)
        .read("out_dir", c.out_dir)
        .read("seed", seed);
    r.finish();
    if (j.contains("seed")) c.seed = seed;
    validate(c);
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": invalid JSON at byte " + std::to_string(e.byte));
    }
    try {
        return run_config_from_json(j);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> cli, std::optional<std::uint64_t> config,
                           const char* env_value) {
    if (cli) return *cli;
    if (config) return *config;
    if (env_value && *env_value) {
        const std::string_view text(env_value);
        char* end = nullptr;
        errno = 0;
        const auto v = std::strtoull(env_value, &end, 10);
        if (text.front() == '-' || errno != 0 || end != env_value + text.size())
            throw ConfigError(std::string(kSeedEnv) + ": not an unsigned integer: " + env_value);
        return v;
    }
    return 0;
}

std::string config_hash(const RunConfig& cfg) {
    // where outputs go is not part of a run's identity
    auto j = to_json(cfg);
    j.erase("out_dir");
    const std::string text = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Run resolve_run(const std::optional<std::filesystem::path>& config_path, std::optional<std::uint64_t> cli_seed,
                const std::optional<std::filesystem::path>& cli_out) {
    Run run;
    if (config_path) run.config = load_run_config(*config_path);
    run.seed = resolve_seed(cli_seed, run.config.seed, std::getenv(kSeedEnv));
    run.config.seed = run.seed;
    if (cli_out) run.config.out_dir = cli_out->string();
    validate(run.config);
    run.out = run.config.out_dir;
    return run;
}

}  // namespace ariadne::harness
