// include/ariadne/harness.hpp
// Batch orchestration behind the command-line tool: run configuration,
// seed resolution, and the synth / train-seg / train-agent / detect / report
// commands. Every command writes resolved_config.json next to its outputs.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ariadne/ppo_trainer.hpp"
#include "ariadne/pref_align.hpp"
#include "ariadne/seg_metrics.hpp"
#include "ariadne/synth_angio.hpp"

namespace ariadne::harness {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kSeedEnv = "ARIADNE_SEED";

struct DataConfig {
    int n_cases = 20;            // synth and train-seg
    int held_out = 8;            // last cases of the train-seg set
    int agent_train_cases = 40;  // train-agent
    int benchmark_cases = 200;   // detect

    friend bool operator==(const DataConfig&, const DataConfig&) = default;
};

struct RunConfig {
    SynthConfig synth;
    pref::StageConfig seg;
    ppo::PpoConfig ppo;
    DataConfig data;
    double det_tolerance = kDefaultDetectionTolerance;
    double nsd_tolerance = 2.0;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

void validate(const RunConfig& cfg);
nlohmann::json to_json(const RunConfig& cfg);
// Missing keys keep defaults; unknown keys anywhere throw ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

// --seed, then the config file, then the environment variable, then 0.
std::uint64_t resolve_seed(std::optional<std::uint64_t> cli, std::optional<std::uint64_t> config,
                           const char* env_value);

// 16 hex digits (FNV-1a 64) over the canonical JSON of the config, out_dir
// excluded.
std::string config_hash(const RunConfig& cfg);

// A fully resolved invocation: seed and output directory fixed.
struct Run {
    RunConfig config;
    std::uint64_t seed = 0;
    std::filesystem::path out;
};

Run resolve_run(const std::optional<std::filesystem::path>& config_path, std::optional<std::uint64_t> cli_seed,
                const std::optional<std::filesystem::path>& cli_out);

// Case i is drawn from (seed, stream, i); a seed whose tree does not fit the
// canvas is replaced by the next attempt of the same index.
std::vector<SyntheticCase> generate_cases(const SynthConfig& cfg, std::uint64_t seed, const std::string& stream,
                                          int n);
// Bundles listed by <dir>/manifest.json, in manifest order.
std::vector<SyntheticCase> load_cases(const std::filesystem::path& dir);

// Each returns the document written as its main output.
nlohmann::json cmd_synth(const Run& run, std::optional<int> n_cases = std::nullopt);  // manifest.json
nlohmann::json cmd_train_seg(const Run& run, const std::optional<std::filesystem::path>& cases_dir = std::nullopt);
nlohmann::json cmd_train_agent(const Run& run, const std::optional<std::filesystem::path>& cases_dir = std::nullopt);
// Masks come from the cases' ground truth, or from a segmentation checkpoint
// when one is given. `trace` adds traces.jsonl: every greedy step, tagged with
// its case and candidate.
nlohmann::json cmd_detect(const Run& run, const std::filesystem::path& checkpoint,
                          const std::optional<std::filesystem::path>& cases_dir = std::nullopt,
                          const std::optional<std::filesystem::path>& seg_checkpoint = std::nullopt,
                          bool trace = false);

struct ReportRow {
    std::string metric;
    std::string run_id;
    double value = 0.0;
};

// Rows sorted by (metric, run id). Identical duplicates of a run are merged;
// two files sharing a run id with different contents are a DataError.
std::vector<ReportRow> merge_metrics(const std::vector<std::filesystem::path>& files);
void write_report(const std::vector<ReportRow>& rows, const std::filesystem::path& out);  // report.csv, report.md
std::vector<ReportRow> cmd_report(const std::vector<std::filesystem::path>& files, const std::filesystem::path& out);

}  // namespace ariadne::harness
