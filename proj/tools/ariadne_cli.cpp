// tools/ariadne_cli.cpp
// ariadne synth | train-seg | train-agent | detect | report
// Exit codes: 0 ok, 2 config error, 3 data error, 4 numeric failure.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ariadne/harness.hpp"

namespace {

using namespace ariadne;

struct Common {
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    CLI::Option* config_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* out_opt = nullptr;

    void attach(CLI::App* sub) {
        config_opt = sub->add_option("--config", config, "run configuration (JSON)")->check(CLI::ExistingFile);
        seed_opt = sub->add_option("--seed", seed, "root seed (overrides the config and $ARIADNE_SEED)");
        out_opt = sub->add_option("--out", out, "output directory");
    }

    harness::Run resolve() const {
        return harness::resolve_run(config_opt->count() ? std::optional<std::filesystem::path>(config) : std::nullopt,
                                    seed_opt->count() ? std::optional<std::uint64_t>(seed) : std::nullopt,
                                    out_opt->count() ? std::optional<std::filesystem::path>(out) : std::nullopt);
    }
};

std::optional<std::filesystem::path> optional_path(const CLI::Option* opt, const std::string& value) {
    if (opt->count()) return std::filesystem::path(value);
    return std::nullopt;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Synthetic angiography segmentation and stenosis detection pipeline"};
    app.set_version_flag("--version", harness::kVersion);
    app.require_subcommand(1);

    Common synth_c, seg_c, agent_c, detect_c;

    auto* synth = app.add_subcommand("synth", "generate synthetic case bundles");
    synth_c.attach(synth);
    int n_cases = 0;
    auto* n_opt = synth->add_option("--n", n_cases, "number of cases (default: data.n_cases)")->check(CLI::NonNegativeNumber);

    auto* seg = app.add_subcommand("train-seg", "three-stage segmentation training");
    seg_c.attach(seg);
    std::string seg_cases;
    auto* seg_cases_opt = seg->add_option("--cases", seg_cases, "case directory written by synth")->check(CLI::ExistingDirectory);

    auto* agent = app.add_subcommand("train-agent", "PPO training of the stenosis agent");
    agent_c.attach(agent);
    std::string agent_cases;
    auto* agent_cases_opt =
        agent->add_option("--cases", agent_cases, "case directory written by synth")->check(CLI::ExistingDirectory);

    auto* detect = app.add_subcommand("detect", "run the agent over a case set");
    detect_c.attach(detect);
    std::string checkpoint, detect_cases, seg_checkpoint;
    detect->add_option("--checkpoint", checkpoint, "agent policy checkpoint")->required()->check(CLI::ExistingFile);
    auto* detect_cases_opt =
        detect->add_option("--cases", detect_cases, "case directory written by synth")->check(CLI::ExistingDirectory);
    auto* seg_opt = detect->add_option("--seg-checkpoint", seg_checkpoint, "segment images instead of using GT masks")
                        ->check(CLI::ExistingFile);
    bool trace = false;
    detect->add_flag("--trace", trace, "also write per-step episode traces (traces.jsonl)");

    auto* report = app.add_subcommand("report", "merge metrics files into CSV and markdown tables");
    std::string report_config, report_out = "report";
    std::uint64_t report_seed = 0;
    report->add_option("--config", report_config, "accepted for symmetry; unused");
    report->add_option("--seed", report_seed, "accepted for symmetry; unused");
    report->add_option("--out", report_out, "output directory");
    std::vector<std::string> metric_files;
    report->add_option("files", metric_files, "metrics.json files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    if (*synth) {
        const auto run = synth_c.resolve();
        const auto m = harness::cmd_synth(run, n_opt->count() ? std::optional<int>(n_cases) : std::nullopt);
        std::cout << "wrote " << m["n_cases"] << " cases to " << run.out.string() << "\n";
    } else if (*seg) {
        const auto run = seg_c.resolve();
        const auto r = harness::cmd_train_seg(run, optional_path(seg_cases_opt, seg_cases));
        for (const auto& s : r["stages"])
            std::cout << s["stage"].get<std::string>() << ": dice " << s["dice"] << " cldice " << s["cldice"] << "\n";
    } else if (*agent) {
        const auto run = agent_c.resolve();
        const auto m = harness::cmd_train_agent(run, optional_path(agent_cases_opt, agent_cases));
        std::cout << "trained " << m["steps"] << " steps over " << m["iterations"] << " iterations\n";
    } else if (*detect) {
        const auto run = detect_c.resolve();
        const auto m = harness::cmd_detect(run, checkpoint, optional_path(detect_cases_opt, detect_cases),
                                           optional_path(seg_opt, seg_checkpoint), trace);
        std::cout << "agent FPPI " << m["agent.fppi"] << " TPR " << m["agent.tpr"] << " | baseline FPPI "
                  << m["baseline.fppi"] << " TPR " << m["baseline.tpr"] << "\n";
    } else if (*report) {
        std::vector<std::filesystem::path> files(metric_files.begin(), metric_files.end());
        const auto rows = harness::cmd_report(files, report_out);
        std::cout << rows.size() << " rows written to " << report_out << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const ariadne::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ariadne::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const ariadne::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
