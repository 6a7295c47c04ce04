// src/harness/commands.cpp
#include <cstdio>
#include <exception>
#include <sstream>

#include "ariadne/harness.hpp"
#include "ariadne/parallel.hpp"
#include "ariadne/raster.hpp"
#include "ariadne/topology.hpp"

namespace ariadne::harness {
namespace {

constexpr int kMaxAttempts = 100;

void write_text(const std::filesystem::path& path, const std::string& text) {
    write_file_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

void prepare_out(const Run& run) {
    std::error_code ec;
    std::filesystem::create_directories(run.out, ec);
    if (ec) throw DataError(run.out.string() + ": cannot create directory: " + ec.message());
    write_json(run.out / "resolved_config.json", to_json(run.config));
}

nlohmann::json meta(const Run& run, const std::string& command) {
    const auto hash = config_hash(run.config);
    return {{"run_id", command + "-" + std::to_string(run.seed) + "-" + hash.substr(0, 8)},
            {"command", command},
            {"seed", run.seed},
            {"config_hash", hash},
            {"version", kVersion}};
}

void write_metrics(const Run& run, const std::string& command, nlohmann::json flat) {
    flat["meta"] = meta(run, command);
    write_json(run.out / "metrics.json", flat);
}

std::string case_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "case_%04zu", i);
    return buf;
}

// Runs f(i) in parallel and rethrows the lowest-index failure afterwards;
// exceptions must not escape an OpenMP region.
template <class F>
void run_tasks(std::size_t n, F&& f) {
    std::vector<std::exception_ptr> errors(n);
    parallel::for_each_task(static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t i) {
        try {
            f(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    });
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::vector<SyntheticCase> cases_for(const Run& run, const std::optional<std::filesystem::path>& dir,
                                     const std::string& stream, int n) {
    if (dir) return load_cases(*dir);
    return generate_cases(run.config.synth, run.seed, stream, n);
}

nlohmann::json point_json(Point2 p) { return {{"x", p.x}, {"y", p.y}}; }

nlohmann::json detection_json(const DetectionMetrics& m) {
    return {{"tpr", m.tpr},
            {"ppv", m.ppv},
            {"f1", m.f1},
            {"fppi", m.fppi},
            {"tp", m.outcome.tp_det},
            {"fp", m.outcome.fp_det},
            {"fn", m.outcome.fn_det}};
}

struct SegEval {
    double dice = 0.0, cldice = 0.0, nsd = 0.0, beta0 = 0.0, fragmented = 0.0;
};

SegEval evaluate_seg(const pref::PixelPolicy& policy, const std::vector<pref::SegSample>& samples, double nsd_tol) {
    std::vector<SegEval> per(samples.size());
    run_tasks(samples.size(), [&](std::size_t i) {
        const auto pred = pref::predict_mask(policy, samples[i].image);
        auto& e = per[i];
        e.dice = dice(pred, samples[i].mask);
        e.cldice = cl_dice(pred, samples[i].mask);
        e.nsd = nsd(pred, samples[i].mask, nsd_tol);
        e.beta0 = betti0(pred);
        e.fragmented = e.beta0 > 1 ? 1.0 : 0.0;
    });
    SegEval m;
    for (const auto& e : per) {
        m.dice += e.dice;
        m.cldice += e.cldice;
        m.nsd += e.nsd;
        m.beta0 += e.beta0;
        m.fragmented += e.fragmented;
    }
    if (!per.empty()) {
        const double k = 1.0 / static_cast<double>(per.size());
        m.dice *= k;
        m.cldice *= k;
        m.nsd *= k;
        m.beta0 *= k;
        m.fragmented *= k;
    }
    return m;
}

}  // namespace

std::vector<SyntheticCase> generate_cases(const SynthConfig& cfg, std::uint64_t seed, const std::string& stream,
                                          int n) {
    validate(cfg);
    if (n < 0) throw ConfigError("case count must be >= 0");
    std::vector<SyntheticCase> out(static_cast<std::size_t>(n));
    run_tasks(out.size(), [&](std::size_t i) {
        const auto base = derive_seed(seed, stream, i);
        for (int a = 0; a < kMaxAttempts; ++a) {
            try {
                out[i] = generate_case(cfg, a == 0 ? base : derive_seed(base, "attempt", static_cast<std::uint64_t>(a)));
                return;
            } catch (const DataError&) {
            }
        }
        throw DataError("synth: case " + std::to_string(i) + " does not fit the canvas after " +
                        std::to_string(kMaxAttempts) + " attempts");
    });
    return out;
}

std::vector<SyntheticCase> load_cases(const std::filesystem::path& dir) {
    const auto path = dir / "manifest.json";
    const auto bytes = read_file_bytes(path);
    std::vector<std::filesystem::path> dirs;
    try {
        const auto j = nlohmann::json::parse(bytes.begin(), bytes.end());
        for (const auto& c : j.at("cases")) dirs.push_back(dir / c.at("dir").get<std::string>());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": invalid JSON", e.byte);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    std::vector<SyntheticCase> out(dirs.size());
    run_tasks(dirs.size(), [&](std::size_t i) { out[i] = read_case_bundle(dirs[i]).data; });
    return out;
}

nlohmann::json cmd_synth(const Run& run, std::optional<int> n_cases) {
    const int n = n_cases.value_or(run.config.data.n_cases);
    const auto cases = generate_cases(run.config.synth, run.seed, "synth", n);
    prepare_out(run);
    nlohmann::json list = nlohmann::json::array();
    run_tasks(cases.size(), [&](std::size_t i) {
        write_case_bundle(cases[i], run.config.synth, run.out / "cases" / case_name(i));
    });
    for (std::size_t i = 0; i < cases.size(); ++i)
        list.push_back({{"id", case_name(i)},
                        {"dir", "cases/" + case_name(i)},
                        {"seed", cases[i].seed},
                        {"stenoses", cases[i].stenoses.size()}});
    nlohmann::json manifest = {{"meta", meta(run, "synth")}, {"n_cases", n}, {"cases", list}};
    write_json(run.out / "manifest.json", manifest);
    return manifest;
}

nlohmann::json cmd_train_seg(const Run& run, const std::optional<std::filesystem::path>& cases_dir) {
    const auto& cfg = run.config;
    const auto cases = cases_for(run, cases_dir, "synth", cfg.data.n_cases);
    const auto held = static_cast<std::size_t>(cfg.data.held_out);
    if (cases.size() <= held || held == 0)
        throw DataError("train-seg: need at least one training and one held-out case (have " +
                        std::to_string(cases.size()) + " cases, held_out " + std::to_string(held) + ")");
    std::vector<pref::SegSample> train, test;
    for (std::size_t i = 0; i < cases.size(); ++i)
        (i + held < cases.size() ? train : test).push_back({cases[i].image, cases[i].gt_mask});
    prepare_out(run);

    const auto& seg = cfg.seg;
    auto policy = pref::PixelPolicy::create(seg.patch_radius, seg.hidden, derive_seed(run.seed, "train.init"));
    pref::TrainLog log1, log2;
    const auto s1 = pref::stage1_train(policy, train, seg.stage1, derive_seed(run.seed, "train.stage1"), &log1);
    const auto pairs = pref::mine_pairs(s1, train, seg.mining, derive_seed(run.seed, "train.mine"));
    const auto s2 = pref::stage2_train(s1, train, pairs, seg.stage2, &log2);
    const auto s3 = pref::stage3_hsft(s2, train, seg.stage3, derive_seed(run.seed, "train.stage3"));

    pref::save_policy(s1, run.out / "stage1.json");
    pref::save_policy(s2, run.out / "stage2.json");
    pref::save_policy(s3.policy, run.out / "stage3.json");

    int mined = 0;
    for (const auto& p : pairs) mined += p.source == pref::PairSource::Mined ? 1 : 0;
    nlohmann::json stages = nlohmann::json::array();
    nlohmann::json flat;
    const std::pair<const char*, const pref::PixelPolicy*> named[] = {
        {"stage1", &s1}, {"stage2", &s2}, {"stage3", &s3.policy}};
    for (const auto& [name, pol] : named) {
        const auto e = evaluate_seg(*pol, test, cfg.nsd_tolerance);
        stages.push_back({{"stage", name},
                          {"dice", e.dice},
                          {"cldice", e.cldice},
                          {"nsd", e.nsd},
                          {"beta0_mean", e.beta0},
                          {"fragmented_fraction", e.fragmented}});
        const std::string p = name;
        flat[p + ".dice"] = e.dice;
        flat[p + ".cldice"] = e.cldice;
        flat[p + ".nsd"] = e.nsd;
        flat[p + ".beta0_mean"] = e.beta0;
    }
    flat["pairs.total"] = pairs.size();
    flat["pairs.mined"] = mined;
    flat["hard_fraction"] = s3.hard_fraction;

    std::vector<std::string> notices = log1.notices;
    notices.insert(notices.end(), log2.notices.begin(), log2.notices.end());
    notices.insert(notices.end(), s3.log.notices.begin(), s3.log.notices.end());
    nlohmann::json report = {
        {"meta", meta(run, "train-seg")},
        {"train_cases", train.size()},
        {"held_out_cases", test.size()},
        {"stages", stages},
        {"pairs", {{"total", pairs.size()}, {"mined", mined}, {"synthetic", static_cast<int>(pairs.size()) - mined}}},
        {"hard_cases", s3.hard_cases},
        {"hard_fraction", s3.hard_fraction},
        {"notices", notices},
    };
    write_json(run.out / "seg_report.json", report);
    write_metrics(run, "train-seg", flat);
    return report;
}

nlohmann::json cmd_train_agent(const Run& run, const std::optional<std::filesystem::path>& cases_dir) {
    const auto& cfg = run.config;
    const auto cases = cases_for(run, cases_dir, "agent.train", cfg.data.agent_train_cases);
    std::vector<ppo::AgentCase> agent_cases;
    for (const auto& c : cases) agent_cases.push_back(ppo::agent_case(c));
    prepare_out(run);

    const auto res = ppo::train_agent(agent_cases, cfg.ppo, derive_seed(run.seed, "train.agent"));
    nn::save_checkpoint(res.nets.policy, run.out / "policy.json");
    nn::save_checkpoint(res.nets.value, run.out / "value.json");
    std::ostringstream csv;
    ppo::write_curve_csv(res.curve, csv);
    write_text(run.out / "curve.csv", csv.str());

    nlohmann::json flat = {{"iterations", res.curve.size()}, {"steps", res.curve.empty() ? 0L : res.curve.back().steps}};
    if (!res.curve.empty()) {
        const std::size_t k = std::max<std::size_t>(1, res.curve.size() / 10);
        double first = 0.0, last = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            first += res.curve[i].mean_reward;
            last += res.curve[res.curve.size() - 1 - i].mean_reward;
        }
        flat["reward.first_decile"] = first / static_cast<double>(k);
        flat["reward.last_decile"] = last / static_cast<double>(k);
        flat["final.entropy"] = res.curve.back().update.entropy;
        flat["final.clip_fraction"] = res.curve.back().update.clip_fraction;
    }
    write_metrics(run, "train-agent", flat);
    flat["meta"] = meta(run, "train-agent");
    return flat;
}

nlohmann::json cmd_detect(const Run& run, const std::filesystem::path& checkpoint,
                          const std::optional<std::filesystem::path>& cases_dir,
                          const std::optional<std::filesystem::path>& seg_checkpoint, bool trace) {
    const auto& cfg = run.config;
    const auto policy = nn::load_checkpoint(checkpoint);
    if (policy.input_size() != env::state_size(cfg.ppo.window) || policy.output_size() != env::kNumActions)
        throw ShapeError(checkpoint.string() + ": policy maps " + std::to_string(policy.input_size()) + " -> " +
                         std::to_string(policy.output_size()) + ", expected " +
                         std::to_string(env::state_size(cfg.ppo.window)) + " -> 4");
    std::optional<pref::PixelPolicy> seg;
    if (seg_checkpoint) seg = pref::load_policy(*seg_checkpoint);
    const auto cases = cases_for(run, cases_dir, "benchmark", cfg.data.benchmark_cases);

    std::vector<ppo::AgentCase> agent_cases(cases.size());
    run_tasks(cases.size(), [&](std::size_t i) {
        agent_cases[i] = ppo::agent_case(cases[i]);
        if (seg) agent_cases[i].mask = pref::predict_mask(*seg, cases[i].image);
    });
    prepare_out(run);
    const auto rep = ppo::evaluate_agent(policy, agent_cases, cfg.ppo, cfg.det_tolerance);

    nlohmann::json per_case = nlohmann::json::array();
    for (std::size_t i = 0; i < rep.cases.size(); ++i) {
        const auto& c = rep.cases[i];
        nlohmann::json truth = nlohmann::json::array(), dets = nlohmann::json::array(),
                       cands = nlohmann::json::array();
        for (const auto& t : c.truth) truth.push_back(point_json(t));
        for (const auto& d : c.agent) dets.push_back(point_json(d));
        for (std::size_t k = 0; k < c.baseline.size(); ++k) {
            auto j = point_json(c.baseline[k]);
            j["outcome"] = env::to_string(c.outcomes[k]);
            cands.push_back(j);
        }
        per_case.push_back({{"id", case_name(i)},
                            {"seed", cases[i].seed},
                            {"truth", truth},
                            {"detections", dets},
                            {"candidates", cands}});
    }
    write_json(run.out / "detections.json", {{"meta", meta(run, "detect")}, {"cases", per_case}});

    if (trace) {
        const auto pool = ppo::build_pool(agent_cases, cfg.ppo);
        std::ostringstream lines;
        for (std::size_t e = 0; e < pool.entries.size(); ++e) {
            const auto spec = pool.spec(e, cfg.ppo);
            Rng unused(0);
            std::ostringstream steps;
            env::write_trace(spec, env::run_episode(spec, policy, unused, true), steps);
            std::istringstream in(steps.str());
            for (std::string line; std::getline(in, line);) {
                auto j = nlohmann::json::parse(line);
                j["case"] = case_name(static_cast<std::size_t>(pool.entries[e].case_index));
                j["candidate"] = pool.entries[e].candidate;
                lines << j.dump() << '\n';
            }
        }
        write_text(run.out / "traces.jsonl", lines.str());
    }

    nlohmann::json flat;
    const auto agent = detection_json(rep.agent), baseline = detection_json(rep.baseline);
    for (auto it = agent.begin(); it != agent.end(); ++it) flat["agent." + it.key()] = it.value();
    for (auto it = baseline.begin(); it != baseline.end(); ++it) flat["baseline." + it.key()] = it.value();
    flat["cases"] = rep.cases.size();
    flat["candidates"] = rep.candidates;
    flat["confirms"] = rep.confirms;
    flat["rejects"] = rep.rejects;
    flat["timeouts"] = rep.timeouts;
    // ratios are omitted when the baseline value is 0
    if (rep.baseline.fppi > 0) flat["fppi_ratio"] = rep.agent.fppi / rep.baseline.fppi;
    if (rep.baseline.tpr > 0) flat["tpr_ratio"] = rep.agent.tpr / rep.baseline.tpr;
    write_metrics(run, "detect", flat);
    flat["meta"] = meta(run, "detect");
    return flat;
}

}  // namespace ariadne::harness
