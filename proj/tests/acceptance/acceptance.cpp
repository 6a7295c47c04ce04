// tests/acceptance/acceptance.cpp
// One PASS/FAIL line per acceptance criterion, measured values alongside.
// Exit status is the number of failed criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ariadne/harness.hpp"
#include "ariadne/ppo_trainer.hpp"
#include "ariadne/pref_align.hpp"
#include "ariadne/seg_metrics.hpp"
#include "ariadne/steno_env.hpp"
#include "ariadne/synth_angio.hpp"
#include "ariadne/topology.hpp"
#include "oracles.hpp"

using namespace ariadne;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void verdict(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("criterion %d %-26s %s  %s\n", id, name.c_str(), pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// |a - b| relative to the larger magnitude; pairs that are both below 1e-10
// count as equal.
double rel_err(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale < 1e-10 ? 0.0 : std::abs(a - b) / scale;
}

const fs::path kSource = ARIADNE_SOURCE_DIR;

// ---- 1: topology kernels against oracles -----------------------------------

void criterion_topology() {
    const auto t0 = Clock::now();
    Rng rng(derive_seed(1, "acceptance.topology"));
    int beta_bad = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto m = oracle::random_mask(rng, 32, 32, rng.uniform(0.2, 0.7));
        beta_bad += betti0(m, Connectivity::Four) != oracle::flood_fill_components(m, 4);
        beta_bad += betti0(m, Connectivity::Eight) != oracle::flood_fill_components(m, 8);
    }
    int edt_bad = 0;
    for (int i = 0; i < 200; ++i) {
        const auto m = oracle::random_mask(rng, 64, 64, rng.uniform(0.3, 0.95));
        const auto d = distance_transform(m);
        const auto ref = oracle::brute_force_edt(m);
        bool same = true;
        for (std::size_t k = 0; k < m.size(); ++k) same = same && d[k] == ref[k];
        edt_bad += !same;
    }
    int skel_bad = 0;
    for (int i = 0; i < 500; ++i) {
        const auto m = oracle::random_tube_fixture(rng, 64, 64);
        skel_bad += oracle::flood_fill_components(skeletonize(m), 8) != oracle::flood_fill_components(m, 8);
    }
    const double s = seconds_since(t0);
    std::ostringstream d;
    d << "beta0 mismatches " << beta_bad << "/2000, EDT mismatches " << edt_bad << "/200, skeleton beta0 changes "
      << skel_bad << "/500, " << fmt("%.1f", s) << " s (< 60)";
    verdict(1, "topology-oracles", beta_bad == 0 && edt_bad == 0 && skel_bad == 0 && s < 60.0, d.str());
}

// ---- 2: Dice vs clDice under one 2-px cut -----------------------------------

void criterion_dissociation() {
    Rng rng(derive_seed(2, "acceptance.dissociation"));
    double dice_sum = 0.0, cl_sum = 0.0, literal_sum = 0.0;
    int two = 0;
    const int n = 100;
    for (int i = 0; i < n; ++i) {
        // one gently bent tube across a 96 x 96 canvas
        const double r = rng.uniform(2.0, 5.0);
        const Point2 a{rng.uniform(8.0, 20.0), rng.uniform(10.0, 86.0)};
        const Point2 m{rng.uniform(40.0, 56.0), rng.uniform(20.0, 76.0)};
        const Point2 b{rng.uniform(76.0, 88.0), rng.uniform(10.0, 86.0)};
        const auto gt = oracle::tube(96, 96, {a, m, b}, r);
        const auto cut = degrade(gt, DegradeSpec::fragment(2, 1, rng.next_u64()));
        dice_sum += dice(cut, gt);
        cl_sum += cl_dice(cut, gt, ClDiceVariant::Standard);
        literal_sum += cl_dice(cut, gt, ClDiceVariant::PaperLiteral);
        two += betti0(cut) == 2;
    }
    const double md = dice_sum / n, mc = cl_sum / n;
    std::ostringstream d;
    d << "mean Dice " << fmt("%.4f", md) << " (>= 0.90), mean clDice " << fmt("%.4f", mc) << " (<= 0.85), beta0 == 2 on "
      << two << "/" << n << "; skeleton-vs-skeleton clDice " << fmt("%.4f", literal_sum / n);
    verdict(2, "metric-dissociation", md >= 0.90 && mc <= 0.85 && two == n, d.str());
}

// ---- 3: DPO -------------------------------------------------------------------

void criterion_dpo() {
    const auto cfg = harness::load_run_config(kSource / "configs" / "seg_desk.json");
    const auto& seg = cfg.seg;
    const double beta = seg.stage2.beta;

    // gradient against central differences on random small problems
    Rng rng(derive_seed(3, "acceptance.dpo.fd"));
    double worst_fd = 0.0;
    const int draws = 20;
    for (int t = 0; t < draws; ++t) {
        GrayImage img(12, 12);
        for (std::size_t i = 0; i < img.size(); ++i) img[i] = rng.uniform();
        pref::PreferencePair pair;
        pair.winner = oracle::random_mask(rng, 12, 12, 0.4);
        pair.loser = pair.winner;
        for (std::size_t i = 0; i < pair.loser.size(); ++i)
            if (rng.uniform() < 0.2) pair.loser[i] ^= 1;
        const auto ref = pref::PixelPolicy::create(seg.patch_radius, seg.hidden, rng.next_u64());
        const auto theta = pref::PixelPolicy::create(seg.patch_radius, seg.hidden, rng.next_u64());
        const auto g = pref::dpo_loss(theta, ref, img, pair, beta).grad.flat();
        const auto flat = theta.net.flat();
        // h = 1e-5 keeps the difference quantum (ulp(L) / 2h ~ 5e-12) well
        // under the 1e-10 floor of rel_err
        for (std::size_t k = 0; k < flat.size(); ++k) {
            auto plus = theta, minus = theta;
            auto fp = flat, fm = flat;
            fp[k] += 1e-5;
            fm[k] -= 1e-5;
            plus.net.assign_flat(fp);
            minus.net.assign_flat(fm);
            const double fd =
                (pref::dpo_loss(plus, ref, img, pair, beta).loss - pref::dpo_loss(minus, ref, img, pair, beta).loss) /
                2e-5;
            worst_fd = std::max(worst_fd, rel_err(g[k], fd));
        }
    }

    // reference point and held-out margins over 10 seeded desk runs
    double worst_ln2 = 0.0;
    std::size_t mined_total = 0;
    int seeds_ok = 0;
    std::ostringstream per_seed;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto cases = harness::generate_cases(cfg.synth, seed, "synth", cfg.data.n_cases);
        std::vector<pref::SegSample> train, test;
        const auto held = static_cast<std::size_t>(cfg.data.held_out);
        for (std::size_t i = 0; i < cases.size(); ++i)
            (i + held < cases.size() ? train : test).push_back({cases[i].image, cases[i].gt_mask});
        const auto p0 = pref::PixelPolicy::create(seg.patch_radius, seg.hidden, derive_seed(seed, "train.init"));
        const auto s1 = pref::stage1_train(p0, train, seg.stage1, derive_seed(seed, "train.stage1"));
        const auto pairs = pref::mine_pairs(s1, train, seg.mining, derive_seed(seed, "train.mine"));
        const auto s2 = pref::stage2_train(s1, train, pairs, seg.stage2);
        const auto held_pairs = pref::mine_pairs(s1, test, seg.mining, derive_seed(seed, "heldout.mine"));

        for (const auto* set : {&pairs, &held_pairs}) {
            const auto& samples = set == &pairs ? train : test;
            for (const auto& pr : *set) {
                if (pr.source != pref::PairSource::Mined) continue;
                ++mined_total;
                worst_ln2 = std::max(
                    worst_ln2, std::abs(pref::dpo_loss(s1, s1, samples[pr.case_index].image, pr, beta).loss - std::log(2.0)));
            }
        }
        int up = 0;
        for (const auto& pr : held_pairs)
            up += pref::preference_margin(s2, test[pr.case_index].image, pr) >
                  pref::preference_margin(s1, test[pr.case_index].image, pr);
        const bool ok = !held_pairs.empty() && up >= 0.9 * static_cast<double>(held_pairs.size());
        seeds_ok += ok;
        per_seed << (seed ? " " : "") << up << "/" << held_pairs.size();
    }
    std::ostringstream d;
    d << "max |L - ln2| " << fmt("%.2e", worst_ln2) << " over " << mined_total << " mined pairs (<= 1e-12), FD max rel err "
      << fmt("%.2e", worst_fd) << " over " << draws << " draws (<= 1e-4), held-out margin up on >= 90% for " << seeds_ok
      << "/10 seeds (>= 6) [" << per_seed.str() << "]";
    verdict(3, "dpo-correctness", worst_ln2 <= 1e-12 && mined_total > 0 && worst_fd <= 1e-4 && seeds_ok >= 6, d.str());
}

// ---- 4: reward table ----------------------------------------------------------

void criterion_rewards() {
    std::vector<Pixel> pts;
    for (int i = 0; i < 80; ++i) pts.push_back({i + 10, 20});
    const auto prof = build_profile(CenterlinePath::from_points(pts), std::vector<double>(80, 3.0), 1);
    const Pixel at = prof.path.points[40];
    int checked = 0, wrong = 0;
    for (double delta : {0.0, 74.0, 75.0, 76.0, 300.0}) {
        env::EpisodeSpec spec;
        spec.profile = &prof;
        spec.start = 40;
        spec.ground_truth = {{static_cast<double>(at.x), at.y + delta}};
        const bool within = delta <= 75.0;
        for (int code = 0; code < env::kNumActions; ++code) {
            const auto a = env::action_from_code(code);
            const auto r = env::step(spec, {40, 0}, a);
            double want = -1.0;
            bool done = false;
            if (a == env::Action::Confirm) want = within ? 50.0 : -10.0, done = true;
            if (a == env::Action::Reject) want = within ? -50.0 : 10.0, done = true;
            ++checked;
            wrong += r.reward != want || r.done != done;
        }
    }
    std::ostringstream d;
    d << checked - wrong << "/" << checked << " (action, delta) cells match, delta 75 confirm pays +50";
    verdict(4, "reward-table", wrong == 0, d.str());
}

// ---- 5: PPO -------------------------------------------------------------------

void criterion_ppo() {
    const auto cfg = harness::load_run_config(kSource / "configs" / "benchmark.json");
    const auto& pc = cfg.ppo;

    // finite differences of the full policy loss on a frozen 2-transition batch
    const auto probe_cases = harness::generate_cases(cfg.synth, 5, "acceptance.fd", 2);
    std::vector<ppo::AgentCase> probe;
    for (const auto& c : probe_cases) probe.push_back(ppo::agent_case(c));
    const auto pool = ppo::build_pool(probe, pc);
    const auto ac = ppo::ActorCritic::create(pc, 5);
    const int dim = env::state_size(pc.window);
    nn::Matrix s(dim, 2);
    Rng rng(derive_seed(5, "acceptance.ppo.fd"));
    for (int j = 0; j < 2; ++j) {
        const auto spec = pool.spec(rng.below(pool.entries.size()), pc);
        s.col(j) = env::build_state(*spec.profile, spec.start, pc.window);
    }
    const std::vector<int> acts = {2, 0};
    const std::vector<double> adv = {1.3, -0.7};
    std::vector<double> old(2);
    for (int j = 0; j < 2; ++j)
        old[static_cast<std::size_t>(j)] = nn::log_softmax(nn::forward(ac.policy, s.col(j)).logits)(acts[static_cast<std::size_t>(j)]) +
                                           rng.uniform(-0.1, 0.1);
    nn::MlpParams g;
    ppo::policy_loss(ac.policy, s, acts, old, adv, pc.clip, pc.entropy_coef, &g);
    const auto gflat = g.flat();
    const auto flat = ac.policy.flat();
    // every bias and 400 random weights
    std::vector<std::size_t> coords;
    {
        std::size_t off = 0;
        for (std::size_t l = 0; l < ac.policy.W.size(); ++l) {
            const auto nw = static_cast<std::size_t>(ac.policy.W[l].size());
            const auto nb = static_cast<std::size_t>(ac.policy.b[l].size());
            for (int k = 0; k < 100; ++k) coords.push_back(off + rng.below(nw));
            for (std::size_t k = 0; k < nb; ++k) coords.push_back(off + nw + k);
            off += nw + nb;
        }
        if (off != flat.size()) coords.clear();  // layout assumption broken: no evidence, criterion fails
    }
    double worst = coords.empty() ? 1.0 : 0.0;
    for (auto k : coords) {
        auto plus = ac.policy, minus = ac.policy;
        auto fp = flat, fm = flat;
        const double h = 1e-6;
        fp[k] += h;
        fm[k] -= h;
        plus.assign_flat(fp);
        minus.assign_flat(fm);
        const double fd = (ppo::policy_loss(plus, s, acts, old, adv, pc.clip, pc.entropy_coef).loss -
                           ppo::policy_loss(minus, s, acts, old, adv, pc.clip, pc.entropy_coef).loss) /
                          (2 * h);
        worst = std::max(worst, rel_err(gflat[k], fd));
    }

    // training curves at the configured budget
    const auto t0 = Clock::now();
    int improved = 0;
    double worst_first_clip = 0.0;
    std::ostringstream per_seed;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto cases = harness::generate_cases(cfg.synth, seed, "agent.train", cfg.data.agent_train_cases);
        std::vector<ppo::AgentCase> ac_cases;
        for (const auto& c : cases) ac_cases.push_back(ppo::agent_case(c));
        const auto res = ppo::train_agent(ac_cases, pc, derive_seed(seed, "train.agent"));
        const auto& c = res.curve;
        const std::size_t k = std::max<std::size_t>(1, (c.size() + 9) / 10);
        double first = 0.0, last = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            first += c[i].mean_reward / static_cast<double>(k);
            last += c[c.size() - 1 - i].mean_reward / static_cast<double>(k);
        }
        improved += last > first;
        for (const auto& it : c) worst_first_clip = std::max(worst_first_clip, it.update.first_clip_fraction);
        per_seed << (seed ? " " : "") << fmt("%.1f", first) << "->" << fmt("%.1f", last);
    }
    const double secs = seconds_since(t0);
    std::ostringstream d;
    d << "FD max rel err " << fmt("%.2e", worst) << " on " << coords.size() << " coords (<= 1e-4), first-minibatch clip fraction max "
      << worst_first_clip << " (== 0), improved " << improved << "/10 seeds (>= 8) at " << pc.steps << " steps, "
      << fmt("%.0f", secs) << " s (< 900) [" << per_seed.str() << "]";
    verdict(5, "ppo-sanity", worst <= 1e-4 && worst_first_clip == 0.0 && improved >= 8 && pc.steps == 50000 && secs < 900.0,
            d.str());
}

// ---- 6: end-to-end benchmark ----------------------------------------------------

void criterion_benchmark(const fs::path& work) {
    auto run = harness::resolve_run(kSource / "configs" / "benchmark.json", std::nullopt, work / "agent");
    harness::cmd_train_agent(run);
    run.out = work / "detect";
    const auto t0 = Clock::now();
    harness::cmd_detect(run, work / "agent" / "policy.json");
    const double secs = seconds_since(t0);
    std::ifstream in(work / "detect" / "metrics.json");
    const auto m = nlohmann::json::parse(in);
    const double af = m["agent.fppi"], bf = m["baseline.fppi"], at = m["agent.tpr"], bt = m["baseline.tpr"];
    const bool pass = bf > 0 && bt > 0 && af <= 0.6 * bf && at >= 0.8 * bt && secs < 300.0;
    std::ostringstream d;
    d << m["cases"].get<int>() << " cases, seed " << run.seed << ": agent FPPI " << fmt("%.3f", af) << " vs baseline "
      << fmt("%.3f", bf) << " (ratio " << fmt("%.3f", bf > 0 ? af / bf : NAN) << ", <= 0.6), agent TPR " << fmt("%.3f", at)
      << " vs baseline " << fmt("%.3f", bt) << " (ratio " << fmt("%.3f", bt > 0 ? at / bt : NAN) << ", >= 0.8), evaluation "
      << fmt("%.1f", secs) << " s (< 300)";
    verdict(6, "benchmark-fppi", pass, d.str());
}

// ---- 7: latency ---------------------------------------------------------------

void criterion_latency() {
    const auto cfg = harness::load_run_config(kSource / "configs" / "benchmark.json");
    const auto raw = harness::generate_cases(cfg.synth, 7, "acceptance.latency", 4);
    std::vector<ppo::AgentCase> cases;
    for (const auto& c : raw) cases.push_back(ppo::agent_case(c));
    const auto pool = ppo::build_pool(cases, cfg.ppo);
    const auto policy = ppo::ActorCritic::create(cfg.ppo, 7).policy;
    double worst_ms = 0.0, total_ms = 0.0, sink = 0.0;
    const int reps = 20;
    for (std::size_t e = 0; e < pool.entries.size(); ++e) {
        const auto spec = pool.spec(e, cfg.ppo);
        for (int r = 0; r < reps; ++r) {
            const auto t0 = Clock::now();
            sink += nn::forward(policy, env::build_state(*spec.profile, spec.start, spec.window)).logits(0);
            const double ms = seconds_since(t0) * 1e3;
            worst_ms = std::max(worst_ms, ms);
            total_ms += ms;
        }
    }
    const auto n = static_cast<double>(pool.entries.size() * reps);
    std::ostringstream d;
    d << "state build + forward over " << pool.entries.size() << " candidates: mean " << fmt("%.4f", total_ms / n)
      << " ms, max " << fmt("%.4f", worst_ms) << " ms (< 50)";
    verdict(7, "latency", pool.entries.size() > 0 && std::isfinite(sink) && worst_ms < 50.0, d.str());
}

// ---- 8: CLI determinism -------------------------------------------------------------

// Every file under dir with a 64-bit FNV-1a of its bytes.
std::map<std::string, std::uint64_t> tree_hashes(const fs::path& dir) {
    std::map<std::string, std::uint64_t> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::uint64_t h = 1469598103934665603ULL;
        char c;
        while (in.get(c)) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ULL;
        }
        out[fs::relative(e.path(), dir).generic_string()] = h;
    }
    return out;
}

bool run_pipeline(const fs::path& dir, std::vector<std::string>& failed) {
    const std::string cli = ARIADNE_CLI_PATH;
    const auto seg = (kSource / "configs" / "seg_desk.json").string();
    const auto bench = (kSource / "configs" / "benchmark.json").string();
    const auto d = [&](const char* sub) { return "'" + (dir / sub).string() + "'"; };
    const std::vector<std::pair<std::string, std::string>> steps = {
        {"synth", "synth --config '" + seg + "' --out " + d("synth")},
        {"train-seg", "train-seg --config '" + seg + "' --cases " + d("synth") + " --out " + d("seg")},
        {"train-agent", "train-agent --config '" + bench + "' --out " + d("agent")},
        {"detect", "detect --config '" + bench + "' --checkpoint " + d("agent/policy.json") + " --trace --out " +
                       d("detect")},
        {"detect --seg-checkpoint", "detect --config '" + seg + "' --checkpoint " + d("agent/policy.json") +
                                        " --cases " + d("synth") + " --seg-checkpoint " + d("seg/stage3.json") +
                                        " --out " + d("detect_seg")},
        {"report", "report --out " + d("report") + " " + d("seg/metrics.json") + " " + d("agent/metrics.json") + " " +
                       d("detect/metrics.json") + " " + d("detect_seg/metrics.json")},
    };
    bool ok = true;
    for (const auto& [name, args] : steps) {
        const std::string cmd = "'" + cli + "' " + args + " > /dev/null";
        if (std::system(cmd.c_str()) != 0) {
            failed.push_back(name);
            ok = false;
        }
    }
    return ok;
}

void criterion_determinism(const fs::path& work) {
    const auto dir = work / "cli";
    std::vector<std::string> failed;
    fs::remove_all(dir);
    const bool ok1 = run_pipeline(dir, failed);
    const auto first = tree_hashes(dir);
    fs::remove_all(dir);
    const bool ok2 = run_pipeline(dir, failed);
    const auto second = tree_hashes(dir);

    std::vector<std::string> differing;
    for (const auto& [path, h] : first) {
        const auto it = second.find(path);
        if (it == second.end() || it->second != h) differing.push_back(path);
    }
    for (const auto& [path, h] : second)
        if (!first.count(path)) differing.push_back(path);
    std::ostringstream d;
    d << "6 commands run twice into the same directories: " << first.size() << " files, " << differing.size()
      << " differ";
    for (std::size_t i = 0; i < std::min<std::size_t>(differing.size(), 5); ++i) d << (i ? ", " : " (") << differing[i];
    if (!differing.empty()) d << ")";
    for (const auto& f : failed) d << "; `" << f << "` exited non-zero";
    verdict(8, "cli-determinism", ok1 && ok2 && !first.empty() && differing.empty(), d.str());
}

}  // namespace

int main(int argc, char** argv) {
    // optional: run a subset, e.g. `acceptance 1 4 7`
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
    const auto want = [&](int c) { return only.empty() || std::count(only.begin(), only.end(), c) > 0; };

    const fs::path work = ARIADNE_ACCEPTANCE_WORKDIR;
    fs::create_directories(work);
    const std::vector<std::pair<int, std::function<void()>>> all = {
        {1, criterion_topology},
        {2, criterion_dissociation},
        {3, criterion_dpo},
        {4, criterion_rewards},
        {5, criterion_ppo},
        {6, [&] { criterion_benchmark(work); }},
        {7, criterion_latency},
        {8, [&] { criterion_determinism(work); }},
    };
    for (const auto& [id, fn] : all) {
        if (!want(id)) continue;
        try {
            fn();
        } catch (const std::exception& e) {
            verdict(id, "(exception)", false, e.what());
        }
    }
    return failures;
}
