// src/ppo/agent.cpp
#include <algorithm>
#include <ostream>

#include "ariadne/parallel.hpp"
#include "ariadne/ppo_trainer.hpp"

namespace ariadne::ppo {
namespace {

// Episodes run in waves of fixed size so the rollout does not depend on the
// thread count; surplus episodes of the last wave are discarded.
constexpr int kWave = 32;

Point2 to_point(Pixel p) { return {static_cast<double>(p.x), static_cast<double>(p.y)}; }

env::EpisodeSpec make_spec(const VesselAnalysis& an, const Candidate& cand, const std::vector<Point2>& truth,
                           const PpoConfig& cfg) {
    env::EpisodeSpec s;
    s.profile = &an.profiles[static_cast<std::size_t>(cand.path_id)];
    s.start = cand.index;
    s.ground_truth = truth;
    s.tau = cfg.tau;
    s.step_size = cfg.step_size;
    s.max_steps = cfg.max_episode_steps;
    s.window = cfg.window;
    return s;
}

}  // namespace

AgentCase agent_case(const SyntheticCase& c) {
    AgentCase a;
    a.mask = c.gt_mask;
    for (const auto& s : c.stenoses) a.truth.push_back(to_point(s.centroid));
    return a;
}

env::EpisodeSpec CandidatePool::spec(std::size_t entry, const PpoConfig& cfg) const {
    const auto& e = entries.at(entry);
    const auto& an = analyses[static_cast<std::size_t>(e.case_index)];
    return make_spec(an, an.candidates[static_cast<std::size_t>(e.candidate)],
                     truth[static_cast<std::size_t>(e.case_index)], cfg);
}

CandidatePool build_pool(const std::vector<AgentCase>& cases, const PpoConfig& cfg) {
    CandidatePool pool;
    pool.analyses.resize(cases.size());
    parallel::for_each_task(static_cast<std::ptrdiff_t>(cases.size()), [&](std::ptrdiff_t i) {
        pool.analyses[static_cast<std::size_t>(i)] = analyze_vessels(cases[static_cast<std::size_t>(i)].mask, cfg.analysis);
    });
    for (std::size_t i = 0; i < cases.size(); ++i) {
        pool.truth.push_back(cases[i].truth);
        for (std::size_t k = 0; k < pool.analyses[i].candidates.size(); ++k)
            pool.entries.push_back({static_cast<int>(i), static_cast<int>(k)});
    }
    return pool;
}

TrainResult train_agent(const std::vector<AgentCase>& cases, const PpoConfig& cfg, std::uint64_t seed) {
    validate(cfg);
    TrainResult res;
    res.nets = ActorCritic::create(cfg, seed);
    const auto pool = build_pool(cases, cfg);
    if (pool.entries.empty()) throw DataError("train_agent: no stenosis candidates in any case");

    Rng update_rng(derive_seed(seed, "ppo.update"));
    const int dim = env::state_size(cfg.window);
    long steps = 0;
    std::uint64_t next_episode = 0;
    for (int iteration = 0; steps < cfg.steps; ++iteration) {
        const long target = std::min<long>(cfg.rollout_steps, cfg.steps - steps);
        std::vector<env::Episode> episodes;
        long collected = 0;
        while (collected < target) {
            std::vector<env::Episode> wave(kWave);
            parallel::for_each_task(kWave, [&](std::ptrdiff_t k) {
                Rng rng(derive_seed(seed, "ppo.rollout", next_episode + static_cast<std::uint64_t>(k)));
                const auto spec = pool.spec(rng.below(pool.entries.size()), cfg);
                wave[static_cast<std::size_t>(k)] = env::run_episode(spec, res.nets.policy, rng);
            });
            for (auto& ep : wave) {
                if (collected >= target) break;
                collected += static_cast<long>(ep.steps.size());
                episodes.push_back(std::move(ep));
                ++next_episode;
            }
        }

        RolloutBatch batch;
        batch.states.resize(dim, collected);
        Eigen::Index col = 0;
        double reward_sum = 0.0;
        for (const auto& ep : episodes) {
            reward_sum += ep.total_reward;
            for (const auto& tr : ep.steps) {
                batch.states.col(col++) = tr.state;
                batch.actions.push_back(static_cast<int>(tr.action));
                batch.log_probs.push_back(tr.log_prob);
                batch.rewards.push_back(tr.reward);
                batch.dones.push_back(tr.done ? 1 : 0);
            }
        }
        const nn::Matrix v = nn::forward_batch(res.nets.value, batch.states);
        batch.values.assign(v.data(), v.data() + v.size());
        auto gae = compute_gae(batch.rewards, batch.values, batch.dones, cfg.gamma, cfg.gae_lambda);
        batch.advantages = std::move(gae.advantages);
        batch.returns = std::move(gae.returns);

        IterationStats it;
        it.iteration = iteration;
        steps += collected;
        it.steps = steps;
        it.episodes = static_cast<int>(episodes.size());
        it.mean_reward = reward_sum / static_cast<double>(episodes.size());
        it.update = ppo_update(res.nets, batch, cfg, update_rng);
        res.curve.push_back(it);
    }
    return res;
}

void write_curve_csv(const std::vector<IterationStats>& curve, std::ostream& out) {
    out << "iteration,steps,episodes,mean_reward,clip_fraction,entropy,policy_loss,value_loss,approx_kl\n";
    out.precision(10);
    for (const auto& it : curve)
        out << it.iteration << ',' << it.steps << ',' << it.episodes << ',' << it.mean_reward << ','
            << it.update.clip_fraction << ',' << it.update.entropy << ',' << it.update.policy_loss << ','
            << it.update.value_loss << ',' << it.update.approx_kl << '\n';
}

DetectionReport evaluate_agent(const nn::MlpParams& policy, const std::vector<AgentCase>& cases, const PpoConfig& cfg,
                               double tau_det) {
    validate(cfg);
    if (policy.input_size() != env::state_size(cfg.window) || policy.output_size() != env::kNumActions)
        throw ShapeError("evaluate_agent: policy does not map the state size to 4 actions");
    const auto pool = build_pool(cases, cfg);
    DetectionReport rep;
    rep.cases.resize(cases.size());
    parallel::for_each_task(static_cast<std::ptrdiff_t>(cases.size()), [&](std::ptrdiff_t ci) {
        const auto i = static_cast<std::size_t>(ci);
        auto& out = rep.cases[i];
        out.truth = cases[i].truth;
        const auto& an = pool.analyses[i];
        Rng unused(0);  // greedy episodes draw nothing
        for (const auto& cand : an.candidates) {
            out.baseline.push_back(to_point(cand.pixel));
            const auto s = make_spec(an, cand, cases[i].truth, cfg);
            const auto ep = env::run_episode(s, policy, unused, true);
            out.outcomes.push_back(ep.outcome);
            if (ep.steps.back().action == env::Action::Confirm)
                out.agent.push_back(to_point(s.profile->path.points[static_cast<std::size_t>(ep.final_position.index)]));
        }
    });
    std::vector<ImageDetections> agent_imgs, base_imgs;
    for (const auto& c : rep.cases) {
        agent_imgs.push_back({c.agent, c.truth});
        base_imgs.push_back({c.baseline, c.truth});
        rep.candidates += static_cast<int>(c.outcomes.size());
        for (auto o : c.outcomes) {
            if (o == env::Outcome::TruePositive || o == env::Outcome::FalsePositive) ++rep.confirms;
            else if (o == env::Outcome::Timeout) ++rep.timeouts;
            else ++rep.rejects;
        }
    }
    rep.agent = detection_metrics(agent_imgs, tau_det);
    rep.baseline = detection_metrics(base_imgs, tau_det);
    return rep;
}

}  // namespace ariadne::ppo
