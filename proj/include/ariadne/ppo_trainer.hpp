// include/ariadne/ppo_trainer.hpp
// PPO with a clipped surrogate, GAE and an entropy bonus for the stenosis
// navigation agent, plus greedy evaluation against the confirm-all baseline.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "ariadne/rng.hpp"
#include "ariadne/seg_metrics.hpp"
#include "ariadne/steno_env.hpp"
#include "ariadne/synth_angio.hpp"
#include "ariadne/tiny_nn.hpp"
#include "ariadne/vessel_geometry.hpp"

namespace ariadne::ppo {

struct PpoConfig {
    double lr = 3e-4;
    double gamma = 0.99;
    double clip = 0.2;
    double entropy_coef = 0.01;
    double gae_lambda = 0.95;
    double value_coef = 0.5;
    double max_grad_norm = 0.5;  // per network, 0 disables
    long steps = 50000;        // environment interactions
    int rollout_steps = 2048;  // per update
    int minibatch = 256;
    int epochs = 4;
    int window = env::kDefaultWindow;
    int max_episode_steps = 50;
    int step_size = 3;
    double tau = 75.0;
    std::vector<int> policy_hidden = {256, 128, 64};
    std::vector<int> value_hidden = {64, 64};
    double policy_output_scale = 0.01;  // near-uniform initial policy
    VesselAnalysisParams analysis;

    friend bool operator==(const PpoConfig& a, const PpoConfig& b);
};

void validate(const PpoConfig& cfg);
nlohmann::json to_json(const PpoConfig& cfg);
PpoConfig ppo_config_from_json(const nlohmann::json& j);

struct GaeResult {
    std::vector<double> advantages;
    std::vector<double> returns;
};

// delta_t = r_t + gamma V_{t+1} (1 - done_t) - V_t, A_t = delta_t + gamma lambda (1 - done_t) A_{t+1};
// the value after the last sample is taken as 0. ShapeError on length mismatch.
GaeResult compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                      const std::vector<std::uint8_t>& dones, double gamma, double lambda);

struct RolloutBatch {
    nn::Matrix states;  // state_size x N
    std::vector<int> actions;
    std::vector<double> log_probs;  // under the collecting policy
    std::vector<double> rewards;
    std::vector<double> values;
    std::vector<std::uint8_t> dones;
    std::vector<double> advantages;
    std::vector<double> returns;

    std::size_t size() const noexcept { return actions.size(); }
    void validate() const;
};

// min(rho A, clip(rho, 1 - eps, 1 + eps) A)
double clipped_surrogate(double ratio, double advantage, double eps);

struct SurrogateStats {
    double surrogate = 0.0;      // mean clipped term
    double entropy = 0.0;        // mean categorical entropy
    double clip_fraction = 0.0;  // share of samples with |rho - 1| > eps
    double approx_kl = 0.0;      // mean (old log p - new log p)
    double loss = 0.0;           // -(surrogate + entropy_coef * entropy)
};

// Policy loss over the given columns; `grad` receives d loss / d theta.
SurrogateStats policy_loss(const nn::MlpParams& policy, const nn::Matrix& states, const std::vector<int>& actions,
                           const std::vector<double>& old_log_probs, const std::vector<double>& advantages,
                           double clip, double entropy_coef, nn::MlpParams* grad = nullptr);

// mean (V(s) - R)^2; `grad` receives its gradient.
double value_loss(const nn::MlpParams& value, const nn::Matrix& states, const std::vector<double>& returns,
                  nn::MlpParams* grad = nullptr);

struct ActorCritic {
    nn::MlpParams policy;  // state -> 4 logits
    nn::MlpParams value;   // state -> 1
    nn::AdamState policy_opt;
    nn::AdamState value_opt;

    static ActorCritic create(const PpoConfig& cfg, std::uint64_t seed);
};

struct UpdateStats {
    double clip_fraction = 0.0;        // mean over minibatches
    double first_clip_fraction = 0.0;  // first minibatch of the first epoch
    double entropy = 0.0;
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double approx_kl = 0.0;
    int minibatches = 0;
};

// Advantages are normalized per batch; minibatches are drawn from a shuffled
// index order for each epoch. NumericError on a non-finite loss.
UpdateStats ppo_update(ActorCritic& ac, const RolloutBatch& batch, const PpoConfig& cfg, Rng& rng);

// One candidate episode: the profile it runs on and the lesions of its image.
struct AgentCase {
    BinaryMask mask;
    std::vector<Point2> truth;
};

AgentCase agent_case(const SyntheticCase& c);

struct CandidatePool {
    std::vector<VesselAnalysis> analyses;  // one per case
    struct Entry {
        int case_index = 0;
        int candidate = 0;  // into analyses[case_index].candidates
    };
    std::vector<Entry> entries;
    std::vector<std::vector<Point2>> truth;

    env::EpisodeSpec spec(std::size_t entry, const PpoConfig& cfg) const;
};

CandidatePool build_pool(const std::vector<AgentCase>& cases, const PpoConfig& cfg);

struct IterationStats {
    int iteration = 0;
    long steps = 0;  // cumulative interactions
    int episodes = 0;
    double mean_reward = 0.0;  // mean episode return collected this iteration
    UpdateStats update;
};

struct TrainResult {
    ActorCritic nets;
    std::vector<IterationStats> curve;
};

// Deterministic per seed. DataError when no case yields a candidate.
TrainResult train_agent(const std::vector<AgentCase>& cases, const PpoConfig& cfg, std::uint64_t seed);

void write_curve_csv(const std::vector<IterationStats>& curve, std::ostream& out);

struct CaseDetections {
    std::vector<Point2> agent;     // confirmed pixels
    std::vector<Point2> baseline;  // every candidate pixel
    std::vector<Point2> truth;
    std::vector<env::Outcome> outcomes;  // per candidate
};

struct DetectionReport {
    DetectionMetrics agent;
    DetectionMetrics baseline;
    std::vector<CaseDetections> cases;
    int candidates = 0;
    int confirms = 0;
    int rejects = 0;
    int timeouts = 0;
};

// Greedy policy on every candidate of every case. Confirm emits the pixel the
// agent stands on; Reject and timeout emit nothing.
DetectionReport evaluate_agent(const nn::MlpParams& policy, const std::vector<AgentCase>& cases, const PpoConfig& cfg,
                               double tau_det = kDefaultDetectionTolerance);

}  // namespace ariadne::ppo
