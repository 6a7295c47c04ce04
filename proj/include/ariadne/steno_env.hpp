// include/ariadne/steno_env.hpp
// Navigation MDP along one centerline profile. The agent starts on a
// geometric candidate, slides along the path in fixed steps and ends the
// episode by confirming (emit a detection here) or rejecting the candidate.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ariadne/raster.hpp"
#include "ariadne/rng.hpp"
#include "ariadne/tiny_nn.hpp"
#include "ariadne/vessel_geometry.hpp"

namespace ariadne::env {

enum class Action : int { Left = 0, Right = 1, Confirm = 2, Reject = 3 };
inline constexpr int kNumActions = 4;

// DataError for codes outside [0, 4).
Action action_from_code(int code);
std::string to_string(Action a);

enum class Outcome { Move, TruePositive, FalsePositive, TrueNegative, FalseNegative, Timeout };
std::string to_string(Outcome o);

struct RewardTable {
    double tp = 50.0;
    double fp = -10.0;
    double tn = 10.0;
    double fn = -50.0;
    double step = -1.0;
};

inline constexpr int kDefaultWindow = 3;

// [r / mean over 2w+1 | grad over 2w+1 | z | curv]
constexpr int state_size(int window) { return 2 * (2 * window + 1) + 2; }

// Window samples past either end repeat the end value. The radius window is
// divided by max(mean, kSigmaFloor).
nn::Vector build_state(const RadiusProfile& profile, int t, int window = kDefaultWindow);

struct EpisodeSpec {
    const RadiusProfile* profile = nullptr;  // not owned
    int start = 0;
    std::vector<Point2> ground_truth;  // lesion centroids in image pixels
    double tau = 75.0;                 // px, a confirm within tau (inclusive) is a hit
    int step_size = 3;                 // samples per Left/Right
    int max_steps = 50;
    int window = kDefaultWindow;
    RewardTable rewards;

    // ConfigError / DataError on out-of-range fields.
    void validate() const;
};

// Environment position: the profile index and the number of actions taken.
struct EnvPosition {
    int index = 0;
    int elapsed = 0;

    friend bool operator==(const EnvPosition&, const EnvPosition&) = default;
};

struct StepResult {
    EnvPosition next;
    double reward = 0.0;
    bool done = false;
    Outcome outcome = Outcome::Move;
};

// Min Euclidean pixel distance from profile sample t to the ground truth;
// +inf when there is none.
double distance_to_truth(const EpisodeSpec& spec, int t);

// Pure function of (spec, position, action). Moves clamp at the path ends.
// The action that brings `elapsed` to max_steps ends the episode with a
// timeout unless it is itself Confirm or Reject.
StepResult step(const EpisodeSpec& spec, EnvPosition pos, Action action);

struct Transition {
    EnvPosition position;
    nn::Vector state;
    Action action = Action::Left;
    double log_prob = 0.0;  // of `action` under the acting policy
    double reward = 0.0;
    bool done = false;
};

struct Episode {
    std::vector<Transition> steps;
    Outcome outcome = Outcome::Timeout;
    EnvPosition final_position;
    double total_reward = 0.0;
};

// Samples from the policy's categorical head (or takes the argmax when
// `greedy`). ShapeError unless the policy maps state_size(window) -> 4.
Episode run_episode(const EpisodeSpec& spec, const nn::MlpParams& policy, Rng& rng, bool greedy = false);

// One JSON object per step: index, x, y, action, reward, outcome, done.
void write_trace(const EpisodeSpec& spec, const Episode& episode, std::ostream& out);

}  // namespace ariadne::env
