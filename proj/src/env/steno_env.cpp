// src/env/steno_env.cpp
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "ariadne/steno_env.hpp"

namespace ariadne::env {

Action action_from_code(int code) {
    if (code < 0 || code >= kNumActions) throw DataError("unknown action code " + std::to_string(code));
    return static_cast<Action>(code);
}

std::string to_string(Action a) {
    switch (a) {
        case Action::Left: return "left";
        case Action::Right: return "right";
        case Action::Confirm: return "confirm";
        case Action::Reject: return "reject";
    }
    throw DataError("unknown action code " + std::to_string(static_cast<int>(a)));
}

std::string to_string(Outcome o) {
    switch (o) {
        case Outcome::Move: return "move";
        case Outcome::TruePositive: return "tp";
        case Outcome::FalsePositive: return "fp";
        case Outcome::TrueNegative: return "tn";
        case Outcome::FalseNegative: return "fn";
        case Outcome::Timeout: return "timeout";
    }
    return "?";
}

nn::Vector build_state(const RadiusProfile& profile, int t, int window) {
    const int n = static_cast<int>(profile.size());
    if (n == 0) throw DataError("build_state: empty profile");
    if (window < 0) throw ConfigError("build_state: window must be >= 0");
    if (t < 0 || t >= n) throw DataError("build_state: index " + std::to_string(t) + " outside profile");
    const int width = 2 * window + 1;
    nn::Vector s(state_size(window));
    const double scale = std::max(profile.mean, kSigmaFloor);
    for (int k = 0; k < width; ++k) {
        const auto j = static_cast<std::size_t>(std::clamp(t - window + k, 0, n - 1));
        s(k) = profile.r[j] / scale;
        s(width + k) = profile.grad[j];
    }
    s(2 * width) = profile.z[static_cast<std::size_t>(t)];
    s(2 * width + 1) = profile.curv[static_cast<std::size_t>(t)];
    return s;
}

void EpisodeSpec::validate() const {
    if (!profile || profile->size() == 0) throw DataError("episode: missing profile");
    if (start < 0 || start >= static_cast<int>(profile->size())) throw DataError("episode: start index outside profile");
    if (!(tau > 0)) throw ConfigError("episode: tau must be > 0");
    if (step_size < 1) throw ConfigError("episode: step size must be >= 1");
    if (max_steps < 1) throw ConfigError("episode: max_steps must be >= 1");
    if (window < 0) throw ConfigError("episode: window must be >= 0");
}

double distance_to_truth(const EpisodeSpec& spec, int t) {
    const Pixel p = spec.profile->path.points[static_cast<std::size_t>(t)];
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : spec.ground_truth) best = std::min(best, std::hypot(p.x - g.x, p.y - g.y));
    return best;
}

StepResult step(const EpisodeSpec& spec, EnvPosition pos, Action action) {
    const int n = static_cast<int>(spec.profile->size());
    if (pos.index < 0 || pos.index >= n) throw DataError("step: index outside profile");
    StepResult r;
    r.next = {pos.index, pos.elapsed + 1};
    switch (action) {
        case Action::Left:
        case Action::Right: {
            const int dir = action == Action::Left ? -1 : 1;
            r.next.index = std::clamp(pos.index + dir * spec.step_size, 0, n - 1);
            r.reward = spec.rewards.step;
            if (r.next.elapsed >= spec.max_steps) {
                r.done = true;
                r.outcome = Outcome::Timeout;
            }
            return r;
        }
        case Action::Confirm: {
            const bool hit = distance_to_truth(spec, pos.index) <= spec.tau;
            r.done = true;
            r.outcome = hit ? Outcome::TruePositive : Outcome::FalsePositive;
            r.reward = hit ? spec.rewards.tp : spec.rewards.fp;
            return r;
        }
        case Action::Reject: {
            const bool clear = distance_to_truth(spec, pos.index) > spec.tau;
            r.done = true;
            r.outcome = clear ? Outcome::TrueNegative : Outcome::FalseNegative;
            r.reward = clear ? spec.rewards.tn : spec.rewards.fn;
            return r;
        }
    }
    throw DataError("unknown action code " + std::to_string(static_cast<int>(action)));
}

Episode run_episode(const EpisodeSpec& spec, const nn::MlpParams& policy, Rng& rng, bool greedy) {
    spec.validate();
    if (policy.input_size() != state_size(spec.window) || policy.output_size() != kNumActions)
        throw ShapeError("run_episode: policy shape does not match state size " +
                         std::to_string(state_size(spec.window)) + " -> 4");
    Episode ep;
    EnvPosition pos{spec.start, 0};
    for (;;) {
        Transition tr;
        tr.position = pos;
        tr.state = build_state(*spec.profile, pos.index, spec.window);
        const nn::Vector logits = nn::forward(policy, tr.state).logits;
        const nn::Vector logp = nn::log_softmax(logits);
        int a = 0;
        if (greedy) {
            a = nn::argmax(logits);
        } else {
            const double u = rng.uniform();
            double acc = 0.0;
            a = kNumActions - 1;
            for (int k = 0; k < kNumActions; ++k) {
                acc += std::exp(logp(k));
                if (u < acc) {
                    a = k;
                    break;
                }
            }
        }
        tr.action = action_from_code(a);
        tr.log_prob = logp(a);
        const auto res = step(spec, pos, tr.action);
        tr.reward = res.reward;
        tr.done = res.done;
        ep.total_reward += res.reward;
        ep.steps.push_back(std::move(tr));
        pos = res.next;
        if (res.done) {
            ep.outcome = res.outcome;
            break;
        }
    }
    ep.final_position = pos;
    return ep;
}

void write_trace(const EpisodeSpec& spec, const Episode& episode, std::ostream& out) {
    for (std::size_t k = 0; k < episode.steps.size(); ++k) {
        const auto& s = episode.steps[k];
        const Pixel p = spec.profile->path.points[static_cast<std::size_t>(s.position.index)];
        nlohmann::json j = {
            {"step", s.position.elapsed}, {"index", s.position.index}, {"x", p.x},
            {"y", p.y}, {"action", to_string(s.action)}, {"reward", s.reward},
            {"done", s.done}, {"outcome", to_string(s.done ? episode.outcome : Outcome::Move)},
        };
        out << j.dump() << '\n';
    }
}

}  // namespace ariadne::env
