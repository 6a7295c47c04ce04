// src/ppo/ppo.cpp
#include <algorithm>
#include <cmath>
#include <numeric>

#include "ariadne/json_fields.hpp"
#include "ariadne/ppo_trainer.hpp"

namespace ariadne::ppo {
namespace {

void read_sizes(const nlohmann::json& j, const std::string& key, std::vector<int>& out) {
    if (!j.is_array()) throw ConfigError("ppo." + key + ": expected an array of sizes");
    out.clear();
    for (const auto& v : j) {
        if (!v.is_number_integer()) throw ConfigError("ppo." + key + ": sizes must be integers");
        out.push_back(v.get<int>());
    }
}

nn::Matrix gather(const nn::Matrix& m, const std::vector<std::size_t>& cols) {
    nn::Matrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = m.col(static_cast<Eigen::Index>(cols[k]));
    return out;
}

template <class T>
std::vector<T> gather(const std::vector<T>& v, const std::vector<std::size_t>& idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(v[i]);
    return out;
}

// Rescales g so its global L2 norm is at most max_norm.
void clip_grad_norm(nn::MlpParams& g, double max_norm) {
    if (max_norm <= 0) return;
    double sq = 0.0;
    for (const auto& w : g.W) sq += w.squaredNorm();
    for (const auto& b : g.b) sq += b.squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm <= max_norm) return;
    const double k = max_norm / norm;
    for (auto& w : g.W) w *= k;
    for (auto& b : g.b) b *= k;
}

std::vector<int> sizes_for(int in, const std::vector<int>& hidden, int out) {
    std::vector<int> s{in};
    s.insert(s.end(), hidden.begin(), hidden.end());
    s.push_back(out);
    return s;
}

}  // namespace

bool operator==(const PpoConfig& a, const PpoConfig& b) { return to_json(a) == to_json(b); }

void validate(const PpoConfig& c) {
    if (!(c.lr > 0)) throw ConfigError("ppo.lr must be > 0");
    if (!(c.gamma >= 0 && c.gamma < 1)) throw ConfigError("ppo.gamma must be in [0, 1)");
    if (!(c.clip > 0)) throw ConfigError("ppo.clip must be > 0");
    if (!(c.entropy_coef >= 0) || !(c.value_coef >= 0) || !(c.max_grad_norm >= 0)) throw ConfigError("ppo: loss coefficients must be >= 0");
    if (!(c.gae_lambda >= 0 && c.gae_lambda <= 1)) throw ConfigError("ppo.gae_lambda must be in [0, 1]");
    if (c.steps < 0) throw ConfigError("ppo.steps must be >= 0");
    if (c.rollout_steps < 1 || c.minibatch < 1 || c.epochs < 1) throw ConfigError("ppo: batch sizes and epochs must be >= 1");
    if (c.window < 0) throw ConfigError("ppo.window must be >= 0");
    if (c.max_episode_steps < 1 || c.step_size < 1) throw ConfigError("ppo: episode limits must be >= 1");
    if (!(c.tau > 0)) throw ConfigError("ppo.tau must be > 0");
    for (int h : c.policy_hidden)
        if (h <= 0) throw ConfigError("ppo.policy_hidden sizes must be positive");
    for (int h : c.value_hidden)
        if (h <= 0) throw ConfigError("ppo.value_hidden sizes must be positive");
    if (!(c.policy_output_scale > 0)) throw ConfigError("ppo.policy_output_scale must be > 0");
    if (c.analysis.smooth_window < 1 || c.analysis.smooth_window % 2 == 0)
        throw ConfigError("ppo.analysis.smooth_window must be odd and >= 1");
    if (c.analysis.spur_length < 0 || c.analysis.min_path_points < 3 || c.analysis.candidates.suppression_radius < 0)
        throw ConfigError("ppo.analysis: lengths out of range");
}

nlohmann::json to_json(const PpoConfig& c) {
    const auto& a = c.analysis;
    return {
        {"lr", c.lr},
        {"gamma", c.gamma},
        {"clip", c.clip},
        {"entropy_coef", c.entropy_coef},
        {"gae_lambda", c.gae_lambda},
        {"value_coef", c.value_coef},
        {"max_grad_norm", c.max_grad_norm},
        {"steps", c.steps},
        {"rollout_steps", c.rollout_steps},
        {"minibatch", c.minibatch},
        {"epochs", c.epochs},
        {"window", c.window},
        {"max_episode_steps", c.max_episode_steps},
        {"step_size", c.step_size},
        {"tau", c.tau},
        {"policy_hidden", c.policy_hidden},
        {"value_hidden", c.value_hidden},
        {"policy_output_scale", c.policy_output_scale},
        {"analysis",
         {{"smooth_window", a.smooth_window},
          {"spur_length", a.spur_length},
          {"min_path_points", a.min_path_points},
          {"k", a.candidates.k},
          {"theta_curv", a.candidates.theta_curv},
          {"suppression_radius", a.candidates.suppression_radius}}},
    };
}

PpoConfig ppo_config_from_json(const nlohmann::json& j) {
    PpoConfig c;
    FieldReader r(j, "ppo");
    r.read("lr", c.lr)
        .read("gamma", c.gamma)
        .read("clip", c.clip)
        .read("entropy_coef", c.entropy_coef)
        .read("gae_lambda", c.gae_lambda)
        .read("value_coef", c.value_coef)
        .read("max_grad_norm", c.max_grad_norm)
        .read("steps", c.steps)
        .read("rollout_steps", c.rollout_steps)
        .read("minibatch", c.minibatch)
        .read("epochs", c.epochs)
        .read("window", c.window)
        .read("max_episode_steps", c.max_episode_steps)
        .read("step_size", c.step_size)
        .read("tau", c.tau)
        .section("policy_hidden", [&](const nlohmann::json& v) { read_sizes(v, "policy_hidden", c.policy_hidden); })
        .section("value_hidden", [&](const nlohmann::json& v) { read_sizes(v, "value_hidden", c.value_hidden); })
        .read("policy_output_scale", c.policy_output_scale)
        .section("analysis", [&](const nlohmann::json& v) {
            auto& a = c.analysis;
            FieldReader(v, "ppo.analysis")
                .read("smooth_window", a.smooth_window)
                .read("spur_length", a.spur_length)
                .read("min_path_points", a.min_path_points)
                .read("k", a.candidates.k)
                .read("theta_curv", a.candidates.theta_curv)
                .read("suppression_radius", a.candidates.suppression_radius)
                .finish();
        });
    r.finish();
    validate(c);
    return c;
}

void RolloutBatch::validate() const {
    const std::size_t n = actions.size();
    if (static_cast<std::size_t>(states.cols()) != n || log_probs.size() != n || rewards.size() != n ||
        values.size() != n || dones.size() != n || advantages.size() != n || returns.size() != n)
        throw ShapeError("rollout batch: field lengths differ");
    for (double a : advantages)
        if (!std::isfinite(a)) throw NumericError("rollout batch: non-finite advantage");
}

double clipped_surrogate(double ratio, double advantage, double eps) {
    return std::min(ratio * advantage, std::clamp(ratio, 1.0 - eps, 1.0 + eps) * advantage);
}

SurrogateStats policy_loss(const nn::MlpParams& policy, const nn::Matrix& states, const std::vector<int>& actions,
                           const std::vector<double>& old_log_probs, const std::vector<double>& advantages,
                           double clip, double entropy_coef, nn::MlpParams* grad) {
    const auto n = static_cast<Eigen::Index>(actions.size());
    if (states.cols() != n || static_cast<Eigen::Index>(old_log_probs.size()) != n ||
        static_cast<Eigen::Index>(advantages.size()) != n)
        throw ShapeError("policy_loss: batch fields differ in length");
    SurrogateStats st;
    if (n == 0) {
        if (grad) *grad = policy.zeros_like();
        return st;
    }
    nn::ForwardCache cache;
    const nn::Matrix logits = nn::forward_batch(policy, states, grad ? &cache : nullptr);
    nn::Matrix dlogits(logits.rows(), n);
    const double inv_n = 1.0 / static_cast<double>(n);
    int clipped = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const nn::Vector z = logits.col(j);
        const int a = actions[static_cast<std::size_t>(j)];
        const nn::Vector logp = nn::log_softmax(z);
        const double adv = advantages[static_cast<std::size_t>(j)];
        const double ratio = std::exp(logp(a) - old_log_probs[static_cast<std::size_t>(j)]);
        const double unclipped = ratio * adv;
        const double limited = std::clamp(ratio, 1.0 - clip, 1.0 + clip) * adv;
        st.surrogate += std::min(unclipped, limited);
        st.entropy += nn::categorical_entropy(z);
        st.approx_kl += old_log_probs[static_cast<std::size_t>(j)] - logp(a);
        if (std::abs(ratio - 1.0) > clip) ++clipped;
        if (grad) {
            // the clipped branch is constant in theta
            const double d_logp = unclipped <= limited ? unclipped : 0.0;
            dlogits.col(j) = -inv_n * (d_logp * nn::log_prob_grad(z, a) + entropy_coef * nn::entropy_grad(z));
        }
    }
    st.surrogate *= inv_n;
    st.entropy *= inv_n;
    st.approx_kl *= inv_n;
    st.clip_fraction = clipped * inv_n;
    st.loss = -(st.surrogate + entropy_coef * st.entropy);
    if (grad) *grad = nn::backward(policy, cache, dlogits);
    return st;
}

double value_loss(const nn::MlpParams& value, const nn::Matrix& states, const std::vector<double>& returns,
                  nn::MlpParams* grad) {
    const auto n = static_cast<Eigen::Index>(returns.size());
    if (states.cols() != n) throw ShapeError("value_loss: batch fields differ in length");
    if (n == 0) {
        if (grad) *grad = value.zeros_like();
        return 0.0;
    }
    nn::ForwardCache cache;
    const nn::Matrix v = nn::forward_batch(value, states, grad ? &cache : nullptr);
    nn::Matrix dv(1, n);
    double loss = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double e = v(0, j) - returns[static_cast<std::size_t>(j)];
        loss += e * e;
        dv(0, j) = 2.0 * e / static_cast<double>(n);
    }
    if (grad) *grad = nn::backward(value, cache, dv);
    return loss / static_cast<double>(n);
}

ActorCritic ActorCritic::create(const PpoConfig& cfg, std::uint64_t seed) {
    const int in = env::state_size(cfg.window);
    ActorCritic ac;
    ac.policy = nn::MlpParams::he_uniform(sizes_for(in, cfg.policy_hidden, env::kNumActions),
                                          derive_seed(seed, "ppo.policy"), cfg.policy_output_scale);
    ac.value = nn::MlpParams::he_uniform(sizes_for(in, cfg.value_hidden, 1), derive_seed(seed, "ppo.value"));
    ac.policy_opt = nn::AdamState::for_params(ac.policy, {cfg.lr, 0.9, 0.999, 1e-8});
    ac.value_opt = nn::AdamState::for_params(ac.value, {cfg.lr, 0.9, 0.999, 1e-8});
    return ac;
}

UpdateStats ppo_update(ActorCritic& ac, const RolloutBatch& batch, const PpoConfig& cfg, Rng& rng) {
    batch.validate();
    UpdateStats st;
    const std::size_t n = batch.size();
    if (n == 0) return st;

    std::vector<double> adv = batch.advantages;
    const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (double& a : adv) a = (a - mean) / std::max(sd, 1e-8);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t mb = static_cast<std::size_t>(cfg.minibatch);
    for (int e = 0; e < cfg.epochs; ++e) {
        shuffle(order, rng);
        for (std::size_t begin = 0; begin < n; begin += mb) {
            const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                               order.begin() + static_cast<std::ptrdiff_t>(std::min(n, begin + mb)));
            const nn::Matrix s = gather(batch.states, idx);
            nn::MlpParams gp, gv;
            const auto ps = policy_loss(ac.policy, s, gather(batch.actions, idx), gather(batch.log_probs, idx),
                                        gather(adv, idx), cfg.clip, cfg.entropy_coef, &gp);
            const double vl = value_loss(ac.value, s, gather(batch.returns, idx), &gv);
            if (!std::isfinite(ps.loss) || !std::isfinite(vl)) throw NumericError("ppo_update: non-finite loss");
            for (auto& w : gv.W) w *= cfg.value_coef;
            for (auto& b : gv.b) b *= cfg.value_coef;
            clip_grad_norm(gp, cfg.max_grad_norm);
            clip_grad_norm(gv, cfg.max_grad_norm);
            nn::adam_step(ac.policy, gp, ac.policy_opt);
            nn::adam_step(ac.value, gv, ac.value_opt);
            if (st.minibatches == 0) st.first_clip_fraction = ps.clip_fraction;
            st.clip_fraction += ps.clip_fraction;
            st.entropy += ps.entropy;
            st.policy_loss += ps.loss;
            st.value_loss += vl;
            st.approx_kl += ps.approx_kl;
            ++st.minibatches;
        }
    }
    const double k = 1.0 / st.minibatches;
    st.clip_fraction *= k;
    st.entropy *= k;
    st.policy_loss *= k;
    st.value_loss *= k;
    st.approx_kl *= k;
    return st;
}

}  // namespace ariadne::ppo
