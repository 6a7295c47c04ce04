// src/ppo/gae.cpp
#include "ariadne/ppo_trainer.hpp"

namespace ariadne::ppo {

GaeResult compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                      const std::vector<std::uint8_t>& dones, double gamma, double lambda) {
    const std::size_t n = rewards.size();
    if (values.size() != n || dones.size() != n) throw ShapeError("compute_gae: rewards, values and dones differ in length");
    GaeResult out;
    out.advantages.assign(n, 0.0);
    out.returns.assign(n, 0.0);
    double next_adv = 0.0, next_value = 0.0;
    for (std::size_t k = n; k-- > 0;) {
        const double live = dones[k] ? 0.0 : 1.0;
        const double delta = rewards[k] + gamma * next_value * live - values[k];
        const double adv = delta + gamma * lambda * live * next_adv;
        out.advantages[k] = adv;
        out.returns[k] = adv + values[k];
        next_adv = adv;
        next_value = values[k];
    }
    return out;
}

}  // namespace ariadne::ppo
