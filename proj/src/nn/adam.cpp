// src/nn/adam.cpp
#include <cmath>

#include "ariadne/tiny_nn.hpp"

namespace ariadne::nn {

AdamState AdamState::for_params(const MlpParams& params, const AdamConfig& config) {
    if (!(config.lr > 0) || !(config.beta1 >= 0 && config.beta1 < 1) || !(config.beta2 >= 0 && config.beta2 < 1) ||
        !(config.eps > 0))
        throw ConfigError("adam: need lr > 0, betas in [0, 1), eps > 0");
    AdamState s;
    s.config = config;
    s.m = params.zeros_like();
    s.v = params.zeros_like();
    return s;
}

void adam_step(MlpParams& params, const MlpParams& grad, AdamState& state) {
    if (!params.same_shape(grad) || !params.same_shape(state.m) || !params.same_shape(state.v))
        throw ShapeError("adam: gradient or moment shapes do not match the parameters");
    if (!grad.all_finite()) throw NumericError("adam: non-finite gradient");
    const auto& c = state.config;
    ++state.step;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
    auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
        m = c.beta1 * m + (1.0 - c.beta1) * g;
        v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
        p.array() -= c.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.eps);
    };
    for (int l = 0; l < params.layers(); ++l) {
        update(params.W[l], grad.W[l], state.m.W[l], state.v.W[l]);
        update(params.b[l], grad.b[l], state.m.b[l], state.v.b[l]);
    }
}

}  // namespace ariadne::nn
