// src/nn/heads.cpp
#include <cmath>

#include "ariadne/tiny_nn.hpp"

namespace ariadne::nn {

Vector log_softmax(const Vector& logits) {
    const double mx = logits.maxCoeff();
    const double lse = mx + std::log((logits.array() - mx).exp().sum());
    return (logits.array() - lse).matrix();
}

Vector softmax(const Vector& logits) { return log_softmax(logits).array().exp().matrix(); }

double categorical_entropy(const Vector& logits) {
    const Vector lp = log_softmax(logits);
    return -(lp.array().exp() * lp.array()).sum();
}

Vector log_prob_grad(const Vector& logits, int action) {
    if (action < 0 || action >= logits.size()) throw ShapeError("categorical: action out of range");
    Vector g = -softmax(logits);
    g(action) += 1.0;
    return g;
}

Vector entropy_grad(const Vector& logits) {
    const Vector lp = log_softmax(logits);
    const Vector p = lp.array().exp().matrix();
    const double h = -(p.array() * lp.array()).sum();
    return (-p.array() * (lp.array() + h)).matrix();
}

int argmax(const Vector& logits) {
    // first maximum wins, so ties resolve to the lowest action index
    int best = 0;
    for (int i = 1; i < logits.size(); ++i)
        if (logits(i) > logits(best)) best = i;
    return best;
}

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

// log sigmoid(z) = -softplus(-z), log(1 - sigmoid(z)) = -softplus(z)
double bernoulli_log_prob(double z, double y) { return -y * softplus(-z) - (1.0 - y) * softplus(z); }

double bernoulli_log_prob_grad(double z, double y) { return y - sigmoid(z); }

}  // namespace ariadne::nn
