// src/nn/mlp.cpp
#include <cmath>

#include "ariadne/rng.hpp"
#include "ariadne/tiny_nn.hpp"

namespace ariadne::nn {
namespace {

void check_sizes(const std::vector<int>& sizes) {
    if (sizes.size() < 2) throw ShapeError("mlp: need at least input and output sizes");
    for (int s : sizes)
        if (s <= 0) throw ShapeError("mlp: layer sizes must be positive");
}

}  // namespace

MlpParams MlpParams::zeros(std::vector<int> sizes) {
    check_sizes(sizes);
    MlpParams p;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        p.W.push_back(Matrix::Zero(sizes[l + 1], sizes[l]));
        p.b.push_back(Vector::Zero(sizes[l + 1]));
    }
    p.sizes = std::move(sizes);
    return p;
}

MlpParams MlpParams::he_uniform(std::vector<int> sizes, std::uint64_t seed, double output_scale) {
    MlpParams p = zeros(std::move(sizes));
    p.seed = seed;
    Rng rng(derive_seed(seed, "nn.init"));
    for (int l = 0; l < p.layers(); ++l) {
        const double limit = std::sqrt(6.0 / p.sizes[l]) * (l + 1 == p.layers() ? output_scale : 1.0);
        auto& w = p.W[l];
        // row-major fill so the draw order matches the flat layout
        for (int r = 0; r < w.rows(); ++r)
            for (int c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-limit, limit);
    }
    return p;
}

MlpParams MlpParams::zeros_like() const {
    MlpParams z = zeros(sizes);
    z.seed = seed;
    return z;
}

std::size_t MlpParams::parameter_count() const noexcept {
    std::size_t n = 0;
    for (int l = 0; l < layers(); ++l) n += static_cast<std::size_t>(W[l].size() + b[l].size());
    return n;
}

bool MlpParams::same_shape(const MlpParams& o) const noexcept {
    if (sizes != o.sizes || W.size() != o.W.size() || b.size() != o.b.size()) return false;
    for (std::size_t l = 0; l < W.size(); ++l)
        if (W[l].rows() != o.W[l].rows() || W[l].cols() != o.W[l].cols() || b[l].size() != o.b[l].size()) return false;
    return true;
}

bool MlpParams::all_finite() const noexcept {
    for (int l = 0; l < layers(); ++l)
        if (!W[l].allFinite() || !b[l].allFinite()) return false;
    return true;
}

void MlpParams::validate() const {
    check_sizes(sizes);
    if (W.size() + 1 != sizes.size() || b.size() != W.size()) throw ShapeError("mlp: layer count does not match sizes");
    for (std::size_t l = 0; l < W.size(); ++l) {
        if (W[l].rows() != sizes[l + 1] || W[l].cols() != sizes[l] || b[l].size() != sizes[l + 1])
            throw ShapeError("mlp: layer " + std::to_string(l) + " shape does not match the size chain");
    }
    if (!all_finite()) throw NumericError("mlp: non-finite parameter");
}

std::vector<double> MlpParams::flat() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (int l = 0; l < layers(); ++l) {
        for (int r = 0; r < W[l].rows(); ++r)
            for (int c = 0; c < W[l].cols(); ++c) out.push_back(W[l](r, c));
        for (int i = 0; i < b[l].size(); ++i) out.push_back(b[l](i));
    }
    return out;
}

void MlpParams::assign_flat(std::span<const double> values) {
    if (values.size() != parameter_count()) throw ShapeError("mlp: flat vector has the wrong length");
    std::size_t k = 0;
    for (int l = 0; l < layers(); ++l) {
        for (int r = 0; r < W[l].rows(); ++r)
            for (int c = 0; c < W[l].cols(); ++c) W[l](r, c) = values[k++];
        for (int i = 0; i < b[l].size(); ++i) b[l](i) = values[k++];
    }
}

void MlpParams::axpy(double scale, const MlpParams& other) {
    if (!same_shape(other)) throw ShapeError("mlp: axpy shape mismatch");
    for (int l = 0; l < layers(); ++l) {
        W[l] += scale * other.W[l];
        b[l] += scale * other.b[l];
    }
}

bool operator==(const MlpParams& a, const MlpParams& b) {
    if (!a.same_shape(b) || a.seed != b.seed) return false;
    for (int l = 0; l < a.layers(); ++l)
        if (a.W[l] != b.W[l] || a.b[l] != b.b[l]) return false;
    return true;
}

Matrix forward_batch(const MlpParams& params, const Matrix& inputs, ForwardCache* cache) {
    if (params.layers() == 0) throw ShapeError("mlp: empty network");
    if (inputs.rows() != params.input_size())
        throw ShapeError("mlp: input has " + std::to_string(inputs.rows()) + " features, network expects " +
                         std::to_string(params.input_size()));
    if (cache) {
        cache->inputs.clear();
        cache->pre.clear();
    }
    Matrix a = inputs;
    for (int l = 0; l < params.layers(); ++l) {
        Matrix z = params.W[l] * a;
        z.colwise() += params.b[l];
        if (cache) cache->inputs.push_back(std::move(a));
        if (l + 1 == params.layers()) return z;
        a = z.cwiseMax(0.0);
        if (cache) cache->pre.push_back(std::move(z));
    }
    return a;  // unreachable
}

ForwardResult forward(const MlpParams& params, const Vector& input) {
    ForwardResult r;
    Matrix out = forward_batch(params, input, &r.cache);
    r.logits = out.col(0);
    return r;
}

MlpParams backward(const MlpParams& params, const ForwardCache& cache, const Matrix& dlogits) {
    const int L = params.layers();
    if (static_cast<int>(cache.inputs.size()) != L || static_cast<int>(cache.pre.size()) != L - 1)
        throw ShapeError("mlp: cache does not come from this network");
    if (dlogits.rows() != params.output_size() || dlogits.cols() != cache.inputs[0].cols())
        throw ShapeError("mlp: dlogits shape does not match the forward batch");
    MlpParams g = params.zeros_like();
    Matrix delta = dlogits;
    for (int l = L - 1; l >= 0; --l) {
        g.W[l].noalias() = delta * cache.inputs[l].transpose();
        g.b[l] = delta.rowwise().sum();
        if (l == 0) break;
        Matrix up = params.W[l].transpose() * delta;
        delta = up.cwiseProduct((cache.pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
    return g;
}

}  // namespace ariadne::nn
