// include/ariadne/tiny_nn.hpp
// Dense ReLU networks in double precision with hand-written backprop, Adam,
// and the two output heads the trainers need (categorical, Bernoulli).
//
// Batches are column-major: one sample per column, so a batch of B inputs is
// an (input_size x B) matrix.
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ariadne/error.hpp"

namespace ariadne::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct MlpParams {
    std::vector<int> sizes;   // input, hidden..., output
    std::vector<Matrix> W;    // W[l] is sizes[l+1] x sizes[l]
    std::vector<Vector> b;
    std::uint64_t seed = 0;   // init seed, kept for provenance

    // He-uniform weights (limit sqrt(6 / fan_in)), zero biases. The last
    // layer's weights are multiplied by `output_scale`.
    static MlpParams he_uniform(std::vector<int> sizes, std::uint64_t seed, double output_scale = 1.0);
    static MlpParams zeros(std::vector<int> sizes);
    // Same shapes, every value zero; used for gradients and Adam moments.
    MlpParams zeros_like() const;

    int layers() const noexcept { return static_cast<int>(W.size()); }
    int input_size() const noexcept { return sizes.empty() ? 0 : sizes.front(); }
    int output_size() const noexcept { return sizes.empty() ? 0 : sizes.back(); }
    std::size_t parameter_count() const noexcept;

    // Throws ShapeError on an inconsistent chain, NumericError on non-finite
    // values.
    void validate() const;
    bool same_shape(const MlpParams& other) const noexcept;
    bool all_finite() const noexcept;

    // Layer by layer, each W row-major then b.
    std::vector<double> flat() const;
    void assign_flat(std::span<const double> values);

    // this += scale * other (shapes must match).
    void axpy(double scale, const MlpParams& other);

    friend bool operator==(const MlpParams& a, const MlpParams& b);
};

struct ForwardCache {
    std::vector<Matrix> inputs;  // inputs[l] feeds layer l (inputs[0] is the batch)
    std::vector<Matrix> pre;     // pre-activations of hidden layers
};

struct ForwardResult {
    Vector logits;
    ForwardCache cache;
};

// Hidden layers: affine then ReLU. Output layer: affine only.
ForwardResult forward(const MlpParams& params, const Vector& input);
Matrix forward_batch(const MlpParams& params, const Matrix& inputs, ForwardCache* cache = nullptr);

// Gradient of sum over the batch of <dlogits[:, j], logits[:, j]>, i.e. the
// loss gradient when dlogits holds dLoss/dLogits per sample.
MlpParams backward(const MlpParams& params, const ForwardCache& cache, const Matrix& dlogits);

struct AdamConfig {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig config;
    MlpParams m, v;
    long step = 0;

    static AdamState for_params(const MlpParams& params, const AdamConfig& config);
};

// Bias-corrected Adam, no weight decay. Throws NumericError on a non-finite
// gradient (parameters are left untouched) and ShapeError on mismatch.
void adam_step(MlpParams& params, const MlpParams& grad, AdamState& state);

// Categorical head over logits.
Vector softmax(const Vector& logits);
Vector log_softmax(const Vector& logits);
double categorical_entropy(const Vector& logits);
// d log p(a) / d logits = onehot(a) - softmax
Vector log_prob_grad(const Vector& logits, int action);
// d H / d logits = -p * (log p + H)
Vector entropy_grad(const Vector& logits);
int argmax(const Vector& logits);

// Bernoulli head over a single logit z: p(y = 1) = sigmoid(z).
double sigmoid(double z);
double softplus(double z);  // log(1 + e^z), stable for large |z|
// y log sigmoid(z) + (1 - y) log(1 - sigmoid(z)); always finite.
double bernoulli_log_prob(double z, double y);
// d/dz of the above: y - sigmoid(z)
double bernoulli_log_prob_grad(double z, double y);

// Versioned JSON checkpoints. Loading checks the shape chain against
// `expected_sizes` when it is non-empty.
nlohmann::json to_json(const MlpParams& params);
MlpParams mlp_from_json(const nlohmann::json& j, const std::vector<int>& expected_sizes = {});
void save_checkpoint(const MlpParams& params, const std::filesystem::path& path);
MlpParams load_checkpoint(const std::filesystem::path& path, const std::vector<int>& expected_sizes = {});

}  // namespace ariadne::nn
