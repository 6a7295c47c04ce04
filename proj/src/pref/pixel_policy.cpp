// src/pref/pixel_policy.cpp
#include <algorithm>
#include <cmath>

#include "ariadne/parallel.hpp"
#include "ariadne/pref_align.hpp"
#include "pref_internal.hpp"

namespace ariadne::pref {

PixelPolicy PixelPolicy::create(int radius, const std::vector<int>& hidden, std::uint64_t seed) {
    if (radius < 0 || radius > 8) throw ConfigError("pixel policy: patch radius must be in [0, 8]");
    std::vector<int> sizes{(2 * radius + 1) * (2 * radius + 1)};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(1);
    PixelPolicy p;
    p.radius = radius;
    p.net = nn::MlpParams::he_uniform(std::move(sizes), seed);
    return p;
}

PixelPolicy PixelPolicy::from_net(nn::MlpParams net) {
    net.validate();
    const int f = net.input_size();
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(f))));
    if (side * side != f || side % 2 == 0) throw ShapeError("pixel policy: input width is not an odd square patch");
    if (net.output_size() != 1) throw ShapeError("pixel policy: network must emit one logit");
    PixelPolicy p;
    p.radius = (side - 1) / 2;
    p.net = std::move(net);
    return p;
}

void PixelPolicy::validate() const {
    net.validate();
    if (net.input_size() != feature_length()) throw ShapeError("pixel policy: feature length does not match network input");
    if (net.output_size() != 1) throw ShapeError("pixel policy: network must emit one logit");
}

nn::Matrix patch_features(const GrayImage& image, int radius, const std::vector<std::size_t>& pixels) {
    const int side = 2 * radius + 1;
    const int w = image.width(), h = image.height();
    nn::Matrix f(side * side, static_cast<Eigen::Index>(pixels.size()));
    for (std::size_t k = 0; k < pixels.size(); ++k) {
        const int x = static_cast<int>(pixels[k] % static_cast<std::size_t>(w));
        const int y = static_cast<int>(pixels[k] / static_cast<std::size_t>(w));
        int row = 0;
        for (int dy = -radius; dy <= radius; ++dy) {
            const int yy = std::clamp(y + dy, 0, h - 1);
            for (int dx = -radius; dx <= radius; ++dx) {
                const int xx = std::clamp(x + dx, 0, w - 1);
                f(row++, static_cast<Eigen::Index>(k)) = image.at(xx, yy) - 0.5;
            }
        }
    }
    return f;
}

nn::Matrix patch_features(const GrayImage& image, int radius) {
    std::vector<std::size_t> all(image.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return patch_features(image, radius, all);
}

namespace detail {

std::vector<std::size_t> chunk_pixels(std::size_t n, std::size_t c) {
    std::vector<std::size_t> idx;
    const std::size_t begin = c * kPixelChunk, end = std::min(n, begin + kPixelChunk);
    idx.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) idx.push_back(i);
    return idx;
}

nn::MlpParams image_gradient(const PixelPolicy& policy, const GrayImage& image, const std::vector<double>& dlogits) {
    // Only pixels with a non-zero upstream gradient contribute.
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < dlogits.size(); ++i)
        if (dlogits[i] != 0.0) active.push_back(i);
    const std::size_t n_chunks = (active.size() + kPixelChunk - 1) / kPixelChunk;
    std::vector<nn::MlpParams> partial(n_chunks);
    parallel::for_each_index(static_cast<std::ptrdiff_t>(n_chunks), [&](std::ptrdiff_t c) {
        const std::size_t begin = static_cast<std::size_t>(c) * kPixelChunk;
        const std::size_t end = std::min(active.size(), begin + kPixelChunk);
        std::vector<std::size_t> idx(active.begin() + static_cast<std::ptrdiff_t>(begin),
                                     active.begin() + static_cast<std::ptrdiff_t>(end));
        nn::ForwardCache cache;
        nn::forward_batch(policy.net, patch_features(image, policy.radius, idx), &cache);
        nn::Matrix up(1, static_cast<Eigen::Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) up(0, static_cast<Eigen::Index>(k)) = dlogits[idx[k]];
        partial[static_cast<std::size_t>(c)] = nn::backward(policy.net, cache, up);
    });
    nn::MlpParams g = policy.net.zeros_like();
    for (const auto& p : partial) g.axpy(1.0, p);  // fixed chunk order
    return g;
}

}  // namespace detail

std::vector<double> logit_map(const PixelPolicy& policy, const GrayImage& image) {
    policy.validate();
    const std::size_t n = image.size();
    std::vector<double> out(n);
    const std::size_t n_chunks = (n + detail::kPixelChunk - 1) / detail::kPixelChunk;
    parallel::for_each_index(static_cast<std::ptrdiff_t>(n_chunks), [&](std::ptrdiff_t c) {
        const auto idx = detail::chunk_pixels(n, static_cast<std::size_t>(c));
        const nn::Matrix z = nn::forward_batch(policy.net, patch_features(image, policy.radius, idx));
        for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = z(0, static_cast<Eigen::Index>(k));
    });
    return out;
}

BinaryMask predict_mask(const PixelPolicy& policy, const GrayImage& image) {
    const auto z = logit_map(policy, image);
    BinaryMask m(image.width(), image.height());
    for (std::size_t i = 0; i < z.size(); ++i) m[i] = z[i] > 0.0 ? 1 : 0;
    return m;
}

double mask_log_likelihood(const std::vector<double>& logits, const BinaryMask& mask) {
    if (logits.size() != mask.size()) throw ShapeError("mask_log_likelihood: logit count does not match mask");
    double s = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) s += nn::bernoulli_log_prob(logits[i], mask[i] ? 1.0 : 0.0);
    return s;
}

double mask_log_likelihood(const PixelPolicy& policy, const GrayImage& image, const BinaryMask& mask) {
    require_same_shape(image, mask, "mask_log_likelihood");
    return mask_log_likelihood(logit_map(policy, image), mask);
}

double soft_dice_loss(const std::vector<double>& logits, const BinaryMask& mask, std::vector<double>* dlogits) {
    if (logits.size() != mask.size()) throw ShapeError("soft_dice_loss: logit count does not match mask");
    const std::size_t n = logits.size();
    std::vector<double> p(n);
    double inter = 0.0, sum_p = 0.0, sum_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = nn::sigmoid(logits[i]);
        const double y = mask[i] ? 1.0 : 0.0;
        inter += p[i] * y;
        sum_p += p[i];
        sum_y += y;
    }
    const double denom = sum_p + sum_y;
    if (dlogits) dlogits->assign(n, 0.0);
    if (denom <= 0.0) return 0.0;
    if (dlogits) {
        for (std::size_t i = 0; i < n; ++i) {
            const double y = mask[i] ? 1.0 : 0.0;
            const double dp = -2.0 * (y * denom - inter) / (denom * denom);
            (*dlogits)[i] = dp * p[i] * (1.0 - p[i]);
        }
    }
    return 1.0 - 2.0 * inter / denom;
}

double bce_loss(const std::vector<double>& logits, const BinaryMask& mask, std::vector<double>* dlogits) {
    if (logits.size() != mask.size()) throw ShapeError("bce_loss: logit count does not match mask");
    if (dlogits) dlogits->assign(logits.size(), 0.0);
    double s = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double y = mask[i] ? 1.0 : 0.0;
        s -= nn::bernoulli_log_prob(logits[i], y);
        if (dlogits) (*dlogits)[i] = -nn::bernoulli_log_prob_grad(logits[i], y);
    }
    return s;
}

double hsft_loss(const std::vector<double>& logits, const BinaryMask& mask, double lambda, std::vector<double>* dlogits) {
    std::vector<double> g_dice, g_bce;
    const double l = soft_dice_loss(logits, mask, dlogits ? &g_dice : nullptr) +
                     lambda * bce_loss(logits, mask, dlogits ? &g_bce : nullptr);
    if (dlogits) {
        dlogits->resize(logits.size());
        for (std::size_t i = 0; i < logits.size(); ++i) (*dlogits)[i] = g_dice[i] + lambda * g_bce[i];
    }
    return l;
}

void save_policy(const PixelPolicy& policy, const std::filesystem::path& path) {
    policy.validate();
    nn::save_checkpoint(policy.net, path);
}

PixelPolicy load_policy(const std::filesystem::path& path) { return PixelPolicy::from_net(nn::load_checkpoint(path)); }

}  // namespace ariadne::pref
