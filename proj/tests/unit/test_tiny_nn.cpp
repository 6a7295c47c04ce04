#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "ariadne/raster.hpp"
#include "ariadne/rng.hpp"
#include "ariadne/tiny_nn.hpp"

using namespace ariadne;
using namespace ariadne::nn;

namespace {

double rel_err(double a, double b) {
    const double scale = std::abs(a) + std::abs(b);
    return scale < 1e-8 ? 0.0 : std::abs(a - b) / scale;
}

Matrix random_matrix(Rng& rng, int r, int c, double lo = -1.0, double hi = 1.0) {
    Matrix m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = rng.uniform(lo, hi);
    return m;
}

}  // namespace

TEST_CASE("forward: trivial networks") {
    auto z = MlpParams::zeros({4, 6, 3});
    Vector x = Vector::Constant(4, 2.5);
    auto r = forward(z, x);
    CHECK(r.logits.isZero());
    auto p = softmax(r.logits);
    for (int i = 0; i < 3; ++i) CHECK(p(i) == doctest::Approx(1.0 / 3.0));

    auto id = MlpParams::zeros({1, 1});
    id.W[0](0, 0) = 1.0;
    for (double v : {-3.0, 0.0, 7.25}) CHECK(forward(id, Vector::Constant(1, v)).logits(0) == v);
}

TEST_CASE("forward: hand-computed 2-2-2 chain") {
    auto p = MlpParams::zeros({2, 2, 2});
    p.W[0] << 1.0, -2.0, 0.5, 0.5;
    p.b[0] << 0.25, -1.0;
    p.W[1] << 2.0, 1.0, -1.0, 3.0;
    p.b[1] << 0.0, 0.5;
    Vector x(2);
    x << 1.0, 0.5;
    // hidden pre = [1 - 1 + 0.25, 0.5 + 0.25 - 1] = [0.25, -0.25] -> relu [0.25, 0]
    // logits = [0.5, -0.25 + 0.5]
    auto r = forward(p, x);
    CHECK(r.logits(0) == doctest::Approx(0.5));
    CHECK(r.logits(1) == doctest::Approx(0.25));
}

TEST_CASE("forward/backward: shape errors") {
    auto p = MlpParams::zeros({3, 2});
    CHECK_THROWS_AS(forward(p, Vector::Zero(4)), ShapeError);
    ForwardCache cache;
    forward_batch(p, Matrix::Zero(3, 5), &cache);
    CHECK_THROWS_AS(backward(p, cache, Matrix::Zero(2, 4)), ShapeError);
    CHECK_THROWS_AS(MlpParams::zeros({3}), ShapeError);
    CHECK_THROWS_AS(MlpParams::zeros({3, 0, 2}), ShapeError);
}

TEST_CASE("backward: zero upstream gives zero gradient") {
    auto p = MlpParams::he_uniform({5, 7, 3}, 4);
    ForwardCache cache;
    Rng rng(1);
    forward_batch(p, random_matrix(rng, 5, 6), &cache);
    auto g = backward(p, cache, Matrix::Zero(3, 6));
    for (double v : g.flat()) CHECK(v == 0.0);
}

TEST_CASE("backward: matches central finite differences") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        const std::vector<int> sizes = seed % 2 ? std::vector<int>{3, 5, 4, 2} : std::vector<int>{6, 8, 3};
        auto p = MlpParams::he_uniform(sizes, seed);
        for (auto& b : p.b) b = Vector::NullaryExpr(b.size(), [&] { return rng.uniform(-0.3, 0.3); });
        const int batch = 1 + static_cast<int>(rng.below(4));
        const Matrix X = random_matrix(rng, sizes.front(), batch);
        const Matrix C = random_matrix(rng, sizes.back(), batch);
        auto loss = [&](const MlpParams& q) { return (forward_batch(q, X).array() * C.array()).sum(); };

        ForwardCache cache;
        forward_batch(p, X, &cache);
        const auto analytic = backward(p, cache, C).flat();
        auto theta = p.flat();
        const double h = 1e-5;
        double worst = 0.0;
        for (std::size_t k = 0; k < theta.size(); ++k) {
            auto plus = p, minus = p;
            auto tp = theta, tm = theta;
            tp[k] += h;
            tm[k] -= h;
            plus.assign_flat(tp);
            minus.assign_flat(tm);
            const double numeric = (loss(plus) - loss(minus)) / (2 * h);
            worst = std::max(worst, rel_err(analytic[k], numeric));
        }
        CHECK(worst <= 1e-4);
    }
}

TEST_CASE("backward: dead ReLU unit passes no gradient") {
    auto p = MlpParams::he_uniform({3, 4, 2}, 9);
    p.b[0](2) = -1e6;  // unit 2 never fires
    Rng rng(3);
    ForwardCache cache;
    forward_batch(p, random_matrix(rng, 3, 5), &cache);
    auto g = backward(p, cache, random_matrix(rng, 2, 5));
    CHECK(g.W[0].row(2).isZero());
    CHECK(g.b[0](2) == 0.0);
    CHECK(g.W[1].col(2).isZero());
}

TEST_CASE("he_uniform: seeded, bounded, zero biases") {
    auto a = MlpParams::he_uniform({16, 256, 128, 64, 4}, 42);
    auto b = MlpParams::he_uniform({16, 256, 128, 64, 4}, 42);
    auto c = MlpParams::he_uniform({16, 256, 128, 64, 4}, 43);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    CHECK(a.parameter_count() == 16 * 256 + 256 + 256 * 128 + 128 + 128 * 64 + 64 + 64 * 4 + 4);
    for (int l = 0; l < a.layers(); ++l) {
        CHECK(a.W[l].cwiseAbs().maxCoeff() <= std::sqrt(6.0 / a.sizes[l]));
        CHECK(a.b[l].isZero());
    }
    auto small = MlpParams::he_uniform({4, 8, 2}, 1, 0.01);
    CHECK(small.W[1].cwiseAbs().maxCoeff() <= 0.01 * std::sqrt(6.0 / 8));
}

TEST_CASE("adam: closed-form steps") {
    auto p = MlpParams::zeros({1, 1});
    auto g = p.zeros_like();
    auto st = AdamState::for_params(p, {0.1, 0.9, 0.999, 1e-8});
    adam_step(p, g, st);
    CHECK(p.W[0](0, 0) == 0.0);
    CHECK(st.step == 1);

    p = MlpParams::zeros({1, 1});
    st = AdamState::for_params(p, {0.1, 0.9, 0.999, 1e-8});
    g.W[0](0, 0) = 1.0;
    adam_step(p, g, st);
    // m_hat = 1, v_hat = 1
    CHECK(p.W[0](0, 0) == doctest::Approx(-0.1 / (1.0 + 1e-8)).epsilon(1e-14));
    adam_step(p, g, st);
    // a constant gradient keeps m_hat = g and v_hat = g^2, so two steps move twice as far
    CHECK(p.W[0](0, 0) == doctest::Approx(-0.2 / (1.0 + 1e-8)).epsilon(1e-12));
    CHECK(p.b[0](0) == 0.0);

    // scripted oracle for a changing gradient
    p = MlpParams::zeros({1, 1});
    st = AdamState::for_params(p, {0.05, 0.8, 0.9, 1e-8});
    double m = 0, v = 0, w = 0;
    for (int t = 1; t <= 5; ++t) {
        const double gt = 0.3 * t - 1.0;
        g.W[0](0, 0) = gt;
        adam_step(p, g, st);
        m = 0.8 * m + 0.2 * gt;
        v = 0.9 * v + 0.1 * gt * gt;
        w -= 0.05 * (m / (1 - std::pow(0.8, t))) / (std::sqrt(v / (1 - std::pow(0.9, t))) + 1e-8);
        CHECK(p.W[0](0, 0) == doctest::Approx(w).epsilon(1e-12));
    }
}

TEST_CASE("adam: non-finite gradient aborts without touching params") {
    auto p = MlpParams::he_uniform({2, 3, 1}, 5);
    const auto before = p;
    auto g = p.zeros_like();
    g.b[1](0) = std::nan("");
    auto st = AdamState::for_params(p, {});
    CHECK_THROWS_AS(adam_step(p, g, st), NumericError);
    CHECK(p == before);
    CHECK_THROWS_AS(AdamState::for_params(p, {-1.0, 0.9, 0.999, 1e-8}), ConfigError);
    auto other = MlpParams::zeros({2, 2, 1});
    CHECK_THROWS_AS(adam_step(p, other, st), ShapeError);
}

TEST_CASE("categorical head") {
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        Vector z(4);
        for (int i = 0; i < 4; ++i) z(i) = rng.uniform(-5.0, 5.0);
        CHECK(softmax(z).sum() == doctest::Approx(1.0));
        const int a = static_cast<int>(rng.below(4));
        const Vector g = log_prob_grad(z, a);
        const Vector ge = entropy_grad(z);
        for (int i = 0; i < 4; ++i) {
            Vector zp = z, zm = z;
            zp(i) += 1e-6;
            zm(i) -= 1e-6;
            CHECK(std::abs(g(i) - (log_softmax(zp)(a) - log_softmax(zm)(a)) / 2e-6) < 1e-7);
            CHECK(std::abs(ge(i) - (categorical_entropy(zp) - categorical_entropy(zm)) / 2e-6) < 1e-7);
        }
    }
    Vector big(3);
    big << 1000.0, 0.0, -1000.0;
    CHECK(std::isfinite(log_softmax(big)(2)));
    CHECK(categorical_entropy(Vector::Zero(4)) == doctest::Approx(std::log(4.0)));
    Vector tie(3);
    tie << 1.0, 2.0, 2.0;
    CHECK(argmax(tie) == 1);
}

TEST_CASE("bernoulli head") {
    CHECK(bernoulli_log_prob(0.0, 1.0) == doctest::Approx(std::log(0.5)));
    CHECK(bernoulli_log_prob(0.0, 0.0) == doctest::Approx(std::log(0.5)));
    CHECK(bernoulli_log_prob(40.0, 1.0) > -1e-15);
    CHECK(std::isfinite(bernoulli_log_prob(-1000.0, 1.0)));
    CHECK(bernoulli_log_prob(-1000.0, 1.0) == doctest::Approx(-1000.0));
    CHECK(sigmoid(-800.0) >= 0.0);
    CHECK(sigmoid(3.0) + sigmoid(-3.0) == doctest::Approx(1.0));
    CHECK(softplus(800.0) == doctest::Approx(800.0));
    for (double z : {-4.0, -0.3, 0.0, 1.7, 6.0})
        for (double y : {0.0, 1.0}) {
            const double numeric = (bernoulli_log_prob(z + 1e-6, y) - bernoulli_log_prob(z - 1e-6, y)) / 2e-6;
            CHECK(bernoulli_log_prob_grad(z, y) == doctest::Approx(numeric).epsilon(1e-6));
        }
}

TEST_CASE("checkpoint roundtrip and rejection") {
    auto p = MlpParams::he_uniform({16, 32, 8, 4}, 77);
    p.b[1](3) = 1.0 / 3.0;
    auto back = mlp_from_json(to_json(p));
    CHECK(back == p);

    const auto path = std::filesystem::temp_directory_path() / "ariadne_ckpt_test.json";
    save_checkpoint(p, path);
    CHECK(load_checkpoint(path, {16, 32, 8, 4}) == p);
    CHECK_THROWS_AS(load_checkpoint(path, {16, 32, 8, 3}), ShapeError);

    auto j = to_json(p);
    j["layers"][1]["bias"].erase(0);
    CHECK_THROWS_AS(mlp_from_json(j), ShapeError);
    j = to_json(p);
    j["version"] = 9;
    CHECK_THROWS_AS(mlp_from_json(j), DataError);
    j = to_json(p);
    j["sizes"] = {16, 32, 8};
    CHECK_THROWS_AS(mlp_from_json(j), ShapeError);
    const std::string junk = "{\"format\": ";
    write_file_bytes(path, {reinterpret_cast<const std::uint8_t*>(junk.data()), junk.size()});
    CHECK_THROWS_AS(load_checkpoint(path), ParseError);
    std::filesystem::remove(path);
}
