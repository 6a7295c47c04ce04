#include <doctest.h>

#include <chrono>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "ariadne/steno_env.hpp"

using namespace ariadne;
using namespace ariadne::env;

namespace {

CenterlinePath straight_path(int n) {
    std::vector<Pixel> pts;
    for (int i = 0; i < n; ++i) pts.push_back({i + 10, 20});
    return CenterlinePath::from_points(pts);
}

RadiusProfile profile_from(std::vector<double> r) {
    const auto path = straight_path(static_cast<int>(r.size()));
    return build_profile(path, std::move(r), 1);
}

nn::MlpParams fixed_action_policy(Action a, int window = kDefaultWindow) {
    auto p = nn::MlpParams::zeros({state_size(window), 8, kNumActions});
    p.b.back()(static_cast<int>(a)) = 100.0;
    return p;
}

}  // namespace

TEST_CASE("build_state: layout, padding, normalization") {
    auto flat = profile_from(std::vector<double>(30, 4.0));
    auto s = build_state(flat, 12);
    REQUIRE(s.size() == 16);
    for (int k = 0; k < 7; ++k) {
        CHECK(s(k) == doctest::Approx(1.0));
        CHECK(s(7 + k) == 0.0);
    }
    CHECK(s(14) == 0.0);
    CHECK(s(15) == 0.0);
    CHECK(state_size(5) == 24);
    CHECK(build_state(flat, 0, 5).size() == 24);

    std::vector<double> ramp(20);
    for (int i = 0; i < 20; ++i) ramp[static_cast<std::size_t>(i)] = 1.0 + 0.5 * i;
    auto p = profile_from(ramp);
    const double mean = p.mean;
    auto s0 = build_state(p, 0);
    // indices -3..3 clamp to 0,0,0,0,1,2,3
    const int idx[7] = {0, 0, 0, 0, 1, 2, 3};
    for (int k = 0; k < 7; ++k) {
        CHECK(s0(k) == doctest::Approx(p.r[static_cast<std::size_t>(idx[k])] / mean));
        CHECK(s0(7 + k) == p.grad[static_cast<std::size_t>(idx[k])]);
    }
    CHECK(s0(0) == s0(3));
    CHECK(s0(14) == p.z[0]);
    CHECK(s0(15) == p.curv[0]);
    auto s_end = build_state(p, 19);
    CHECK(s_end(3) == s_end(6));

    CHECK_THROWS_AS(build_state(p, 20), DataError);
    CHECK_THROWS_AS(build_state(p, -1), DataError);
}

TEST_CASE("step: reward table over actions and distances") {
    auto prof = profile_from(std::vector<double>(60, 3.0));
    const Pixel at = prof.path.points[30];
    const double deltas[] = {0.0, 74.0, 75.0, 76.0, 300.0};
    for (double d : deltas) {
        EpisodeSpec spec;
        spec.profile = &prof;
        spec.start = 30;
        spec.ground_truth = {{static_cast<double>(at.x), at.y + d}};
        CHECK(distance_to_truth(spec, 30) == d);
        const bool within = d <= 75.0;

        auto c = step(spec, {30, 0}, Action::Confirm);
        CHECK(c.done);
        CHECK(c.reward == (within ? 50.0 : -10.0));
        CHECK(c.outcome == (within ? Outcome::TruePositive : Outcome::FalsePositive));

        auto r = step(spec, {30, 0}, Action::Reject);
        CHECK(r.done);
        CHECK(r.reward == (within ? -50.0 : 10.0));
        CHECK(r.outcome == (within ? Outcome::FalseNegative : Outcome::TrueNegative));

        auto l = step(spec, {30, 0}, Action::Left);
        CHECK_FALSE(l.done);
        CHECK(l.reward == -1.0);
        CHECK(l.next == EnvPosition{27, 1});
        CHECK(l.outcome == Outcome::Move);
        auto rt = step(spec, {30, 0}, Action::Right);
        CHECK(rt.next == EnvPosition{33, 1});
        CHECK(rt.reward == -1.0);
    }
}

TEST_CASE("step: spec examples, clamping, timeout, errors") {
    auto prof = profile_from(std::vector<double>(40, 3.0));
    EpisodeSpec spec;
    spec.profile = &prof;
    const Pixel p10 = prof.path.points[10];
    spec.ground_truth = {{p10.x + 6.0, p10.y + 8.0}};  // 10 px away
    CHECK(step(spec, {10, 0}, Action::Confirm).reward == 50.0);
    spec.ground_truth = {{p10.x + 120.0, p10.y + 160.0}};  // 200 px away
    CHECK(step(spec, {10, 0}, Action::Reject).reward == 10.0);

    CHECK(step(spec, {1, 0}, Action::Left).next.index == 0);
    CHECK(step(spec, {38, 0}, Action::Right).next.index == 39);

    spec.max_steps = 5;
    auto last = step(spec, {20, 4}, Action::Left);
    CHECK(last.done);
    CHECK(last.outcome == Outcome::Timeout);
    CHECK(last.reward == -1.0);
    CHECK(step(spec, {20, 4}, Action::Reject).outcome == Outcome::TrueNegative);
    CHECK_FALSE(step(spec, {20, 3}, Action::Left).done);

    spec.ground_truth.clear();
    CHECK(step(spec, {20, 0}, Action::Confirm).outcome == Outcome::FalsePositive);
    CHECK(step(spec, {20, 0}, Action::Reject).outcome == Outcome::TrueNegative);

    CHECK_THROWS_AS(action_from_code(4), DataError);
    CHECK_THROWS_AS(action_from_code(-1), DataError);
    CHECK(action_from_code(2) == Action::Confirm);
    CHECK_THROWS_AS(step(spec, {20, 0}, static_cast<Action>(7)), DataError);
    CHECK_THROWS_AS(step(spec, {40, 0}, Action::Left), DataError);
}

TEST_CASE("run_episode: fixed policies") {
    auto prof = profile_from(std::vector<double>(80, 3.0));
    EpisodeSpec spec;
    spec.profile = &prof;
    spec.start = 40;
    const Pixel p = prof.path.points[40];
    spec.ground_truth = {{static_cast<double>(p.x), static_cast<double>(p.y)}};
    Rng rng(1);

    auto confirm = run_episode(spec, fixed_action_policy(Action::Confirm), rng);
    CHECK(confirm.steps.size() == 1);
    CHECK(confirm.total_reward == 50.0);
    CHECK(confirm.outcome == Outcome::TruePositive);

    auto left = run_episode(spec, fixed_action_policy(Action::Left), rng);
    CHECK(left.steps.size() == 50);
    CHECK(left.total_reward == -50.0);
    CHECK(left.outcome == Outcome::Timeout);
    CHECK(left.final_position.index == 0);
    CHECK(left.steps.back().done);

    CHECK_THROWS_AS(run_episode(spec, nn::MlpParams::zeros({24, 4}), rng), ShapeError);
    CHECK_THROWS_AS(run_episode(spec, nn::MlpParams::zeros({16, 3}), rng), ShapeError);
    spec.start = 80;
    CHECK_THROWS_AS(run_episode(spec, fixed_action_policy(Action::Left), rng), DataError);
}

TEST_CASE("run_episode: determinism and Markov replay") {
    std::vector<double> r(90);
    for (int i = 0; i < 90; ++i) r[static_cast<std::size_t>(i)] = 3.0 + std::sin(i * 0.2);
    auto prof = profile_from(r);
    EpisodeSpec spec;
    spec.profile = &prof;
    spec.start = 45;
    spec.ground_truth = {{60.0, 20.0}};
    const auto policy = nn::MlpParams::he_uniform({16, 16, 4}, 3, 0.01);

    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Rng a(seed), b(seed);
        const auto e1 = run_episode(spec, policy, a);
        const auto e2 = run_episode(spec, policy, b);
        REQUIRE(e1.steps.size() == e2.steps.size());
        for (std::size_t k = 0; k < e1.steps.size(); ++k) {
            CHECK(e1.steps[k].action == e2.steps[k].action);
            CHECK(e1.steps[k].position == e2.steps[k].position);
        }
        // replay every transition from its recorded position
        for (std::size_t k = 0; k < e1.steps.size(); ++k) {
            const auto& tr = e1.steps[k];
            const auto res = step(spec, tr.position, tr.action);
            CHECK(res.reward == tr.reward);
            CHECK(res.done == tr.done);
            const auto next = k + 1 < e1.steps.size() ? e1.steps[k + 1].position : e1.final_position;
            CHECK(res.next == next);
            CHECK(tr.state == build_state(prof, tr.position.index));
            CHECK(tr.log_prob == doctest::Approx(nn::log_softmax(nn::forward(policy, tr.state).logits)(
                                     static_cast<int>(tr.action))));
        }
        double total = 0.0;
        for (const auto& tr : e1.steps) total += tr.reward;
        CHECK(total == e1.total_reward);
    }

    Rng g1(5), g2(99);
    const auto greedy1 = run_episode(spec, policy, g1, true);
    const auto greedy2 = run_episode(spec, policy, g2, true);
    REQUIRE(greedy1.steps.size() == greedy2.steps.size());
    for (std::size_t k = 0; k < greedy1.steps.size(); ++k) CHECK(greedy1.steps[k].action == greedy2.steps[k].action);
}

TEST_CASE("state build plus forward stays under 50 ms per candidate") {
    std::vector<double> r(200);
    for (int i = 0; i < 200; ++i) r[static_cast<std::size_t>(i)] = 4.0 + std::cos(i * 0.1);
    auto prof = profile_from(r);
    const auto policy = nn::MlpParams::he_uniform({16, 256, 128, 64, 4}, 1);
    const int reps = 500;
    double sink = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) sink += nn::forward(policy, build_state(prof, i % 200)).logits(0);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count() / reps;
    CHECK(std::isfinite(sink));
    CHECK(ms < 50.0);
}

TEST_CASE("trace export: one JSON object per step") {
    auto prof = profile_from(std::vector<double>(30, 3.0));
    EpisodeSpec spec;
    spec.profile = &prof;
    spec.start = 15;
    spec.max_steps = 4;
    Rng rng(0);
    const auto ep = run_episode(spec, fixed_action_policy(Action::Right), rng);
    std::ostringstream out;
    write_trace(spec, ep, out);
    std::istringstream in(out.str());
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j["action"] == "right");
        CHECK(j["y"] == 20);
        ++n;
        if (n == 4) CHECK(j["outcome"] == "timeout");
    }
    CHECK(n == 4);
}
