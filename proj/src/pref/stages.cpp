// src/pref/stages.cpp
#include <cmath>
#include <numeric>

#include "ariadne/json_fields.hpp"
#include "ariadne/parallel.hpp"
#include "ariadne/pref_align.hpp"
#include "ariadne/rng.hpp"
#include "ariadne/seg_metrics.hpp"
#include "ariadne/synth_angio.hpp"
#include "ariadne/topology.hpp"
#include "pref_internal.hpp"

namespace ariadne::pref {
namespace {

void require_samples(const std::vector<SegSample>& samples, const char* who) {
    if (samples.empty()) throw DataError(std::string(who) + ": no training samples");
    for (const auto& s : samples) require_same_shape(s.image, s.mask, who);
}

void check_finite(double v, const char* who) {
    if (!std::isfinite(v)) throw NumericError(std::string(who) + ": non-finite loss");
}

std::vector<std::size_t> iota(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
}

// Per-sample Adam epochs on a logit-map loss.
template <class Loss>
PixelPolicy fit(PixelPolicy policy, const std::vector<SegSample>& samples, const std::vector<std::size_t>& subset,
                int epochs, double lr, std::uint64_t seed, const char* who, TrainLog* log, Loss&& loss_fn) {
    auto adam = nn::AdamState::for_params(policy.net, {lr, 0.9, 0.999, 1e-8});
    Rng rng(seed);
    std::vector<double> dz;
    for (int e = 0; e < epochs; ++e) {
        auto order = subset;
        shuffle(order, rng);
        double total = 0.0;
        for (std::size_t i : order) {
            const auto& s = samples[i];
            const double l = loss_fn(logit_map(policy, s.image), s.mask, &dz);
            check_finite(l, who);
            total += l;
            adam_step(policy.net, detail::image_gradient(policy, s.image, dz), adam);
        }
        if (log) log->epoch_loss.push_back(order.empty() ? 0.0 : total / static_cast<double>(order.size()));
    }
    return policy;
}

// log pi(y_w) - log pi(y_l) from one logit map. Pixels where the masks agree
// cancel, and log sigmoid(z) - log sigmoid(-z) = z, so the margin is a signed
// sum of logits. Subtracting two full likelihoods instead loses ~1e-14 to
// cancellation on a 128 x 128 image.
double margin_from_logits(const std::vector<double>& z, const PreferencePair& pair) {
    double m = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i)
        if (pair.winner[i] != pair.loser[i]) m += pair.winner[i] ? z[i] : -z[i];
    return m;
}

DpoResult dpo_from_terms(const PixelPolicy& policy, const GrayImage& image, const PreferencePair& pair,
                         double ref_margin, double beta) {
    require_same_shape(image, pair.winner, "dpo_loss");
    require_same_shape(image, pair.loser, "dpo_loss");
    const double m = margin_from_logits(logit_map(policy, image), pair) - ref_margin;
    DpoResult r;
    r.margin = m;
    r.loss = nn::softplus(-beta * m);  // -log sigmoid(beta m)
    // d loss / d z_i = -beta sigmoid(-beta m) (y_w - y_l)_i; the sigmoid terms of
    // the two likelihoods cancel, so only disagreeing pixels carry gradient.
    const double c = -beta * nn::sigmoid(-beta * m);
    std::vector<double> dz(image.size(), 0.0);
    for (std::size_t i = 0; i < dz.size(); ++i) dz[i] = c * (static_cast<double>(pair.winner[i]) - pair.loser[i]);
    r.grad = detail::image_gradient(policy, image, dz);
    return r;
}

}  // namespace

void validate(const StageConfig& cfg) {
    if (cfg.patch_radius < 0 || cfg.patch_radius > 8) throw ConfigError("seg.patch_radius must be in [0, 8]");
    for (int h : cfg.hidden)
        if (h <= 0) throw ConfigError("seg.hidden sizes must be positive");
    if (!(cfg.stage1.lr > 0) || cfg.stage1.epochs < 0) throw ConfigError("seg.stage1: lr > 0 and epochs >= 0 required");
    if (!(cfg.stage2.lr > 0) || cfg.stage2.epochs < 0) throw ConfigError("seg.stage2: lr > 0 and epochs >= 0 required");
    if (!(cfg.stage2.beta > 0)) throw ConfigError("seg.stage2.beta must be > 0");
    if (!(cfg.stage3.lambda >= 0)) throw ConfigError("seg.stage3.lambda must be >= 0");
    if (!(cfg.stage3.tau_hard > 0 && cfg.stage3.tau_hard < 1)) throw ConfigError("seg.stage3.tau_hard must be in (0, 1)");
    if (!(cfg.stage3.lr > 0) || cfg.stage3.epochs < 0) throw ConfigError("seg.stage3: lr > 0 and epochs >= 0 required");
    if (!(cfg.mining.dice_min >= 0 && cfg.mining.dice_min < 1)) throw ConfigError("seg.mining.dice_min must be in [0, 1)");
    if (cfg.mining.synthetic_per_case < 0 || cfg.mining.gap_px < 1 || cfg.mining.n_cuts < 1 || cfg.mining.n_blobs < 1)
        throw ConfigError("seg.mining: counts out of range");
}

nlohmann::json to_json(const StageConfig& c) {
    return {
        {"patch_radius", c.patch_radius},
        {"hidden", c.hidden},
        {"stage1", {{"lr", c.stage1.lr}, {"epochs", c.stage1.epochs}}},
        {"mining",
         {{"dice_min", c.mining.dice_min},
          {"synthetic_per_case", c.mining.synthetic_per_case},
          {"gap_px", c.mining.gap_px},
          {"n_cuts", c.mining.n_cuts},
          {"n_blobs", c.mining.n_blobs}}},
        {"stage2", {{"lr", c.stage2.lr}, {"beta", c.stage2.beta}, {"epochs", c.stage2.epochs}}},
        {"stage3",
         {{"lambda", c.stage3.lambda}, {"tau_hard", c.stage3.tau_hard}, {"lr", c.stage3.lr}, {"epochs", c.stage3.epochs}}},
    };
}

StageConfig stage_config_from_json(const nlohmann::json& j) {
    StageConfig c;
    FieldReader r(j, "seg");
    r.read("patch_radius", c.patch_radius)
        .section("hidden",
                 [&](const nlohmann::json& h) {
                     if (!h.is_array()) throw ConfigError("seg.hidden: expected an array of sizes");
                     c.hidden.clear();
                     for (const auto& v : h) {
                         if (!v.is_number_integer()) throw ConfigError("seg.hidden: sizes must be integers");
                         c.hidden.push_back(v.get<int>());
                     }
                 })
        .section("stage1",
                 [&](const nlohmann::json& s) {
                     FieldReader(s, "seg.stage1").read("lr", c.stage1.lr).read("epochs", c.stage1.epochs).finish();
                 })
        .section("mining",
                 [&](const nlohmann::json& s) {
                     FieldReader(s, "seg.mining")
                         .read("dice_min", c.mining.dice_min)
                         .read("synthetic_per_case", c.mining.synthetic_per_case)
                         .read("gap_px", c.mining.gap_px)
                         .read("n_cuts", c.mining.n_cuts)
                         .read("n_blobs", c.mining.n_blobs)
                         .finish();
                 })
        .section("stage2",
                 [&](const nlohmann::json& s) {
                     FieldReader(s, "seg.stage2")
                         .read("lr", c.stage2.lr)
                         .read("beta", c.stage2.beta)
                         .read("epochs", c.stage2.epochs)
                         .finish();
                 })
        .section("stage3", [&](const nlohmann::json& s) {
            FieldReader(s, "seg.stage3")
                .read("lambda", c.stage3.lambda)
                .read("tau_hard", c.stage3.tau_hard)
                .read("lr", c.stage3.lr)
                .read("epochs", c.stage3.epochs)
                .finish();
        });
    r.finish();
    validate(c);
    return c;
}

double mean_soft_dice_loss(const PixelPolicy& policy, const std::vector<SegSample>& samples) {
    if (samples.empty()) return 0.0;
    double s = 0.0;
    for (const auto& c : samples) s += soft_dice_loss(logit_map(policy, c.image), c.mask);
    return s / static_cast<double>(samples.size());
}

double mean_dice(const PixelPolicy& policy, const std::vector<SegSample>& samples) {
    if (samples.empty()) return 0.0;
    double s = 0.0;
    for (const auto& c : samples) s += dice(predict_mask(policy, c.image), c.mask);
    return s / static_cast<double>(samples.size());
}

PixelPolicy stage1_train(PixelPolicy policy, const std::vector<SegSample>& samples, const Stage1Config& cfg,
                         std::uint64_t seed, TrainLog* log) {
    require_samples(samples, "stage1");
    policy.validate();
    return fit(std::move(policy), samples, iota(samples.size()), cfg.epochs, cfg.lr, derive_seed(seed, "pref.stage1"),
               "stage1", log, [](const std::vector<double>& z, const BinaryMask& y, std::vector<double>* dz) {
                   return soft_dice_loss(z, y, dz);
               });
}

std::vector<PreferencePair> mine_pairs(const PixelPolicy& policy, const std::vector<SegSample>& samples,
                                       const MiningConfig& cfg, std::uint64_t seed) {
    std::vector<std::vector<PreferencePair>> per_case(samples.size());
    parallel::for_each_task(static_cast<std::ptrdiff_t>(samples.size()), [&](std::ptrdiff_t ci) {
        const auto i = static_cast<std::size_t>(ci);
        const auto& s = samples[i];
        require_same_shape(s.image, s.mask, "mine_pairs");
        const int b_gt = betti0(s.mask);
        if (b_gt != 1) return;  // the winner must be a single tree
        auto consider = [&](BinaryMask loser, PairSource src) {
            const double d = dice(loser, s.mask);
            const int b_l = betti0(loser);
            if (d > cfg.dice_min && b_l > b_gt)
                per_case[i].push_back({i, s.mask, std::move(loser), d, b_gt, b_l, src});
        };
        consider(predict_mask(policy, s.image), PairSource::Mined);
        for (int k = 0; k < cfg.synthetic_per_case; ++k) {
            const std::uint64_t ds = derive_seed(derive_seed(seed, "pref.mine", i), "pair", static_cast<std::uint64_t>(k));
            const auto spec = (i + static_cast<std::size_t>(k)) % 2 == 0
                                  ? DegradeSpec::fragment(cfg.gap_px, cfg.n_cuts, ds)
                                  : DegradeSpec::spurious_blob(cfg.n_blobs, ds);
            try {
                consider(degrade(s.mask, spec), PairSource::Synthetic);
            } catch (const DataError&) {
                // no room for this degradation on this mask
            }
        }
    });
    std::vector<PreferencePair> out;
    for (auto& v : per_case)
        for (auto& p : v) out.push_back(std::move(p));
    return out;
}

double preference_margin(const PixelPolicy& policy, const GrayImage& image, const PreferencePair& pair) {
    require_same_shape(image, pair.winner, "preference_margin");
    require_same_shape(image, pair.loser, "preference_margin");
    return margin_from_logits(logit_map(policy, image), pair);
}

DpoResult dpo_loss(const PixelPolicy& policy, const PixelPolicy& reference, const GrayImage& image,
                   const PreferencePair& pair, double beta) {
    if (!(beta > 0)) throw ConfigError("dpo_loss: beta must be > 0");
    return dpo_from_terms(policy, image, pair, preference_margin(reference, image, pair), beta);
}

PixelPolicy stage2_train(PixelPolicy policy, const std::vector<SegSample>& samples,
                         const std::vector<PreferencePair>& pairs, const Stage2Config& cfg, TrainLog* log) {
    policy.validate();
    if (!(cfg.beta > 0)) throw ConfigError("stage2: beta must be > 0");
    for (const auto& p : pairs)
        if (p.case_index >= samples.size()) throw DataError("stage2: pair refers to a missing case");
    if (pairs.empty() || cfg.epochs == 0) {
        if (log && pairs.empty()) log->notices.push_back("stage2: no preference pairs, policy unchanged");
        return policy;
    }
    // The reference is frozen, so its margins are computed once.
    std::vector<double> ref_margin(pairs.size());
    parallel::for_each_task(static_cast<std::ptrdiff_t>(pairs.size()), [&](std::ptrdiff_t k) {
        const auto& p = pairs[static_cast<std::size_t>(k)];
        ref_margin[static_cast<std::size_t>(k)] = preference_margin(policy, samples[p.case_index].image, p);
    });
    auto adam = nn::AdamState::for_params(policy.net, {cfg.lr, 0.9, 0.999, 1e-8});
    for (int e = 0; e < cfg.epochs; ++e) {
        double total = 0.0;
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            const auto& p = pairs[k];
            auto r = dpo_from_terms(policy, samples[p.case_index].image, p, ref_margin[k], cfg.beta);
            check_finite(r.loss, "stage2");
            total += r.loss;
            adam_step(policy.net, r.grad, adam);
        }
        if (log) log->epoch_loss.push_back(total / static_cast<double>(pairs.size()));
    }
    return policy;
}

HsftResult stage3_hsft(PixelPolicy policy, const std::vector<SegSample>& samples, const Stage3Config& cfg,
                       std::uint64_t seed) {
    require_samples(samples, "stage3");
    policy.validate();
    if (!(cfg.tau_hard > 0 && cfg.tau_hard < 1)) throw ConfigError("stage3: tau_hard must be in (0, 1)");
    if (!(cfg.lambda >= 0)) throw ConfigError("stage3: lambda must be >= 0");
    HsftResult res;
    std::vector<double> d(samples.size());
    parallel::for_each_task(static_cast<std::ptrdiff_t>(samples.size()), [&](std::ptrdiff_t i) {
        const auto& s = samples[static_cast<std::size_t>(i)];
        d[static_cast<std::size_t>(i)] = dice(predict_mask(policy, s.image), s.mask);
    });
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (d[i] < cfg.tau_hard) res.hard_cases.push_back(i);
    res.hard_fraction = static_cast<double>(res.hard_cases.size()) / static_cast<double>(samples.size());
    if (res.hard_cases.empty()) {
        res.log.notices.push_back("stage3: no sample below tau_hard, policy unchanged");
        res.policy = std::move(policy);
        return res;
    }
    const double lambda = cfg.lambda;
    res.policy = fit(std::move(policy), samples, res.hard_cases, cfg.epochs, cfg.lr, derive_seed(seed, "pref.stage3"),
                     "stage3", &res.log, [lambda](const std::vector<double>& z, const BinaryMask& y, std::vector<double>* dz) {
                         return hsft_loss(z, y, lambda, dz);
                     });
    return res;
}

}  // namespace ariadne::pref
