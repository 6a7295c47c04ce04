// include/ariadne/pref_align.hpp
// Three-stage training of a small per-pixel segmentation policy: soft-Dice
// pretraining, preference pairs mined from topology violations, DPO against
// a frozen reference, and hard-sample fine-tuning with Dice + BCE.
//
// The policy reads a (2r+1)^2 intensity patch around each pixel and emits one
// logit; the mask likelihood is the product of independent per-pixel
// Bernoullis, which makes the DPO objective exact and cheap to differentiate.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ariadne/raster.hpp"
#include "ariadne/tiny_nn.hpp"

namespace ariadne::pref {

struct SegSample {
    GrayImage image;
    BinaryMask mask;
};

struct PixelPolicy {
    int radius = 2;
    nn::MlpParams net;

    // [patch, hidden..., 1], He init.
    static PixelPolicy create(int radius, const std::vector<int>& hidden, std::uint64_t seed);
    // Radius recovered from the input width; ShapeError unless it is an odd square with one output.
    static PixelPolicy from_net(nn::MlpParams net);

    int feature_length() const noexcept { return (2 * radius + 1) * (2 * radius + 1); }
    void validate() const;

    friend bool operator==(const PixelPolicy&, const PixelPolicy&) = default;
};

// Patch features for the listed pixel indices (one column each); edge pixels
// replicate the border. Intensities are centred on 0.5.
nn::Matrix patch_features(const GrayImage& image, int radius, const std::vector<std::size_t>& pixels);
nn::Matrix patch_features(const GrayImage& image, int radius);

// Row-major logits, one per pixel.
std::vector<double> logit_map(const PixelPolicy& policy, const GrayImage& image);
BinaryMask predict_mask(const PixelPolicy& policy, const GrayImage& image);  // sigmoid(z) > 0.5

double mask_log_likelihood(const std::vector<double>& logits, const BinaryMask& mask);
double mask_log_likelihood(const PixelPolicy& policy, const GrayImage& image, const BinaryMask& mask);

// Losses over a logit map. When `dlogits` is given it receives dLoss/dz.
// Soft Dice is 1 - 2 sum(p y) / (sum p + sum y); an empty prediction on an
// empty mask scores 0.
double soft_dice_loss(const std::vector<double>& logits, const BinaryMask& mask, std::vector<double>* dlogits = nullptr);
// Summed binary cross-entropy.
double bce_loss(const std::vector<double>& logits, const BinaryMask& mask, std::vector<double>* dlogits = nullptr);
double hsft_loss(const std::vector<double>& logits, const BinaryMask& mask, double lambda,
                 std::vector<double>* dlogits = nullptr);

enum class PairSource { Mined, Synthetic };

struct PreferencePair {
    std::size_t case_index = 0;
    BinaryMask winner;  // y_w
    BinaryMask loser;   // y_l
    double dice_loser = 0.0;
    int beta0_winner = 0;
    int beta0_loser = 0;
    PairSource source = PairSource::Mined;
};

struct Stage1Config {
    double lr = 5e-4;
    int epochs = 30;

    friend bool operator==(const Stage1Config&, const Stage1Config&) = default;
};

struct Stage2Config {
    double lr = 1e-6;
    double beta = 0.1;
    int epochs = 10;

    friend bool operator==(const Stage2Config&, const Stage2Config&) = default;
};

struct Stage3Config {
    double lambda = 0.5;
    double tau_hard = 0.75;
    double lr = 5e-4;
    int epochs = 10;

    friend bool operator==(const Stage3Config&, const Stage3Config&) = default;
};

struct MiningConfig {
    double dice_min = 0.8;
    int synthetic_per_case = 1;  // alternating fragment / spurious blob
    int gap_px = 2;
    int n_cuts = 1;
    int n_blobs = 1;

    friend bool operator==(const MiningConfig&, const MiningConfig&) = default;
};

struct StageConfig {
    int patch_radius = 2;
    std::vector<int> hidden = {16};
    Stage1Config stage1;
    MiningConfig mining;
    Stage2Config stage2;
    Stage3Config stage3;

    friend bool operator==(const StageConfig&, const StageConfig&) = default;
};

void validate(const StageConfig& cfg);
nlohmann::json to_json(const StageConfig& cfg);
StageConfig stage_config_from_json(const nlohmann::json& j);

struct TrainLog {
    std::vector<double> epoch_loss;  // mean per-sample loss seen during each epoch
    std::vector<std::string> notices;
};

// Mean soft-Dice loss over the samples.
double mean_soft_dice_loss(const PixelPolicy& policy, const std::vector<SegSample>& samples);
// Mean hard Dice of predict_mask against the masks.
double mean_dice(const PixelPolicy& policy, const std::vector<SegSample>& samples);

// One Adam step per sample per epoch, sample order reshuffled each epoch from
// `seed`. NumericError on a non-finite loss or gradient.
PixelPolicy stage1_train(PixelPolicy policy, const std::vector<SegSample>& samples, const Stage1Config& cfg,
                         std::uint64_t seed, TrainLog* log = nullptr);

// Mined pairs (threshold at 0.5, keep dice > dice_min and more components than
// the ground truth), then synthetic degradations of every connected ground
// truth. Pairs come back ordered by (case, mined first).
std::vector<PreferencePair> mine_pairs(const PixelPolicy& policy, const std::vector<SegSample>& samples,
                                       const MiningConfig& cfg, std::uint64_t seed);

struct DpoResult {
    double loss = 0.0;
    double margin = 0.0;  // log-ratio margin inside the sigmoid, before beta
    nn::MlpParams grad;   // d loss / d theta
};

DpoResult dpo_loss(const PixelPolicy& policy, const PixelPolicy& reference, const GrayImage& image,
                   const PreferencePair& pair, double beta);

// log pi(y_w | x) - log pi(y_l | x)
double preference_margin(const PixelPolicy& policy, const GrayImage& image, const PreferencePair& pair);

// The incoming policy becomes the frozen reference. Pairs are visited in
// index order, one Adam step each.
PixelPolicy stage2_train(PixelPolicy policy, const std::vector<SegSample>& samples,
                         const std::vector<PreferencePair>& pairs, const Stage2Config& cfg, TrainLog* log = nullptr);

struct HsftResult {
    PixelPolicy policy;
    std::vector<std::size_t> hard_cases;
    double hard_fraction = 0.0;
    TrainLog log;
};

// Fine-tunes on samples whose Dice is below tau_hard; an empty hard set is a
// no-op recorded in the log.
HsftResult stage3_hsft(PixelPolicy policy, const std::vector<SegSample>& samples, const Stage3Config& cfg,
                       std::uint64_t seed);

void save_policy(const PixelPolicy& policy, const std::filesystem::path& path);
PixelPolicy load_policy(const std::filesystem::path& path);

}  // namespace ariadne::pref
