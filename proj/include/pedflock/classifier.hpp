#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "pedflock/pairfeat.hpp"

namespace pedflock {

/// Identity of a within-bin pair, pid_a < pid_b.
struct PairKey {
    int bin_index = 0;
    Pid pid_a = 0;
    Pid pid_b = 0;

    auto operator<=>(const PairKey&) const = default;
};

/// One feature row, as produced by the features stage.
struct PairRecord {
    PairKey key;
    PairFeatures features;
};

struct LabeledPair {
    PairKey key;
    PairFeatures features;
    int label = 0;  // 1 = same group
};

struct Standardizer {
    std::array<double, 6> means{};
    std::array<double, 6> stds{};  // floored at 1e-9
};

/// Per-feature mean/std over the given set only.
Standardizer fit_standardizer(std::span<const LabeledPair> train);

std::array<double, 6> standardize(const PairFeatures& f, const Standardizer& s);

struct ModelMetadata {
    double rate_hz = 0.0;
    std::size_t seq_len = 0;
    std::string dtw_convention = "accumulated_euclidean";
    std::uint64_t seed = 0;
};

/// Standardized logistic pair scorer. Stand-in for heavier sequence models;
/// externally produced scores can be imported instead.
struct PairScoreModel {
    std::array<double, 6> weights{};
    double bias = 0.0;
    Standardizer standardizer;
    ModelMetadata metadata;
};

struct PairScore {
    int bin_index = 0;
    Pid pid_a = 0;
    Pid pid_b = 0;
    double probability = 0.0;
};

/// Positives: every within-bin pair present in annotation_pairs. Negatives:
/// an equal count sampled uniformly (seeded) from the remaining within-bin
/// pairs. The combined set is shuffled with the same seed. Throws when no
/// positive exists.
std::vector<LabeledPair> build_training_set(std::span<const PairRecord> candidates,
                                            const std::set<PidPair>& annotation_pairs,
                                            std::uint64_t seed,
                                            std::vector<std::string>* warnings = nullptr);

/// Seeded shuffle then stratified split; per-class counts off by at most one.
std::pair<std::vector<LabeledPair>, std::vector<LabeledPair>> split_train_test(
    std::span<const LabeledPair> pairs, double ratio, std::uint64_t seed);

/// The default learning rate is calibrated to the plain-GD trainer on
/// standardized features (stability bound ~1.3); the pair-model literature's
/// 1e-3 pairs with adaptive optimizers and stalls far from the confident
/// scores the 0.9 edge threshold needs.
struct TrainOptions {
    double learning_rate = 0.5;
    int max_epochs = 1000;
    int patience = 25;
    double min_delta = 1e-6;
    double validation_fraction = 0.10;
    std::uint64_t seed = 0;
};

struct TrainReport {
    int epochs_run = 0;
    bool stopped_early = false;
    double initial_train_loss = 0.0;
    double final_train_loss = 0.0;
    double best_validation_loss = 0.0;
    std::size_t n_fit = 0;
    std::size_t n_validation = 0;
};

struct TrainOutcome {
    PairScoreModel model;
    TrainReport report;
};

/// Full-batch gradient descent on mean cross-entropy, zero-initialized,
/// early stopping on a seeded 10% validation carve-out of train (skipped when
/// the carve-out would be smaller than 4 samples); returns the
/// best-validation-loss weights. Throws when train holds a single class.
TrainOutcome train_logistic(std::span<const LabeledPair> train, const TrainOptions& options,
                            const ModelMetadata& metadata);

/// Mean cross-entropy loss and its gradient, shared with the training loop.
double logistic_loss(std::span<const std::array<double, 6>> x, std::span<const int> y,
                     const std::array<double, 6>& w, double b);
void logistic_gradient(std::span<const std::array<double, 6>> x, std::span<const int> y,
                       const std::array<double, 6>& w, double b,
                       std::array<double, 6>& grad_w, double& grad_b);

/// sigmoid(w . standardize(f) + b). Throws on non-finite features.
double predict_prob(const PairScoreModel& model, const PairFeatures& f);

std::vector<PairScore> score_pairs(const PairScoreModel& model,
                                   std::span<const PairRecord> records);

struct EvalMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool precision_defined = true;
    bool recall_defined = true;
};

/// Metrics at decision threshold 0.5; p = 0.5 counts as the negative class.
/// Undefined ratios are reported as 0 with the matching flag cleared.
EvalMetrics evaluate(const PairScoreModel& model, std::span<const LabeledPair> test);

/// Keep scores with probability >= tau, pid order canonicalized.
std::vector<PairScore> threshold_pairs(std::span<const PairScore> scores, double tau);

/// CSV rows: bin_index, pid_a, pid_b, probability. Rows with probability
/// outside [0,1] are rejected with a warning.
std::vector<PairScore> import_external_scores(std::istream& in,
                                              std::vector<std::string>* warnings = nullptr);

}  // namespace pedflock
