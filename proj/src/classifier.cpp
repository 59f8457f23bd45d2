#include "pedflock/classifier.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <stdexcept>

#include "pedflock/rng.hpp"

namespace pedflock {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Clamp away from 0/1 so the cross-entropy stays finite.
double safe_prob(double p) { return std::clamp(p, 1e-12, 1.0 - 1e-12); }

}  // namespace

Standardizer fit_standardizer(std::span<const LabeledPair> train) {
    if (train.empty()) throw std::invalid_argument("fit_standardizer: empty training set");
    Standardizer s;
    const double n = static_cast<double>(train.size());
    for (const auto& lp : train) {
        auto x = lp.features.as_array();
        for (std::size_t k = 0; k < 6; ++k) s.means[k] += x[k];
    }
    for (auto& m : s.means) m /= n;
    for (const auto& lp : train) {
        auto x = lp.features.as_array();
        for (std::size_t k = 0; k < 6; ++k) {
            double d = x[k] - s.means[k];
            s.stds[k] += d * d;
        }
    }
    for (auto& v : s.stds) v = std::max(std::sqrt(v / n), 1e-9);
    return s;
}

std::array<double, 6> standardize(const PairFeatures& f, const Standardizer& s) {
    auto x = f.as_array();
    for (std::size_t k = 0; k < 6; ++k) x[k] = (x[k] - s.means[k]) / s.stds[k];
    return x;
}

std::vector<LabeledPair> build_training_set(std::span<const PairRecord> candidates,
                                            const std::set<PidPair>& annotation_pairs,
                                            std::uint64_t seed,
                                            std::vector<std::string>* warnings) {
    std::vector<LabeledPair> positives;
    std::vector<const PairRecord*> negative_pool;
    for (const auto& rec : candidates) {
        if (annotation_pairs.contains({rec.key.pid_a, rec.key.pid_b})) {
            positives.push_back({rec.key, rec.features, 1});
        } else {
            negative_pool.push_back(&rec);
        }
    }
    if (positives.empty())
        throw std::runtime_error("build_training_set: no annotated pair found in any bin");

    std::size_t n_neg = positives.size();
    if (negative_pool.size() < n_neg) {
        if (warnings)
            warnings->push_back("only " + std::to_string(negative_pool.size()) +
                                " negative candidates for " + std::to_string(positives.size()) +
                                " positives; the dataset is not fully balanced");
        n_neg = negative_pool.size();
    }

    std::mt19937_64 neg_rng(derive_seed(seed, "train-negatives"));
    auto picks = sample_without_replacement(negative_pool.size(), n_neg, neg_rng);
    std::sort(picks.begin(), picks.end());  // canonical order before the final shuffle

    std::vector<LabeledPair> out = std::move(positives);
    out.reserve(out.size() + n_neg);
    for (std::size_t idx : picks) {
        out.push_back({negative_pool[idx]->key, negative_pool[idx]->features, 0});
    }

    std::mt19937_64 shuffle_rng(derive_seed(seed, "train-shuffle"));
    seeded_shuffle(out, shuffle_rng);
    return out;
}

std::pair<std::vector<LabeledPair>, std::vector<LabeledPair>> split_train_test(
    std::span<const LabeledPair> pairs, double ratio, std::uint64_t seed) {
    if (ratio <= 0.0 || ratio >= 1.0)
        throw std::invalid_argument("split_train_test: ratio must be in (0,1)");

    std::vector<LabeledPair> shuffled(pairs.begin(), pairs.end());
    std::mt19937_64 rng(derive_seed(seed, "split-shuffle"));
    seeded_shuffle(shuffled, rng);

    const std::size_t n = shuffled.size();
    const std::size_t n_train = static_cast<std::size_t>(std::llround(ratio * n));
    std::size_t class_count[2] = {0, 0};
    for (const auto& lp : shuffled) ++class_count[lp.label];

    // Largest-remainder allocation of train slots across the two classes.
    std::size_t quota[2];
    double exact[2];
    std::size_t base_total = 0;
    for (int c = 0; c < 2; ++c) {
        exact[c] = n ? static_cast<double>(n_train) * class_count[c] / n : 0.0;
        quota[c] = static_cast<std::size_t>(exact[c]);
        base_total += quota[c];
    }
    for (std::size_t leftover = n_train - base_total; leftover > 0; --leftover) {
        int pick = (exact[0] - std::floor(exact[0])) >= (exact[1] - std::floor(exact[1])) ? 0 : 1;
        if (quota[pick] >= class_count[pick]) pick = 1 - pick;
        ++quota[pick];
        exact[pick] = std::floor(exact[pick]);  // consume this class's remainder
    }

    std::pair<std::vector<LabeledPair>, std::vector<LabeledPair>> out;
    for (const auto& lp : shuffled) {
        if (quota[lp.label] > 0) {
            --quota[lp.label];
            out.first.push_back(lp);
        } else {
            out.second.push_back(lp);
        }
    }
    return out;
}

double logistic_loss(std::span<const std::array<double, 6>> x, std::span<const int> y,
                     const std::array<double, 6>& w, double b) {
    double loss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double z = b;
        for (std::size_t k = 0; k < 6; ++k) z += w[k] * x[i][k];
        double p = safe_prob(sigmoid(z));
        loss += y[i] ? -std::log(p) : -std::log(1.0 - p);
    }
    return loss / static_cast<double>(x.size());
}

void logistic_gradient(std::span<const std::array<double, 6>> x, std::span<const int> y,
                       const std::array<double, 6>& w, double b,
                       std::array<double, 6>& grad_w, double& grad_b) {
    grad_w.fill(0.0);
    grad_b = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double z = b;
        for (std::size_t k = 0; k < 6; ++k) z += w[k] * x[i][k];
        double err = sigmoid(z) - static_cast<double>(y[i]);
        for (std::size_t k = 0; k < 6; ++k) grad_w[k] += err * x[i][k];
        grad_b += err;
    }
    const double inv_n = 1.0 / static_cast<double>(x.size());
    for (auto& g : grad_w) g *= inv_n;
    grad_b *= inv_n;
}

TrainOutcome train_logistic(std::span<const LabeledPair> train, const TrainOptions& options,
                            const ModelMetadata& metadata) {
    if (train.empty()) throw std::invalid_argument("train_logistic: empty training set");
    bool has_pos = false, has_neg = false;
    for (const auto& lp : train) (lp.label ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
        throw std::runtime_error("train_logistic: training set holds a single class");

    TrainOutcome out;
    out.model.standardizer = fit_standardizer(train);
    out.model.metadata = metadata;
    out.model.metadata.seed = options.seed;

    const std::size_t n = train.size();
    std::vector<std::array<double, 6>> xs(n);
    std::vector<int> ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = standardize(train[i].features, out.model.standardizer);
        ys[i] = train[i].label;
    }

    // Seeded validation carve-out. Early stopping needs a carve-out large
    // enough to be meaningful and a fit subset that keeps both classes;
    // otherwise train on everything for the full epoch budget.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng(derive_seed(options.seed, "validation-split"));
    seeded_shuffle(order, rng);
    std::size_t n_val = static_cast<std::size_t>(options.validation_fraction * n);
    constexpr std::size_t kMinValidation = 4;

    std::vector<std::array<double, 6>> fit_x, val_x;
    std::vector<int> fit_y, val_y;
    for (std::size_t i = 0; i < n; ++i) {
        if (i < n_val) {
            val_x.push_back(xs[order[i]]);
            val_y.push_back(ys[order[i]]);
        } else {
            fit_x.push_back(xs[order[i]]);
            fit_y.push_back(ys[order[i]]);
        }
    }
    bool fit_has[2] = {false, false};
    for (int y : fit_y) fit_has[y] = true;
    if (n_val < kMinValidation || !fit_has[0] || !fit_has[1]) {
        fit_x = xs;
        fit_y = ys;
        val_x.clear();
        val_y.clear();
        n_val = 0;
    }
    out.report.n_fit = fit_x.size();
    out.report.n_validation = n_val;

    std::array<double, 6> w{};
    double b = 0.0;
    std::array<double, 6> best_w = w;
    double best_b = b;
    double best_val = std::numeric_limits<double>::infinity();
    int stale = 0;

    out.report.initial_train_loss = logistic_loss(fit_x, fit_y, w, b);

    std::array<double, 6> gw;
    double gb;
    for (int epoch = 1; epoch <= options.max_epochs; ++epoch) {
        logistic_gradient(fit_x, fit_y, w, b, gw, gb);
        for (std::size_t k = 0; k < 6; ++k) w[k] -= options.learning_rate * gw[k];
        b -= options.learning_rate * gb;
        out.report.epochs_run = epoch;

        if (n_val == 0) {
            best_w = w;
            best_b = b;
            continue;
        }
        double val = logistic_loss(val_x, val_y, w, b);
        if (val < best_val - options.min_delta) {
            best_val = val;
            best_w = w;
            best_b = b;
            stale = 0;
        } else if (++stale >= options.patience) {
            out.report.stopped_early = true;
            break;
        }
    }

    out.model.weights = best_w;
    out.model.bias = best_b;
    out.report.best_validation_loss = n_val ? best_val : 0.0;
    out.report.final_train_loss = logistic_loss(fit_x, fit_y, best_w, best_b);
    return out;
}

double predict_prob(const PairScoreModel& model, const PairFeatures& f) {
    for (double v : f.as_array()) {
        if (!std::isfinite(v)) throw std::invalid_argument("predict_prob: non-finite feature");
    }
    auto x = standardize(f, model.standardizer);
    double z = model.bias;
    for (std::size_t k = 0; k < 6; ++k) z += model.weights[k] * x[k];
    return sigmoid(z);
}

std::vector<PairScore> score_pairs(const PairScoreModel& model,
                                   std::span<const PairRecord> records) {
    std::vector<PairScore> out;
    out.reserve(records.size());
    for (const auto& rec : records) {
        out.push_back({rec.key.bin_index, rec.key.pid_a, rec.key.pid_b,
                       predict_prob(model, rec.features)});
    }
    return out;
}

EvalMetrics evaluate(const PairScoreModel& model, std::span<const LabeledPair> test) {
    if (test.empty()) throw std::invalid_argument("evaluate: empty test set");
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (const auto& lp : test) {
        bool predicted = predict_prob(model, lp.features) > 0.5;
        if (predicted && lp.label) ++tp;
        else if (predicted) ++fp;
        else if (lp.label) ++fn;
        else ++tn;
    }
    EvalMetrics m;
    m.accuracy = static_cast<double>(tp + tn) / test.size();
    m.precision_defined = tp + fp > 0;
    m.recall_defined = tp + fn > 0;
    m.precision = m.precision_defined ? static_cast<double>(tp) / (tp + fp) : 0.0;
    m.recall = m.recall_defined ? static_cast<double>(tp) / (tp + fn) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

std::vector<PairScore> threshold_pairs(std::span<const PairScore> scores, double tau) {
    if (tau < 0.0 || tau > 1.0)
        throw std::invalid_argument("threshold_pairs: tau must be in [0,1]");
    std::vector<PairScore> out;
    for (const auto& s : scores) {
        if (s.probability >= tau) {
            PairScore kept = s;
            if (kept.pid_a > kept.pid_b) std::swap(kept.pid_a, kept.pid_b);
            out.push_back(kept);
        }
    }
    return out;
}

std::vector<PairScore> import_external_scores(std::istream& in,
                                              std::vector<std::string>* warnings) {
    if (!in.good()) throw std::runtime_error("score stream is not readable");
    std::vector<PairScore> out;
    std::string line;
    std::size_t lineno = 0;
    bool first_data_line = true;
    while (std::getline(in, line)) {
        ++lineno;
        bool blank = true;
        for (char c : line)
            if (!std::isspace(static_cast<unsigned char>(c))) { blank = false; break; }
        if (blank || line[0] == '#') continue;

        double vals[4];
        std::size_t start = 0, field = 0;
        bool ok = true;
        while (field < 4 && ok) {
            std::size_t end = line.find(',', start);
            std::string_view tok(line.data() + start,
                                 (end == std::string::npos ? line.size() : end) - start);
            while (!tok.empty() && (tok.back() == '\r' || tok.back() == ' ')) tok.remove_suffix(1);
            while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
            auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), vals[field]);
            ok = ec == std::errc{} && p == tok.data() + tok.size();
            ++field;
            if (end == std::string::npos) break;
            start = end + 1;
        }
        ok = ok && field == 4;
        if (ok && first_data_line) first_data_line = false;
        else if (!ok && first_data_line) { first_data_line = false; continue; }  // header

        if (!ok) {
            if (warnings)
                warnings->push_back("scores line " + std::to_string(lineno) + " rejected: malformed");
            continue;
        }
        if (vals[3] < 0.0 || vals[3] > 1.0 || !std::isfinite(vals[3])) {
            if (warnings)
                warnings->push_back("scores line " + std::to_string(lineno) +
                                    " rejected: probability outside [0,1]");
            continue;
        }
        PairScore s;
        s.bin_index = static_cast<int>(std::llround(vals[0]));
        s.pid_a = static_cast<Pid>(std::llround(vals[1]));
        s.pid_b = static_cast<Pid>(std::llround(vals[2]));
        if (s.pid_a > s.pid_b) std::swap(s.pid_a, s.pid_b);
        s.probability = vals[3];
        out.push_back(s);
    }
    if (in.bad()) throw std::runtime_error("score stream failed mid-read");
    return out;
}

}  // namespace pedflock
