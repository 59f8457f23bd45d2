#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "pedflock/classifier.hpp"

using namespace pedflock;

namespace {

PairFeatures features_1d(double v) {
    PairFeatures f;
    f.mean_inter_distance_mm = v;
    f.start_time_diff_s = 1.0;  // constant columns standardize to zero
    f.mean_speed_diff_mm_s = 1.0;
    f.motion_angle_diff_rad = 1.0;
    f.facing_angle_diff_rad = 1.0;
    f.dtw_distance_mm = 1.0;
    return f;
}

// Separable toy set: positives at -1, negatives at +1, n of each.
std::vector<LabeledPair> separable_toy(std::size_t n_per_class) {
    std::vector<LabeledPair> out;
    for (std::size_t i = 0; i < n_per_class; ++i) {
        out.push_back({{0, static_cast<Pid>(2 * i), static_cast<Pid>(2 * i + 1)},
                       features_1d(-1.0), 1});
        out.push_back({{1, static_cast<Pid>(2 * i), static_cast<Pid>(2 * i + 1)},
                       features_1d(1.0), 0});
    }
    return out;
}

std::vector<PairRecord> candidate_grid(std::size_t n) {
    std::vector<PairRecord> out;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> v(0.0, 10000.0);
    for (std::size_t i = 0; i < n; ++i) {
        PairRecord rec;
        rec.key = {static_cast<int>(i % 5), static_cast<Pid>(2 * i), static_cast<Pid>(2 * i + 1)};
        rec.features = features_1d(v(rng));
        out.push_back(rec);
    }
    return out;
}

}  // namespace

TEST_CASE("build_training_set: balance, determinism, zero-positive error") {
    auto candidates = candidate_grid(100);
    std::set<PidPair> annotated;
    for (std::size_t i = 0; i < 10; ++i)
        annotated.insert({static_cast<Pid>(2 * i), static_cast<Pid>(2 * i + 1)});

    auto set1 = build_training_set(candidates, annotated, 77);
    CHECK(set1.size() == 20);
    std::size_t pos = 0;
    for (const auto& lp : set1) pos += lp.label;
    CHECK(pos == 10);

    auto set2 = build_training_set(candidates, annotated, 77);
    REQUIRE(set2.size() == set1.size());
    for (std::size_t i = 0; i < set1.size(); ++i) {
        CHECK(set1[i].key == set2[i].key);
        CHECK(set1[i].label == set2[i].label);
    }

    auto set3 = build_training_set(candidates, annotated, 78);
    bool differs = false;
    for (std::size_t i = 0; i < set1.size(); ++i)
        if (!(set1[i].key == set3[i].key)) differs = true;
    CHECK(differs);  // different seed reshuffles

    CHECK_THROWS(build_training_set(candidates, std::set<PidPair>{}, 1));
}

TEST_CASE("split_train_test: stratified 80:20 and edge cases") {
    auto pairs = separable_toy(10);  // 20 samples, 10 per class
    auto [train, test] = split_train_test(pairs, 0.8, 42);
    CHECK(train.size() == 16);
    CHECK(test.size() == 4);
    std::size_t train_pos = 0, test_pos = 0;
    for (const auto& lp : train) train_pos += lp.label;
    for (const auto& lp : test) test_pos += lp.label;
    CHECK(train_pos == 8);
    CHECK(test_pos == 2);

    // Two samples, ratio one-half: one each side.
    std::vector<LabeledPair> two{{{0, 1, 2}, features_1d(0.0), 1},
                                 {{0, 3, 4}, features_1d(1.0), 0}};
    auto [t2, s2] = split_train_test(two, 0.5, 7);
    CHECK(t2.size() == 1);
    CHECK(s2.size() == 1);

    // Same seed reproduces the split exactly.
    auto [ta, sa] = split_train_test(pairs, 0.8, 42);
    REQUIRE(ta.size() == train.size());
    for (std::size_t i = 0; i < ta.size(); ++i) CHECK(ta[i].key == train[i].key);
}

TEST_CASE("fit_standardizer: degenerate column floored, train stats standardize to z-scores") {
    auto pairs = separable_toy(50);
    Standardizer s = fit_standardizer(pairs);
    // Constant columns: std floored, standardized value 0.
    CHECK(s.stds[1] == doctest::Approx(1e-9));
    CHECK(standardize(pairs[0].features, s)[1] == doctest::Approx(0.0));

    // Standardized first column has mean ~0 and std ~1.
    double mean = 0.0, var = 0.0;
    for (const auto& lp : pairs) mean += standardize(lp.features, s)[0];
    mean /= static_cast<double>(pairs.size());
    for (const auto& lp : pairs) {
        double z = standardize(lp.features, s)[0] - mean;
        var += z * z;
    }
    var /= static_cast<double>(pairs.size());
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("logistic gradient matches central finite differences") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unit(-2.0, 2.0);
    std::vector<std::array<double, 6>> xs;
    std::vector<int> ys;
    for (int i = 0; i < 40; ++i) {
        std::array<double, 6> x;
        for (auto& v : x) v = unit(rng);
        xs.push_back(x);
        ys.push_back(i % 2);
    }
    for (int trial = 0; trial < 50; ++trial) {
        std::array<double, 6> w;
        for (auto& v : w) v = unit(rng);
        double b = unit(rng);

        std::array<double, 6> gw;
        double gb;
        logistic_gradient(xs, ys, w, b, gw, gb);
        auto fd = oracles::finite_difference_gradient(
            [&](const std::array<double, 6>& ww, double bb) {
                return logistic_loss(xs, ys, ww, bb);
            },
            w, b);
        for (std::size_t k = 0; k < 6; ++k)
            CHECK(gw[k] == doctest::Approx(fd[k]).epsilon(1e-6));
        CHECK(gb == doctest::Approx(fd[6]).epsilon(1e-6));
    }
}

TEST_CASE("train_logistic: zero-weight start scores 0.5; separable set reaches accuracy 1") {
    auto toy = separable_toy(100);
    TrainOptions options;
    options.learning_rate = 0.001;  // the published pair-training rate
    options.seed = 5;

    {
        PairScoreModel fresh;
        fresh.standardizer = fit_standardizer(toy);
        CHECK(predict_prob(fresh, toy[0].features) == doctest::Approx(0.5));
    }

    TrainOutcome outcome = train_logistic(toy, options, {});
    CHECK(outcome.report.epochs_run <= 1000);
    CHECK(outcome.report.final_train_loss <= outcome.report.initial_train_loss);

    EvalMetrics m = evaluate(outcome.model, toy);
    CHECK(m.accuracy == doctest::Approx(1.0));

    CHECK_THROWS(train_logistic(std::vector<LabeledPair>(10, toy[0]), options, {}));
}

TEST_CASE("train_logistic is deterministic bit for bit") {
    auto toy = separable_toy(40);
    TrainOptions options;
    options.seed = 123;
    auto a = train_logistic(toy, options, {});
    auto b = train_logistic(toy, options, {});
    for (std::size_t k = 0; k < 6; ++k) CHECK(a.model.weights[k] == b.model.weights[k]);
    CHECK(a.model.bias == b.model.bias);
}

TEST_CASE("predict_prob: saturation and monotone response to a negative weight") {
    PairScoreModel model;
    model.standardizer.means.fill(0.0);
    model.standardizer.stds.fill(1.0);
    model.bias = 20.0;
    CHECK(predict_prob(model, features_1d(0.0)) >= 0.999999);

    auto toy = separable_toy(100);
    TrainOptions options;
    options.seed = 5;
    auto trained = train_logistic(toy, options, {});
    // Feature 0 separates the classes with positives low: weight negative,
    // so decreasing the feature strictly increases the probability.
    CHECK(trained.model.weights[0] < 0.0);
    double hi = predict_prob(trained.model, features_1d(0.5));
    double lo = predict_prob(trained.model, features_1d(-0.5));
    CHECK(lo > hi);

    PairFeatures nan_f = features_1d(std::nan(""));
    CHECK_THROWS(predict_prob(trained.model, nan_f));
}

TEST_CASE("training loss is non-increasing on the convex objective") {
    auto toy = separable_toy(60);
    TrainOptions options;
    options.seed = 9;
    options.max_epochs = 200;
    TrainOutcome outcome = train_logistic(toy, options, {});
    CHECK(outcome.report.final_train_loss <= outcome.report.initial_train_loss);
}

TEST_CASE("evaluate: all-correct toy, constant-0.5 model ties to label 0") {
    auto toy = separable_toy(10);
    PairScoreModel constant;  // zero weights
    constant.standardizer = fit_standardizer(toy);
    EvalMetrics m = evaluate(constant, toy);
    CHECK(m.accuracy == doctest::Approx(0.5));  // all predicted 0 on balanced set
    CHECK(m.recall == doctest::Approx(0.0));
    CHECK_FALSE(m.precision_defined);
}

TEST_CASE("threshold_pairs: inclusive boundary, tau extremes, monotone subset") {
    std::vector<PairScore> scores{{0, 1, 2, 0.95}, {0, 3, 4, 0.9}, {0, 5, 6, 0.89}};
    auto kept = threshold_pairs(scores, 0.9);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].probability == doctest::Approx(0.95));
    CHECK(kept[1].probability == doctest::Approx(0.9));

    CHECK(threshold_pairs(scores, 0.0).size() == 3);
    CHECK(threshold_pairs(scores, 1.0).empty());

    std::vector<PairScore> ones{{0, 1, 2, 1.0}};
    CHECK(threshold_pairs(ones, 1.0).size() == 1);

    // Monotone: raising tau keeps a subset.
    auto loose = threshold_pairs(scores, 0.5);
    auto tight = threshold_pairs(scores, 0.92);
    for (const auto& t : tight) {
        bool found = false;
        for (const auto& l : loose)
            if (l.pid_a == t.pid_a && l.pid_b == t.pid_b) found = true;
        CHECK(found);
    }
}

TEST_CASE("import_external_scores: accept, canonicalize, reject out-of-range") {
    std::istringstream in(
        "bin_index,pid_a,pid_b,probability\n"
        "3,10,12,0.97\n"
        "3,12,10,0.97\n"
        "3,1,2,1.3\n");
    std::vector<std::string> warnings;
    auto scores = import_external_scores(in, &warnings);
    REQUIRE(scores.size() == 2);
    CHECK(scores[0].pid_a == 10);
    CHECK(scores[0].pid_b == 12);
    CHECK(scores[1].pid_a == 10);  // canonicalized
    CHECK(scores[1].pid_b == 12);
    REQUIRE(warnings.size() == 1);
}
