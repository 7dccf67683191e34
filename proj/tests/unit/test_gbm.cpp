#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "squadforge/errors.hpp"
#include "squadforge/gbm.hpp"
#include "test_support.hpp"

using namespace squadforge;
using squadforge::testing::load_fixture;

namespace {

// O(n^2) pair count, ties half.
double auc_oracle(const std::vector<double>& s, const std::vector<int>& y) {
    double wins = 0.0;
    double pairs = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (y[i] != 1) continue;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[j] != 0) continue;
            pairs += 1.0;
            wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
        }
    }
    return wins / pairs;
}

FeatureMatrix column(const std::vector<double>& values) {
    FeatureMatrix x;
    for (double v : values) {
        const double row[] = {v};
        const std::uint8_t mask[] = {0};
        x.append_row(row, mask);
    }
    return x;
}

}  // namespace

TEST(Auc, MatchesPairwiseOracleWithTies) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng() % 60;
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = static_cast<double>(rng() % 7);  // heavy ties
            y[i] = static_cast<int>(rng() % 2);
        }
        y[0] = 0;
        y[1] = 1;
        EXPECT_NEAR(auc_roc(s, y), auc_oracle(s, y), 1e-12);
    }
}

TEST(Auc, SeparableIsOneAndSingleClassIsUndefined) {
    const std::vector<double> s{0.1, 0.2, 0.8, 0.9};
    const std::vector<int> y{0, 0, 1, 1};
    EXPECT_DOUBLE_EQ(auc_roc(s, y), 1.0);
    const std::vector<int> flipped{1, 1, 0, 0};
    EXPECT_DOUBLE_EQ(auc_roc(s, flipped), 0.0);
    const std::vector<int> ones{1, 1, 1, 1};
    EXPECT_THROW(auc_roc(s, ones), UndefinedMetricError);
}

TEST(Precision, CountsAtOrAboveThreshold) {
    const std::vector<double> s{0.2, 0.5, 0.7, 0.9};
    const std::vector<int> y{1, 0, 1, 1};
    EXPECT_DOUBLE_EQ(precision_at(s, y, 0.5), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(precision_at(s, y, 0.8), 1.0);
    EXPECT_THROW(precision_at(s, y, 0.95), UndefinedMetricError);
}

TEST(Fit, SingleStumpMatchesHandComputedNewtonStep) {
    const auto x = column({0, 1, 2, 3});
    const std::vector<int> y{0, 0, 1, 1};
    GbmParams p;
    p.n_trees = 1;
    p.max_depth = 1;
    p.learning_rate = 1.0;
    p.positive_class_weight = 1.0;
    const auto m = fit(x, y, {}, p);
    // Balanced labels: F0 = 0, p = 1/2, gradients -/+ 1/2, hessians 1/4.
    EXPECT_NEAR(m.base_score, 0.0, 1e-12);
    ASSERT_EQ(m.trees.size(), 1u);
    const std::uint8_t mask[] = {0};
    const double lo[] = {0.0};
    const double hi[] = {3.0};
    EXPECT_NEAR(m.raw_score(lo, mask), -2.0, 1e-9);
    EXPECT_NEAR(m.raw_score(hi, mask), 2.0, 1e-9);
    const double mid_lo[] = {1.0};
    const double mid_hi[] = {2.0};
    EXPECT_LT(m.raw_score(mid_lo, mask), 0.0);
    EXPECT_GT(m.raw_score(mid_hi, mask), 0.0);
}

TEST(Fit, BaseScoreIsWeightedLogOdds) {
    const auto x = column({0, 1, 2, 3, 4});
    const std::vector<int> y{0, 0, 0, 1, 1};
    GbmParams p;
    p.n_trees = 0;
    p.positive_class_weight = 1.0;
    EXPECT_NEAR(fit(x, y, {}, p).base_score, std::log(2.0 / 3.0), 1e-12);
    p.positive_class_weight.reset();  // auto: #neg/#pos = 1.5 balances the classes
    const auto m = fit(x, y, {}, p);
    EXPECT_NEAR(m.positive_class_weight, 1.5, 1e-12);
    EXPECT_NEAR(m.base_score, 0.0, 1e-12);
}

TEST(Fit, StagedLossNeverIncreasesOnFixtures) {
    for (const char* name : {"linear.csv", "imbalanced_missing.csv", "xor.csv"}) {
        const auto d = load_fixture(name);
        GbmParams p;
        p.n_trees = 60;
        const auto m = fit(d.x, d.y, {}, p);
        const auto loss = staged_log_loss(m, d.x, d.y, {});
        ASSERT_EQ(loss.size(), 61u);
        for (std::size_t t = 1; t < loss.size(); ++t) EXPECT_LE(loss[t], loss[t - 1] + 1e-12) << name << " tree " << t;
        EXPECT_LT(loss.back(), loss.front()) << name;
        const auto prob = predict_proba(m, d.x);
        for (double q : prob) {
            EXPECT_GE(q, kProbabilityFloor);
            EXPECT_LE(q, 1.0 - kProbabilityFloor);
        }
    }
}

TEST(Fit, LearnsSignalAndHandlesMissingValues) {
    const auto lin = load_fixture("linear.csv");
    const auto m = fit(lin.x, lin.y, {}, GbmParams{});
    EXPECT_GT(auc_roc(predict_proba(m, lin.x), lin.y), 0.85);
    const auto imb = load_fixture("imbalanced_missing.csv");
    const auto mi = fit(imb.x, imb.y, {}, GbmParams{});
    EXPECT_GT(auc_roc(predict_proba(mi, imb.x), imb.y), 0.8);
    EXPECT_NEAR(mi.positive_class_weight, 330.0 / 70.0, 1e-12);
}

TEST(Fit, DeterministicForFixedSeed) {
    const auto d = load_fixture("imbalanced_missing.csv");
    GbmParams p;
    p.subsample = 0.7;
    p.seed = 9;
    const auto a = fit(d.x, d.y, {}, p);
    const auto b = fit(d.x, d.y, {}, p);
    EXPECT_EQ(serialize(a), serialize(b));
    p.seed = 10;
    EXPECT_NE(serialize(fit(d.x, d.y, {}, p)), serialize(a));
}

TEST(Fit, DegenerateLabelsGiveConstantModel) {
    const auto x = column({1, 2, 3});
    const std::vector<int> zeros{0, 0, 0};
    const auto m = fit(x, zeros, {}, GbmParams{});
    EXPECT_TRUE(m.degenerate);
    EXPECT_TRUE(m.trees.empty());
    for (double q : predict_proba(m, x)) EXPECT_NEAR(q, kProbabilityFloor, 1e-9);
}

TEST(Fit, RejectsBadInput) {
    const auto x = column({1, 2, 3});
    const std::vector<int> y{0, 1, 2};
    EXPECT_THROW(fit(x, y, {}, GbmParams{}), ValidationError);
    const std::vector<int> short_y{0, 1};
    EXPECT_THROW(fit(x, short_y, {}, GbmParams{}), ValidationError);
    const std::vector<int> ok{0, 1, 1};
    const std::vector<double> w{1.0, -1.0, 1.0};
    EXPECT_THROW(fit(x, ok, w, GbmParams{}), ValidationError);
    GbmParams bad;
    bad.learning_rate = 0.0;
    EXPECT_THROW(fit(x, ok, {}, bad), ValidationError);
    EXPECT_THROW(fit(FeatureMatrix{}, std::vector<int>{}, {}, GbmParams{}), ValidationError);
}

TEST(Model, SerializationRoundTripPreservesPredictions) {
    const auto d = load_fixture("imbalanced_missing.csv");
    GbmParams p;
    p.n_trees = 30;
    const auto m = fit(d.x, d.y, {}, p, d.names, "features-v1");
    const auto text = serialize(m);
    const auto back = deserialize_model(text);
    EXPECT_EQ(serialize(back), text);
    EXPECT_EQ(predict_proba(back, d.x), predict_proba(m, d.x));
    EXPECT_EQ(back.feature_names, d.names);
    EXPECT_THROW(deserialize_model("{"), ParseError);
    const std::vector<double> wrong(d.x.cols() + 1, 0.0);
    const std::vector<std::uint8_t> mask(d.x.cols() + 1, 0);
    EXPECT_THROW(predict_proba(m, wrong, mask), ValidationError);
}

TEST(Importance, SumsToOneAndFavoursInformativeFeature) {
    const auto d = load_fixture("xor.csv");
    GbmParams p;
    p.max_depth = 3;
    const auto imp = importance(fit(d.x, d.y, {}, p, d.names));
    double total = 0.0;
    for (const auto& [name, v] : imp) total += v;
    EXPECT_NEAR(total, 1.0, 1e-9);
    EXPECT_LT(imp.at("noise"), imp.at("a"));
    EXPECT_LT(imp.at("noise"), imp.at("b"));
}

TEST(Sweep, XorPrefersInteractionDepth) {
    const auto d = load_fixture("xor.csv");
    GbmParams base;
    base.positive_class_weight = 1.0;
    const auto grid = default_grid(base);
    EXPECT_EQ(grid.size(), 27u);
    const auto r = sweep(d.x, d.y, {}, grid, 3, 7);
    EXPECT_EQ(r.curve.size(), grid.size());
    EXPECT_GE(r.best.max_depth, 2);
    EXPECT_GT(r.best_auc, 0.9);
    for (const auto& pt : r.curve) EXPECT_LE(pt.mean_auc, r.best_auc);
    EXPECT_EQ(sweep(d.x, d.y, {}, grid, 3, 7).best, r.best);
}

TEST(Folds, StratifiedAndBalanced) {
    std::vector<int> y(100, 0);
    for (int i = 0; i < 20; ++i) y[static_cast<std::size_t>(i * 5)] = 1;
    const auto folds = stratified_folds(y, 4, 3);
    std::vector<int> pos(4), all(4);
    for (std::size_t i = 0; i < y.size(); ++i) {
        ++all[static_cast<std::size_t>(folds[i])];
        pos[static_cast<std::size_t>(folds[i])] += y[i];
    }
    for (int f = 0; f < 4; ++f) {
        EXPECT_EQ(pos[static_cast<std::size_t>(f)], 5);
        EXPECT_EQ(all[static_cast<std::size_t>(f)], 25);
    }
    EXPECT_THROW(stratified_folds(y, 1, 3), ConfigError);
}
