#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace squadforge {

// Dense row-major feature matrix with a parallel missing mask.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::size_t cols);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
    bool is_missing(std::size_t r, std::size_t c) const { return missing_[r * cols_ + c] != 0; }
    void set(std::size_t r, std::size_t c, double value, bool missing = false);

    std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }
    std::span<const std::uint8_t> row_mask(std::size_t r) const {
        return {missing_.data() + r * cols_, cols_};
    }

    // The first appended row fixes the column count of an empty matrix.
    void append_row(std::span<const double> values, std::span<const std::uint8_t> missing);
    FeatureMatrix select_rows(std::span<const std::size_t> indices) const;
    FeatureMatrix select_cols(std::span<const std::size_t> indices) const;

    bool operator==(const FeatureMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
    std::vector<std::uint8_t> missing_;
};

struct GbmParams {
    int n_trees = 100;
    double learning_rate = 0.1;
    int max_depth = 3;
    int min_samples_leaf = 1;
    // nullopt: #neg / #pos measured on the training data.
    std::optional<double> positive_class_weight;
    double subsample = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const GbmParams&) const = default;
};

nlohmann::json to_json(const GbmParams& params);
GbmParams gbm_params_from_json(const nlohmann::json& j);

// Internal nodes route on x[feature] < threshold; a masked value follows
// default_left. Leaves carry the raw Newton step (learning rate not applied).
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    bool default_left = true;
    int left = -1;
    int right = -1;
    double value = 0.0;
    double gain = 0.0;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double evaluate(std::span<const double> x, std::span<const std::uint8_t> mask) const;
    bool operator==(const RegressionTree&) const = default;
};

inline constexpr double kBaseScoreClamp = 30.0;
inline constexpr double kProbabilityFloor = 1e-7;
inline constexpr double kLeafEpsilon = 1e-12;

struct BoostedModel {
    double base_score = 0.0;
    std::vector<RegressionTree> trees;
    GbmParams params;
    double positive_class_weight = 1.0;  // the weight actually applied
    std::size_t n_features = 0;
    std::vector<std::string> feature_names;
    std::string schema_version;
    bool degenerate = false;  // constant labels: base score only

    // F0 + lr * sum of tree outputs.
    double raw_score(std::span<const double> x, std::span<const std::uint8_t> mask) const;
    bool operator==(const BoostedModel&) const = default;
};

double sigmoid(double z);

// Gradient boosting for logistic loss with Newton leaf values. `weights` may
// be empty (all ones). Throws ValidationError on bad inputs.
BoostedModel fit(const FeatureMatrix& x, std::span<const int> y, std::span<const double> weights,
                 const GbmParams& params, std::vector<std::string> feature_names = {},
                 std::string schema_version = {});

// sigma(F), clamped to [1e-7, 1 - 1e-7].
double predict_proba(const BoostedModel& model, std::span<const double> x,
                     std::span<const std::uint8_t> missing_mask);
std::vector<double> predict_proba(const BoostedModel& model, const FeatureMatrix& x);

// Weighted training log-loss after 0, 1, ..., n_trees trees, using the
// effective weights the model was fit with.
std::vector<double> staged_log_loss(const BoostedModel& model, const FeatureMatrix& x,
                                    std::span<const int> y, std::span<const double> weights);

// P(random positive outranks random negative), ties counted half.
double auc_roc(std::span<const double> scores, std::span<const int> labels);

// TP / (TP + FP) among scores >= threshold.
double precision_at(std::span<const double> scores, std::span<const int> labels, double threshold);

struct SweepPoint {
    GbmParams params;
    double mean_auc = 0.0;
};

struct SweepResult {
    GbmParams best;
    double best_auc = 0.0;
    std::vector<SweepPoint> curve;
};

// n_trees {50,100,200} x max_depth {2,3,4} x learning_rate {0.05,0.1,0.3},
// other fields copied from `base`.
std::vector<GbmParams> default_grid(const GbmParams& base = {});

// Stratified k-fold cross-validated AUC for every grid point. Best is the
// argmax; ties go to fewer trees, then shallower depth, then grid order.
SweepResult sweep(const FeatureMatrix& x, std::span<const int> y, std::span<const double> weights,
                  std::span<const GbmParams> grid, int k_folds, std::uint64_t seed);

// Stratified fold assignment (fold index per row).
std::vector<int> stratified_folds(std::span<const int> y, int k_folds, std::uint64_t seed);

// Total split gain per feature, normalized to sum to one.
std::map<std::string, double> importance(const BoostedModel& model);

nlohmann::json to_json(const BoostedModel& model);
BoostedModel model_from_json(const nlohmann::json& j);
std::string serialize(const BoostedModel& model);
BoostedModel deserialize_model(std::string_view text);

}  // namespace squadforge
