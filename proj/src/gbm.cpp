#include "squadforge/gbm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "squadforge/errors.hpp"

namespace squadforge {

using nlohmann::json;

// --- FeatureMatrix -------------------------------------------------------------

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0), missing_(rows * cols, 0) {}

void FeatureMatrix::set(std::size_t r, std::size_t c, double value, bool missing) {
    values_[r * cols_ + c] = value;
    missing_[r * cols_ + c] = missing ? 1 : 0;
}

void FeatureMatrix::append_row(std::span<const double> values, std::span<const std::uint8_t> missing) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_ || missing.size() != cols_) {
        throw ValidationError("row width " + std::to_string(values.size()) + " does not match " +
                              std::to_string(cols_) + " columns");
    }
    values_.insert(values_.end(), values.begin(), values.end());
    missing_.insert(missing_.end(), missing.begin(), missing.end());
    ++rows_;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
    FeatureMatrix out(0, cols_);
    out.values_.reserve(indices.size() * cols_);
    out.missing_.reserve(indices.size() * cols_);
    for (auto r : indices) {
        auto v = row(r);
        auto m = row_mask(r);
        out.values_.insert(out.values_.end(), v.begin(), v.end());
        out.missing_.insert(out.missing_.end(), m.begin(), m.end());
        ++out.rows_;
    }
    return out;
}

FeatureMatrix FeatureMatrix::select_cols(std::span<const std::size_t> indices) const {
    FeatureMatrix out(rows_, indices.size());
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t k = 0; k < indices.size(); ++k) {
            out.set(r, k, at(r, indices[k]), is_missing(r, indices[k]));
        }
    }
    return out;
}

// --- params ------------------------------------------------------------------

void GbmParams::validate() const {
    if (n_trees < 0) throw ValidationError("n_trees must be >= 0");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw ValidationError("learning_rate must be in (0, 1]");
    if (max_depth < 1) throw ValidationError("max_depth must be >= 1");
    if (min_samples_leaf < 1) throw ValidationError("min_samples_leaf must be >= 1");
    if (positive_class_weight && !(*positive_class_weight > 0.0 && std::isfinite(*positive_class_weight))) {
        throw ValidationError("positive_class_weight must be > 0");
    }
    if (!(subsample > 0.0 && subsample <= 1.0)) throw ValidationError("subsample must be in (0, 1]");
}

json to_json(const GbmParams& p) {
    json j{{"n_trees", p.n_trees},
           {"learning_rate", p.learning_rate},
           {"max_depth", p.max_depth},
           {"min_samples_leaf", p.min_samples_leaf},
           {"subsample", p.subsample},
           {"seed", p.seed}};
    j["positive_class_weight"] = p.positive_class_weight ? json(*p.positive_class_weight) : json("auto");
    return j;
}

GbmParams gbm_params_from_json(const json& j) {
    GbmParams p;
    p.n_trees = j.at("n_trees").get<int>();
    p.learning_rate = j.at("learning_rate").get<double>();
    p.max_depth = j.at("max_depth").get<int>();
    p.min_samples_leaf = j.at("min_samples_leaf").get<int>();
    p.subsample = j.at("subsample").get<double>();
    p.seed = j.at("seed").get<std::uint64_t>();
    const auto& w = j.at("positive_class_weight");
    if (w.is_number()) p.positive_class_weight = w.get<double>();
    p.validate();
    return p;
}

// --- prediction ----------------------------------------------------------------

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double RegressionTree::evaluate(std::span<const double> x, std::span<const std::uint8_t> mask) const {
    int n = 0;
    while (!nodes[static_cast<std::size_t>(n)].is_leaf()) {
        const auto& node = nodes[static_cast<std::size_t>(n)];
        const auto f = static_cast<std::size_t>(node.feature);
        const bool go_left = mask[f] != 0 ? node.default_left : x[f] < node.threshold;
        n = go_left ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(n)].value;
}

double BoostedModel::raw_score(std::span<const double> x, std::span<const std::uint8_t> mask) const {
    double f = base_score;
    for (const auto& tree : trees) f += params.learning_rate * tree.evaluate(x, mask);
    return f;
}

double predict_proba(const BoostedModel& model, std::span<const double> x,
                     std::span<const std::uint8_t> missing_mask) {
    if (x.size() != model.n_features || missing_mask.size() != model.n_features) {
        throw ValidationError("input has " + std::to_string(x.size()) + " features, model expects " +
                              std::to_string(model.n_features));
    }
    const double p = sigmoid(model.raw_score(x, missing_mask));
    return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
}

std::vector<double> predict_proba(const BoostedModel& model, const FeatureMatrix& x) {
    std::vector<double> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict_proba(model, x.row(r), x.row_mask(r));
    return out;
}

// --- fitting -------------------------------------------------------------------

namespace {

struct NodeStats {
    double sum = 0.0;      // residuals
    double hess = 0.0;     // w p (1 - p)
    std::size_t count = 0;
};

struct SplitChoice {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
    bool default_left = true;
};

double split_score(double sum, std::size_t count) {
    return count == 0 ? 0.0 : sum * sum / static_cast<double>(count);
}

// Midpoint strictly above `lo` and at most `hi`, so `lo < t` is false only for lo.
double midpoint(double lo, double hi) {
    double t = lo / 2.0 + hi / 2.0;
    if (!(t > lo)) t = hi;
    return t;
}

constexpr double kMinGain = 1e-12;

class TreeGrower {
public:
    TreeGrower(const FeatureMatrix& x, const std::vector<std::vector<std::uint32_t>>& sorted,
               const GbmParams& params)
        : x_(x), sorted_(sorted), params_(params) {}

    RegressionTree grow(std::span<const double> residual, std::span<const double> hessian,
                        std::span<const std::uint8_t> in_sample) {
        const std::size_t n = x_.rows();
        node_of_.assign(n, -1);
        RegressionTree tree;
        tree.nodes.emplace_back();
        std::vector<NodeStats> stats(1);
        for (std::size_t i = 0; i < n; ++i) {
            if (!in_sample[i]) continue;
            node_of_[i] = 0;
            stats[0].sum += residual[i];
            stats[0].hess += hessian[i];
            ++stats[0].count;
        }

        std::vector<int> open{0};
        for (int depth = 0; depth < params_.max_depth && !open.empty(); ++depth) {
            const auto choices = find_splits(open, stats, residual);
            std::vector<int> next;
            std::vector<int> left_of(tree.nodes.size(), -1);
            for (std::size_t k = 0; k < open.size(); ++k) {
                const auto& c = choices[k];
                if (c.feature < 0) continue;
                const int id = open[k];
                const int l = static_cast<int>(tree.nodes.size());
                tree.nodes.emplace_back();
                tree.nodes.emplace_back();
                stats.emplace_back();
                stats.emplace_back();
                auto& node = tree.nodes[static_cast<std::size_t>(id)];
                node.feature = c.feature;
                node.threshold = c.threshold;
                node.default_left = c.default_left;
                node.left = l;
                node.right = l + 1;
                node.gain = c.gain;
                left_of.resize(tree.nodes.size(), -1);
                left_of[static_cast<std::size_t>(id)] = l;
                next.push_back(l);
                next.push_back(l + 1);
            }
            for (std::size_t i = 0; i < n; ++i) {
                const int id = node_of_[i];
                if (id < 0 || left_of[static_cast<std::size_t>(id)] < 0) continue;
                const auto& node = tree.nodes[static_cast<std::size_t>(id)];
                const auto f = static_cast<std::size_t>(node.feature);
                const bool go_left = x_.is_missing(i, f) ? node.default_left : x_.at(i, f) < node.threshold;
                const int child = go_left ? node.left : node.right;
                node_of_[i] = child;
                auto& s = stats[static_cast<std::size_t>(child)];
                s.sum += residual[i];
                s.hess += hessian[i];
                ++s.count;
            }
            open = std::move(next);
        }

        for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
            auto& node = tree.nodes[id];
            if (node.is_leaf()) node.value = stats[id].sum / (stats[id].hess + kLeafEpsilon);
        }
        return tree;
    }

private:
    std::vector<SplitChoice> find_splits(const std::vector<int>& open, const std::vector<NodeStats>& stats,
                                         std::span<const double> residual) {
        const std::size_t k_open = open.size();
        slot_.assign(stats.size(), -1);
        for (std::size_t k = 0; k < k_open; ++k) slot_[static_cast<std::size_t>(open[k])] = static_cast<int>(k);

        std::vector<SplitChoice> best(k_open);
        std::vector<double> nm_sum(k_open), left_sum(k_open), last(k_open);
        std::vector<std::size_t> nm_count(k_open), left_count(k_open);
        const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);

        for (std::size_t f = 0; f < x_.cols(); ++f) {
            const auto& order = sorted_[f];
            std::fill(nm_sum.begin(), nm_sum.end(), 0.0);
            std::fill(nm_count.begin(), nm_count.end(), 0);
            for (auto i : order) {
                const int id = node_of_[i];
                if (id < 0) continue;
                const int k = slot_[static_cast<std::size_t>(id)];
                if (k < 0) continue;
                nm_sum[static_cast<std::size_t>(k)] += residual[i];
                ++nm_count[static_cast<std::size_t>(k)];
            }
            std::fill(left_sum.begin(), left_sum.end(), 0.0);
            std::fill(left_count.begin(), left_count.end(), 0);
            for (auto i : order) {
                const int id = node_of_[i];
                if (id < 0) continue;
                const int ks = slot_[static_cast<std::size_t>(id)];
                if (ks < 0) continue;
                const auto k = static_cast<std::size_t>(ks);
                const double v = x_.at(i, f);
                if (left_count[k] > 0 && v != last[k]) {
                    const auto& parent = stats[static_cast<std::size_t>(id)];
                    const double parent_score = split_score(parent.sum, parent.count);
                    const double right_sum = nm_sum[k] - left_sum[k];
                    const std::size_t right_count = nm_count[k] - left_count[k];
                    const double miss_sum = parent.sum - nm_sum[k];
                    const std::size_t miss_count = parent.count - nm_count[k];

                    SplitChoice cand;
                    cand.feature = static_cast<int>(f);
                    cand.threshold = midpoint(last[k], v);
                    bool valid = false;
                    if (left_count[k] + miss_count >= min_leaf && right_count >= min_leaf) {
                        cand.gain = split_score(left_sum[k] + miss_sum, left_count[k] + miss_count) +
                                    split_score(right_sum, right_count) - parent_score;
                        cand.default_left = true;
                        valid = true;
                    }
                    if (miss_count > 0 && left_count[k] >= min_leaf && right_count + miss_count >= min_leaf) {
                        const double g = split_score(left_sum[k], left_count[k]) +
                                         split_score(right_sum + miss_sum, right_count + miss_count) -
                                         parent_score;
                        if (!valid || g > cand.gain) {
                            cand.gain = g;
                            cand.default_left = false;
                            valid = true;
                        }
                    }
                    if (valid && miss_count == 0) cand.default_left = left_count[k] >= right_count;
                    if (valid && cand.gain > kMinGain && cand.gain > best[k].gain) best[k] = cand;
                }
                left_sum[k] += residual[i];
                ++left_count[k];
                last[k] = v;
            }
        }
        return best;
    }

    const FeatureMatrix& x_;
    const std::vector<std::vector<std::uint32_t>>& sorted_;
    const GbmParams& params_;
    std::vector<int> node_of_;
    std::vector<int> slot_;
};

void check_training_inputs(const FeatureMatrix& x, std::span<const int> y, std::span<const double> weights) {
    if (x.rows() == 0) throw ValidationError("training matrix is empty");
    if (y.size() != x.rows()) throw ValidationError("label count does not match row count");
    if (!weights.empty() && weights.size() != x.rows()) {
        throw ValidationError("weight count does not match row count");
    }
    for (auto label : y) {
        if (label != 0 && label != 1) throw ValidationError("labels must be binary (0 or 1)");
    }
    for (auto w : weights) {
        if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("weights must be positive and finite");
    }
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) {
            if (!x.is_missing(r, c) && !std::isfinite(x.at(r, c))) {
                throw ValidationError("non-finite feature value at row " + std::to_string(r) +
                                      " column " + std::to_string(c) + " is not masked");
            }
        }
    }
}

double resolve_positive_weight(const GbmParams& params, std::span<const int> y) {
    if (params.positive_class_weight) return *params.positive_class_weight;
    const auto pos = static_cast<double>(std::count(y.begin(), y.end(), 1));
    const auto neg = static_cast<double>(y.size()) - pos;
    if (pos == 0.0 || neg == 0.0) return 1.0;
    return neg / pos;
}

std::vector<double> effective_weights(std::span<const int> y, std::span<const double> weights,
                                      double positive_weight) {
    std::vector<double> w(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double base = weights.empty() ? 1.0 : weights[i];
        w[i] = y[i] == 1 ? base * positive_weight : base;
    }
    return w;
}

}  // namespace

BoostedModel fit(const FeatureMatrix& x, std::span<const int> y, std::span<const double> weights,
                 const GbmParams& params, std::vector<std::string> feature_names, std::string schema_version) {
    params.validate();
    check_training_inputs(x, y, weights);
    if (!feature_names.empty() && feature_names.size() != x.cols()) {
        throw ValidationError("feature name count does not match column count");
    }

    BoostedModel model;
    model.params = params;
    model.n_features = x.cols();
    model.feature_names = std::move(feature_names);
    model.schema_version = std::move(schema_version);
    model.positive_class_weight = resolve_positive_weight(params, y);

    const std::size_t n = x.rows();
    const auto w = effective_weights(y, weights, model.positive_class_weight);
    double w_pos = 0.0;
    double w_neg = 0.0;
    for (std::size_t i = 0; i < n; ++i) (y[i] == 1 ? w_pos : w_neg) += w[i];

    if (w_pos == 0.0 || w_neg == 0.0) {
        model.degenerate = true;
        model.base_score = w_pos == 0.0 ? -kBaseScoreClamp : kBaseScoreClamp;
        return model;
    }
    model.base_score = std::clamp(std::log(w_pos / w_neg), -kBaseScoreClamp, kBaseScoreClamp);
    if (params.n_trees == 0) return model;

    std::vector<std::vector<std::uint32_t>> sorted(x.cols());
    for (std::size_t f = 0; f < x.cols(); ++f) {
        auto& order = sorted[f];
        for (std::size_t i = 0; i < n; ++i) {
            if (!x.is_missing(i, f)) order.push_back(static_cast<std::uint32_t>(i));
        }
        std::stable_sort(order.begin(), order.end(),
                         [&](std::uint32_t a, std::uint32_t b) { return x.at(a, f) < x.at(b, f); });
    }

    std::mt19937_64 rng(params.seed);
    std::vector<double> score(n, model.base_score);
    std::vector<double> residual(n), hessian(n);
    std::vector<std::uint8_t> in_sample(n, 1);
    std::vector<std::size_t> perm(n);
    const std::size_t sample_size =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(params.subsample * static_cast<double>(n))));

    TreeGrower grower(x, sorted, params);
    model.trees.reserve(static_cast<std::size_t>(params.n_trees));
    for (int t = 0; t < params.n_trees; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(score[i]);
            residual[i] = w[i] * (y[i] - p);
            hessian[i] = w[i] * p * (1.0 - p);
        }
        if (sample_size < n) {
            // Partial Fisher-Yates driven directly by the engine output so the
            // sample is identical across standard libraries.
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            std::fill(in_sample.begin(), in_sample.end(), 0);
            for (std::size_t i = 0; i < sample_size; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
                std::swap(perm[i], perm[j]);
                in_sample[perm[i]] = 1;
            }
        }
        RegressionTree tree = grower.grow(residual, hessian, in_sample);
        for (std::size_t i = 0; i < n; ++i) {
            score[i] += params.learning_rate * tree.evaluate(x.row(i), x.row_mask(i));
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

std::vector<double> staged_log_loss(const BoostedModel& model, const FeatureMatrix& x, std::span<const int> y,
                                    std::span<const double> weights) {
    check_training_inputs(x, y, weights);
    const auto w = effective_weights(y, weights, model.positive_class_weight);
    const double total_w = std::accumulate(w.begin(), w.end(), 0.0);
    std::vector<double> score(x.rows(), model.base_score);
    auto loss = [&] {
        double sum = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            // -log(sigma(z)) = log1p(exp(-z)), computed stably.
            const double z = y[i] == 1 ? score[i] : -score[i];
            const double l = z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
            sum += w[i] * l;
        }
        return sum / total_w;
    };
    std::vector<double> out{loss()};
    for (const auto& tree : model.trees) {
        for (std::size_t i = 0; i < x.rows(); ++i) {
            score[i] += model.params.learning_rate * tree.evaluate(x.row(i), x.row_mask(i));
        }
        out.push_back(loss());
    }
    return out;
}

// --- metrics -------------------------------------------------------------------

double auc_roc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw ValidationError("scores and labels differ in length");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (std::isnan(scores[i])) throw ValidationError("score is NaN");
        if (labels[i] != 0 && labels[i] != 1) throw ValidationError("labels must be binary");
    }
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

    // Twice the concordant-plus-half-tied count, kept integral.
    std::uint64_t twice_credit = 0;
    std::uint64_t neg_below = 0;
    std::uint64_t positives = 0;
    std::uint64_t negatives = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        std::uint64_t pos_group = 0;
        std::uint64_t neg_group = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] == 1 ? pos_group : neg_group) += 1;
            ++j;
        }
        twice_credit += pos_group * (2 * neg_below + neg_group);
        neg_below += neg_group;
        positives += pos_group;
        negatives += neg_group;
        i = j;
    }
    if (positives == 0 || negatives == 0) {
        throw UndefinedMetricError("AUC needs at least one positive and one negative label");
    }
    return static_cast<double>(twice_credit) / (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

double precision_at(std::span<const double> scores, std::span<const int> labels, double threshold) {
    if (scores.size() != labels.size()) throw ValidationError("scores and labels differ in length");
    std::size_t tp = 0;
    std::size_t predicted = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] >= threshold) {
            ++predicted;
            if (labels[i] == 1) ++tp;
        }
    }
    if (predicted == 0) throw UndefinedMetricError("no scores at or above the threshold");
    return static_cast<double>(tp) / static_cast<double>(predicted);
}

// --- sweep ---------------------------------------------------------------------

std::vector<GbmParams> default_grid(const GbmParams& base) {
    std::vector<GbmParams> grid;
    for (int trees : {50, 100, 200}) {
        for (int depth : {2, 3, 4}) {
            for (double lr : {0.05, 0.1, 0.3}) {
                GbmParams p = base;
                p.n_trees = trees;
                p.max_depth = depth;
                p.learning_rate = lr;
                grid.push_back(p);
            }
        }
    }
    return grid;
}

std::vector<int> stratified_folds(std::span<const int> y, int k_folds, std::uint64_t seed) {
    if (k_folds < 2) throw ConfigError("k_folds must be >= 2");
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < y.size(); ++i) (y[i] == 1 ? pos : neg).push_back(i);
    if (pos.size() < static_cast<std::size_t>(k_folds) || neg.size() < static_cast<std::size_t>(k_folds)) {
        throw ConfigError("each class needs at least k_folds examples for stratified folds");
    }
    std::mt19937_64 rng(seed);
    auto shuffle = [&](std::vector<std::size_t>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng() % i);
            std::swap(v[i - 1], v[j]);
        }
    };
    shuffle(pos);
    shuffle(neg);
    std::vector<int> fold(y.size());
    for (std::size_t i = 0; i < pos.size(); ++i) fold[pos[i]] = static_cast<int>(i % static_cast<std::size_t>(k_folds));
    for (std::size_t i = 0; i < neg.size(); ++i) fold[neg[i]] = static_cast<int>(i % static_cast<std::size_t>(k_folds));
    return fold;
}

SweepResult sweep(const FeatureMatrix& x, std::span<const int> y, std::span<const double> weights,
                  std::span<const GbmParams> grid, int k_folds, std::uint64_t seed) {
    if (grid.empty()) throw ConfigError("sweep grid is empty");
    check_training_inputs(x, y, weights);
    const auto fold = stratified_folds(y, k_folds, seed);

    struct Split {
        FeatureMatrix train_x, valid_x;
        std::vector<int> train_y, valid_y;
        std::vector<double> train_w;
    };
    std::vector<Split> splits(static_cast<std::size_t>(k_folds));
    for (int k = 0; k < k_folds; ++k) {
        std::vector<std::size_t> train, valid;
        for (std::size_t i = 0; i < y.size(); ++i) (fold[i] == k ? valid : train).push_back(i);
        auto& s = splits[static_cast<std::size_t>(k)];
        s.train_x = x.select_rows(train);
        s.valid_x = x.select_rows(valid);
        for (auto i : train) {
            s.train_y.push_back(y[i]);
            if (!weights.empty()) s.train_w.push_back(weights[i]);
        }
        for (auto i : valid) s.valid_y.push_back(y[i]);
    }

    SweepResult result;
    std::size_t best = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double total = 0.0;
        for (const auto& s : splits) {
            const auto model = fit(s.train_x, s.train_y, s.train_w, grid[g]);
            total += auc_roc(predict_proba(model, s.valid_x), s.valid_y);
        }
        result.curve.push_back({grid[g], total / k_folds});
        if (g == 0) continue;
        const auto& cand = result.curve[g];
        const auto& cur = result.curve[best];
        const bool better =
            cand.mean_auc > cur.mean_auc ||
            (cand.mean_auc == cur.mean_auc &&
             (cand.params.n_trees < cur.params.n_trees ||
              (cand.params.n_trees == cur.params.n_trees && cand.params.max_depth < cur.params.max_depth)));
        if (better) best = g;
    }
    result.best = result.curve[best].params;
    result.best_auc = result.curve[best].mean_auc;
    return result;
}

// --- importance ----------------------------------------------------------------

std::map<std::string, double> importance(const BoostedModel& model) {
    std::vector<double> gain(model.n_features, 0.0);
    for (const auto& tree : model.trees) {
        for (const auto& node : tree.nodes) {
            if (!node.is_leaf()) gain[static_cast<std::size_t>(node.feature)] += node.gain;
        }
    }
    const double total = std::accumulate(gain.begin(), gain.end(), 0.0);
    std::map<std::string, double> out;
    if (!(total > 0.0)) return out;
    for (std::size_t f = 0; f < gain.size(); ++f) {
        if (gain[f] <= 0.0) continue;
        const std::string name = f < model.feature_names.size() ? model.feature_names[f] : "f" + std::to_string(f);
        out[name] = gain[f] / total;
    }
    return out;
}

// --- serialization ---------------------------------------------------------------

namespace {
constexpr int kModelFormatVersion = 1;
}

json to_json(const BoostedModel& m) {
    json trees = json::array();
    for (const auto& t : m.trees) {
        json nodes = json::array();
        for (const auto& n : t.nodes) {
            if (n.is_leaf()) {
                nodes.push_back({{"leaf", n.value}});
            } else {
                nodes.push_back({{"feature", n.feature},
                                 {"threshold", n.threshold},
                                 {"default_left", n.default_left},
                                 {"left", n.left},
                                 {"right", n.right},
                                 {"gain", n.gain}});
            }
        }
        trees.push_back(std::move(nodes));
    }
    return {{"format_version", kModelFormatVersion},
            {"base_score", m.base_score},
            {"params", to_json(m.params)},
            {"positive_class_weight", m.positive_class_weight},
            {"n_features", m.n_features},
            {"feature_names", m.feature_names},
            {"schema_version", m.schema_version},
            {"degenerate", m.degenerate},
            {"trees", std::move(trees)}};
}

BoostedModel model_from_json(const json& j) {
    try {
        if (j.at("format_version").get<int>() != kModelFormatVersion) {
            throw ParseError("unsupported model format_version");
        }
        BoostedModel m;
        m.base_score = j.at("base_score").get<double>();
        m.params = gbm_params_from_json(j.at("params"));
        m.positive_class_weight = j.at("positive_class_weight").get<double>();
        m.n_features = j.at("n_features").get<std::size_t>();
        m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        m.schema_version = j.at("schema_version").get<std::string>();
        m.degenerate = j.at("degenerate").get<bool>();
        for (const auto& tj : j.at("trees")) {
            RegressionTree t;
            for (const auto& nj : tj) {
                TreeNode n;
                if (auto leaf = nj.find("leaf"); leaf != nj.end()) {
                    n.value = leaf->get<double>();
                } else {
                    n.feature = nj.at("feature").get<int>();
                    n.threshold = nj.at("threshold").get<double>();
                    n.default_left = nj.at("default_left").get<bool>();
                    n.left = nj.at("left").get<int>();
                    n.right = nj.at("right").get<int>();
                    n.gain = nj.at("gain").get<double>();
                }
                t.nodes.push_back(n);
            }
            // Children must point forward inside the tree so evaluation terminates.
            for (std::size_t id = 0; id < t.nodes.size(); ++id) {
                const auto& n = t.nodes[id];
                if (n.is_leaf()) continue;
                const auto size = static_cast<int>(t.nodes.size());
                if (n.feature >= static_cast<int>(m.n_features) || n.left <= static_cast<int>(id) ||
                    n.right <= static_cast<int>(id) || n.left >= size || n.right >= size) {
                    throw ParseError("malformed tree node " + std::to_string(id));
                }
            }
            if (t.nodes.empty()) throw ParseError("empty tree");
            m.trees.push_back(std::move(t));
        }
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed model: ") + e.what());
    }
}

std::string serialize(const BoostedModel& model) { return to_json(model).dump(1) + "\n"; }

BoostedModel deserialize_model(std::string_view text) {
    try {
        return model_from_json(json::parse(text));
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("model is not valid JSON: ") + e.what());
    }
}

}  // namespace squadforge
