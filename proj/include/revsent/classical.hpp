#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "revsent/checkpoint.hpp"
#include "revsent/optim.hpp"
#include "revsent/tensor.hpp"

namespace revsent {

using Matrix = std::vector<std::vector<double>>;

inline double gini_impurity(const std::vector<std::size_t>& class_counts) {
    std::size_t total = 0;
    for (auto c : class_counts) total += c;
    if (total == 0) return 0.0;
    double g = 1.0;
    for (auto c : class_counts) {
        double p = double(c) / double(total);
        g -= p * p;
    }
    return g;
}

// ---- decision tree -------------------------------------------------------

// One tree type serves both gini classification and variance-reduction
// regression (used by gradient boosting).
struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0;
    int left = -1, right = -1;
    std::vector<double> leaf;  // class frequencies, or {value} for regression
};

struct TreeConfig {
    int max_depth = -1;  // -1: unbounded
    int min_samples_split = 2;
    int max_features = -1;  // -1: all; otherwise random subset per split
    std::uint64_t seed = 0;
};

class DecisionTree {
public:
    void fit(const Matrix& X, const std::vector<int>& y, int num_classes, TreeConfig cfg = {}) {
        check_xy(X, y.size());
        num_classes_ = num_classes;
        regression_ = false;
        cfg_ = cfg;
        rng_ = make_rng(derive_seed(cfg.seed, 0x7e3));
        nodes_.clear();
        std::vector<std::size_t> idx(X.size());
        std::iota(idx.begin(), idx.end(), std::size_t(0));
        targets_int_ = &y;
        targets_real_ = nullptr;
        x_ = &X;
        build(idx, 0);
        x_ = nullptr;
        targets_int_ = nullptr;
    }

    void fit_regression(const Matrix& X, const std::vector<double>& y, TreeConfig cfg = {}) {
        check_xy(X, y.size());
        regression_ = true;
        cfg_ = cfg;
        rng_ = make_rng(derive_seed(cfg.seed, 0x7e3));
        nodes_.clear();
        std::vector<std::size_t> idx(X.size());
        std::iota(idx.begin(), idx.end(), std::size_t(0));
        targets_real_ = &y;
        targets_int_ = nullptr;
        x_ = &X;
        build(idx, 0);
        x_ = nullptr;
        targets_real_ = nullptr;
    }

    bool fitted() const { return !nodes_.empty(); }

    const std::vector<double>& leaf_of(const std::vector<double>& row) const {
        if (!fitted()) throw RevsentError("decision tree: predict before fit");
        int n = 0;
        while (nodes_[std::size_t(n)].feature >= 0) {
            const auto& nd = nodes_[std::size_t(n)];
            if (std::size_t(nd.feature) >= row.size())
                throw ShapeError("decision tree: row has " + std::to_string(row.size()) +
                                 " features, split needs feature " + std::to_string(nd.feature));
            n = row[std::size_t(nd.feature)] <= nd.threshold ? nd.left : nd.right;
        }
        return nodes_[std::size_t(n)].leaf;
    }

    int predict_one(const std::vector<double>& row) const {
        const auto& leaf = leaf_of(row);
        return int(std::max_element(leaf.begin(), leaf.end()) - leaf.begin());
    }

    double predict_value(const std::vector<double>& row) const { return leaf_of(row)[0]; }

    std::vector<int> predict(const Matrix& X) const {
        std::vector<int> out;
        out.reserve(X.size());
        for (const auto& r : X) out.push_back(predict_one(r));
        return out;
    }

    std::vector<std::vector<double>> predict_proba(const Matrix& X) const {
        std::vector<std::vector<double>> out;
        out.reserve(X.size());
        for (const auto& r : X) out.push_back(leaf_of(r));
        return out;
    }

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    int num_classes() const { return num_classes_; }

    // Flattened node array: feature, threshold, left, right, leaf values.
    void flatten(std::vector<real>& out) const {
        const std::size_t width = regression_ ? 1 : std::size_t(num_classes_);
        out.push_back(real(nodes_.size()));
        out.push_back(real(width));
        for (const auto& n : nodes_) {
            out.push_back(real(n.feature));
            out.push_back(real(n.threshold));
            out.push_back(real(n.left));
            out.push_back(real(n.right));
            for (std::size_t i = 0; i < width; ++i)
                out.push_back(real(i < n.leaf.size() ? n.leaf[i] : 0.0));
        }
    }

    static DecisionTree unflatten(const std::vector<real>& data, std::size_t& pos, bool regression) {
        DecisionTree t;
        t.regression_ = regression;
        const std::size_t count = std::size_t(data.at(pos++));
        const std::size_t width = std::size_t(data.at(pos++));
        if (!regression) t.num_classes_ = int(width);
        for (std::size_t i = 0; i < count; ++i) {
            TreeNode n;
            n.feature = int(data.at(pos++));
            n.threshold = double(data.at(pos++));
            n.left = int(data.at(pos++));
            n.right = int(data.at(pos++));
            for (std::size_t j = 0; j < width; ++j) n.leaf.push_back(double(data.at(pos++)));
            t.nodes_.push_back(std::move(n));
        }
        return t;
    }

private:
    static void check_xy(const Matrix& X, std::size_t ny) {
        if (X.empty() || X.size() != ny)
            throw RevsentError("decision tree: need |X| == |y| > 0, got " + std::to_string(X.size()) +
                               " rows, " + std::to_string(ny) + " targets");
    }

    std::vector<double> make_leaf(const std::vector<std::size_t>& idx) const {
        if (regression_) {
            double s = 0;
            for (auto i : idx) s += (*targets_real_)[i];
            return {idx.empty() ? 0.0 : s / double(idx.size())};
        }
        std::vector<double> freq(std::size_t(num_classes_), 0.0);
        for (auto i : idx) freq[std::size_t((*targets_int_)[i])] += 1.0;
        for (auto& f : freq) f /= double(idx.size());
        return freq;
    }

    double node_score(const std::vector<std::size_t>& idx) const {
        if (regression_) {
            double mean = 0;
            for (auto i : idx) mean += (*targets_real_)[i];
            mean /= double(idx.size());
            double var = 0;
            for (auto i : idx) {
                double d = (*targets_real_)[i] - mean;
                var += d * d;
            }
            return var / double(idx.size());
        }
        std::vector<std::size_t> counts(std::size_t(num_classes_), 0);
        for (auto i : idx) ++counts[std::size_t((*targets_int_)[i])];
        return gini_impurity(counts);
    }

    bool pure(const std::vector<std::size_t>& idx) const {
        if (regression_) {
            for (auto i : idx)
                if ((*targets_real_)[i] != (*targets_real_)[idx[0]]) return false;
        } else {
            for (auto i : idx)
                if ((*targets_int_)[i] != (*targets_int_)[idx[0]]) return false;
        }
        return true;
    }

    int build(const std::vector<std::size_t>& idx, int depth) {
        const int node_id = int(nodes_.size());
        nodes_.emplace_back();
        const bool stop = int(idx.size()) < cfg_.min_samples_split ||
                          (cfg_.max_depth >= 0 && depth >= cfg_.max_depth) || pure(idx);
        if (stop) {
            nodes_[std::size_t(node_id)].leaf = make_leaf(idx);
            return node_id;
        }

        const std::size_t num_features = (*x_)[idx[0]].size();
        std::vector<std::size_t> feats(num_features);
        std::iota(feats.begin(), feats.end(), std::size_t(0));
        if (cfg_.max_features > 0 && std::size_t(cfg_.max_features) < num_features) {
            std::shuffle(feats.begin(), feats.end(), rng_);
            feats.resize(std::size_t(cfg_.max_features));
            std::sort(feats.begin(), feats.end());
        }

        const double parent = node_score(idx);
        double best_gain = 1e-12;
        std::size_t best_feat = 0;
        double best_thr = 0;
        std::vector<std::size_t> best_left, best_right;
        std::vector<std::pair<double, std::size_t>> vals(idx.size());
        for (std::size_t f : feats) {
            for (std::size_t k = 0; k < idx.size(); ++k) vals[k] = {(*x_)[idx[k]][f], idx[k]};
            std::sort(vals.begin(), vals.end());
            std::vector<std::size_t> left;
            std::vector<std::size_t> right;
            for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
                if (vals[k].first == vals[k + 1].first) continue;
                const double thr = (vals[k].first + vals[k + 1].first) / 2.0;
                left.clear();
                right.clear();
                for (const auto& [v, i] : vals) (v <= thr ? left : right).push_back(i);
                const double child = (double(left.size()) * node_score(left) +
                                      double(right.size()) * node_score(right)) /
                                     double(idx.size());
                const double gain = parent - child;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feat = f;
                    best_thr = thr;
                    best_left = left;
                    best_right = right;
                }
            }
        }
        if (best_left.empty() || best_right.empty()) {
            nodes_[std::size_t(node_id)].leaf = make_leaf(idx);
            return node_id;
        }
        nodes_[std::size_t(node_id)].feature = int(best_feat);
        nodes_[std::size_t(node_id)].threshold = best_thr;
        const int l = build(best_left, depth + 1);
        const int r = build(best_right, depth + 1);
        nodes_[std::size_t(node_id)].left = l;
        nodes_[std::size_t(node_id)].right = r;
        return node_id;
    }

    std::vector<TreeNode> nodes_;
    int num_classes_ = 2;
    bool regression_ = false;
    TreeConfig cfg_;
    Rng rng_{0};
    const Matrix* x_ = nullptr;
    const std::vector<int>* targets_int_ = nullptr;
    const std::vector<double>* targets_real_ = nullptr;
};

// ---- random forest -------------------------------------------------------

class RandomForest {
public:
    explicit RandomForest(int n_trees = 100, std::uint64_t seed = 0)
        : n_trees_(n_trees), seed_(seed) {}

    void fit(const Matrix& X, const std::vector<int>& y, int num_classes) {
        if (X.empty()) throw RevsentError("random forest: empty training data");
        num_classes_ = num_classes;
        trees_.clear();
        const int max_features = std::max(1, int(std::sqrt(double(X[0].size()))));
        for (int t = 0; t < n_trees_; ++t) {
            Rng rng(make_rng(derive_seed(seed_, 0xf0 + std::uint64_t(t))));
            std::uniform_int_distribution<std::size_t> pick(0, X.size() - 1);
            Matrix bx;
            std::vector<int> by;
            for (std::size_t i = 0; i < X.size(); ++i) {
                std::size_t j = pick(rng);
                bx.push_back(X[j]);
                by.push_back(y[j]);
            }
            DecisionTree tree;
            tree.fit(bx, by, num_classes,
                     {.max_depth = -1,
                      .min_samples_split = 2,
                      .max_features = max_features,
                      .seed = derive_seed(seed_, 0x1f0 + std::uint64_t(t))});
            trees_.push_back(std::move(tree));
        }
    }

    bool fitted() const { return !trees_.empty(); }

    std::vector<double> proba_one(const std::vector<double>& row) const {
        if (!fitted()) throw RevsentError("random forest: predict before fit");
        std::vector<double> acc(std::size_t(num_classes_), 0.0);
        for (const auto& t : trees_) {
            const auto& leaf = t.leaf_of(row);
            for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += leaf[c];
        }
        for (auto& v : acc) v /= double(trees_.size());
        return acc;
    }

    std::vector<int> predict(const Matrix& X) const {
        std::vector<int> out;
        for (const auto& r : X) {
            auto p = proba_one(r);
            out.push_back(int(std::max_element(p.begin(), p.end()) - p.begin()));
        }
        return out;
    }

    std::vector<std::vector<double>> predict_proba(const Matrix& X) const {
        std::vector<std::vector<double>> out;
        for (const auto& r : X) out.push_back(proba_one(r));
        return out;
    }

    const std::vector<DecisionTree>& trees() const { return trees_; }

private:
    int n_trees_;
    std::uint64_t seed_;
    int num_classes_ = 2;
    std::vector<DecisionTree> trees_;
};

// ---- k nearest neighbours ------------------------------------------------

class Knn {
public:
    explicit Knn(int k = 10) : k_(k) {}

    void fit(const Matrix& X, const std::vector<int>& y, int num_classes) {
        if (X.empty() || X.size() != y.size()) throw RevsentError("knn: need |X| == |y| > 0");
        x_ = X;
        y_ = y;
        num_classes_ = num_classes;
    }

    bool fitted() const { return !x_.empty(); }

    std::vector<double> proba_one(const std::vector<double>& row) const {
        if (!fitted()) throw RevsentError("knn: predict before fit");
        if (row.size() != x_[0].size())
            throw ShapeError("knn: feature dim " + std::to_string(row.size()) + " != train dim " +
                             std::to_string(x_[0].size()));
        // distance ties break by record order (stable sort over index pairs)
        std::vector<std::pair<double, std::size_t>> d(x_.size());
        for (std::size_t i = 0; i < x_.size(); ++i) {
            double s = 0;
            for (std::size_t j = 0; j < row.size(); ++j) {
                double diff = row[j] - x_[i][j];
                s += diff * diff;
            }
            d[i] = {s, i};
        }
        const std::size_t k = std::min<std::size_t>(std::size_t(k_), d.size());
        std::stable_sort(d.begin(), d.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<double> votes(std::size_t(num_classes_), 0.0);
        for (std::size_t i = 0; i < k; ++i) votes[std::size_t(y_[d[i].second])] += 1.0;
        for (auto& v : votes) v /= double(k);
        return votes;
    }

    std::vector<int> predict(const Matrix& X) const {
        std::vector<int> out;
        for (const auto& r : X) {
            auto p = proba_one(r);
            out.push_back(int(std::max_element(p.begin(), p.end()) - p.begin()));
        }
        return out;
    }

private:
    int k_;
    int num_classes_ = 2;
    Matrix x_;
    std::vector<int> y_;
};

// ---- linear SVM ----------------------------------------------------------

// Hinge-loss linear SVM trained by stochastic subgradient descent,
// one-vs-rest for more than two classes. C is the inverse regularization
// weight (objective: ||w||^2/2 + C * sum hinge).
class LinearSvm {
public:
    explicit LinearSvm(double c = 1.0, int epochs = 20, std::uint64_t seed = 0)
        : c_(c), epochs_(epochs), seed_(seed) {}

    void fit(const Matrix& X, const std::vector<int>& y, int num_classes) {
        if (X.empty() || X.size() != y.size()) throw RevsentError("svm: need |X| == |y| > 0");
        num_classes_ = num_classes;
        const std::size_t dim = X[0].size();
        const int heads = num_classes == 2 ? 1 : num_classes;
        w_.assign(std::size_t(heads), std::vector<double>(dim, 0.0));
        b_.assign(std::size_t(heads), 0.0);
        constant_class_ = -1;
        {
            bool single = true;
            for (int v : y)
                if (v != y[0]) single = false;
            if (single) {
                constant_class_ = y[0];  // degenerate: constant predictor
                return;
            }
        }
        const double lambda = 1.0 / (c_ * double(X.size()));
        for (int h = 0; h < heads; ++h) {
            Rng rng(make_rng(derive_seed(seed_, 0x541 + std::uint64_t(h))));
            std::vector<std::size_t> order(X.size());
            std::iota(order.begin(), order.end(), std::size_t(0));
            std::size_t t = 0;
            for (int e = 0; e < epochs_; ++e) {
                std::shuffle(order.begin(), order.end(), rng);
                for (std::size_t i : order) {
                    ++t;
                    const double eta = 1.0 / (lambda * double(t));
                    const int pos = heads == 1 ? 1 : h;
                    const double yi = y[i] == pos ? 1.0 : -1.0;
                    double margin = b_[std::size_t(h)];
                    for (std::size_t j = 0; j < dim; ++j) margin += w_[std::size_t(h)][j] * X[i][j];
                    margin *= yi;
                    for (std::size_t j = 0; j < dim; ++j) w_[std::size_t(h)][j] *= (1.0 - eta * lambda);
                    if (margin < 1.0) {
                        const double step = eta / double(X.size());
                        for (std::size_t j = 0; j < dim; ++j)
                            w_[std::size_t(h)][j] += step * yi * X[i][j];
                        b_[std::size_t(h)] += step * yi;
                    }
                }
            }
        }
        fitted_ = true;
    }

    bool fitted() const { return fitted_ || constant_class_ >= 0; }

    // Decision margins only; hinge-loss SVMs carry no probability semantics.
    std::vector<double> decision_one(const std::vector<double>& row) const {
        if (!fitted()) throw RevsentError("svm: predict before fit");
        std::vector<double> m(w_.size(), 0.0);
        for (std::size_t h = 0; h < w_.size(); ++h) {
            m[h] = b_[h];
            for (std::size_t j = 0; j < row.size(); ++j) m[h] += w_[h][j] * row[j];
        }
        return m;
    }

    std::vector<int> predict(const Matrix& X) const {
        std::vector<int> out;
        for (const auto& r : X) {
            if (constant_class_ >= 0) {
                out.push_back(constant_class_);
                continue;
            }
            auto m = decision_one(r);
            if (num_classes_ == 2)
                out.push_back(m[0] >= 0 ? 1 : 0);
            else
                out.push_back(int(std::max_element(m.begin(), m.end()) - m.begin()));
        }
        return out;
    }

private:
    double c_;
    int epochs_;
    std::uint64_t seed_;
    int num_classes_ = 2;
    bool fitted_ = false;
    int constant_class_ = -1;
    std::vector<std::vector<double>> w_;
    std::vector<double> b_;
};

// ---- gradient boosting ---------------------------------------------------

// Logistic-loss boosting with regression trees and Newton leaf values;
// one-vs-rest for more than two classes.
class GradientBoosting {
public:
    GradientBoosting(double lr = 0.1, int max_depth = 5, double feature_fraction = 0.5,
                     int n_rounds = 100, std::uint64_t seed = 0)
        : lr_(lr), max_depth_(max_depth), feature_fraction_(feature_fraction), n_rounds_(n_rounds),
          seed_(seed) {}

    void fit(const Matrix& X, const std::vector<int>& y, int num_classes) {
        if (X.empty() || X.size() != y.size()) throw RevsentError("gb: need |X| == |y| > 0");
        num_classes_ = num_classes;
        train_losses_.clear();
        constant_class_ = -1;
        {
            bool single = true;
            for (int v : y)
                if (v != y[0]) single = false;
            if (single) {
                constant_class_ = y[0];
                return;
            }
        }
        const int heads = num_classes == 2 ? 1 : num_classes;
        heads_.assign(std::size_t(heads), {});
        base_.assign(std::size_t(heads), 0.0);
        const int max_features =
            std::max(1, int(std::floor(feature_fraction_ * double(X[0].size()))));

        std::vector<std::vector<double>> score(std::size_t(heads),
                                               std::vector<double>(X.size(), 0.0));
        std::vector<std::vector<double>> ybin(std::size_t(heads), std::vector<double>(X.size()));
        for (int h = 0; h < heads; ++h) {
            const int pos = heads == 1 ? 1 : h;
            double p = 0;
            for (std::size_t i = 0; i < y.size(); ++i) {
                ybin[std::size_t(h)][i] = y[i] == pos ? 1.0 : 0.0;
                p += ybin[std::size_t(h)][i];
            }
            p = std::clamp(p / double(y.size()), 1e-6, 1.0 - 1e-6);
            base_[std::size_t(h)] = std::log(p / (1.0 - p));
            std::fill(score[std::size_t(h)].begin(), score[std::size_t(h)].end(),
                      base_[std::size_t(h)]);
        }

        std::vector<double> residual(X.size()), hessian(X.size());
        for (int round = 0; round < n_rounds_; ++round) {
            for (int h = 0; h < heads; ++h) {
                for (std::size_t i = 0; i < X.size(); ++i) {
                    const double p = 1.0 / (1.0 + std::exp(-score[std::size_t(h)][i]));
                    residual[i] = ybin[std::size_t(h)][i] - p;
                    hessian[i] = std::max(p * (1.0 - p), 1e-9);
                }
                DecisionTree tree;
                tree.fit_regression(X, residual,
                                    {.max_depth = max_depth_,
                                     .min_samples_split = 2,
                                     .max_features = max_features,
                                     .seed = derive_seed(seed_, 0x6b0 +
                                                                    std::uint64_t(round) * 31 +
                                                                    std::uint64_t(h))});
                // Newton-scale each leaf: sum(residual) / sum(p(1-p))
                newton_rescale(tree, X, residual, hessian);
                for (std::size_t i = 0; i < X.size(); ++i)
                    score[std::size_t(h)][i] += lr_ * tree.predict_value(X[i]);
                heads_[std::size_t(h)].push_back(std::move(tree));
            }
            double loss = 0;
            for (int h = 0; h < heads; ++h)
                for (std::size_t i = 0; i < X.size(); ++i) {
                    const double s = score[std::size_t(h)][i];
                    // stable log(1 + e^{-y s}) with y in {0, 1} encoding
                    const double z = ybin[std::size_t(h)][i] > 0.5 ? -s : s;
                    loss += z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
                }
            train_losses_.push_back(loss / double(X.size() * std::size_t(heads)));
        }
    }

    bool fitted() const { return !heads_.empty() || constant_class_ >= 0; }
    const std::vector<double>& train_losses() const { return train_losses_; }

    std::vector<double> score_one(const std::vector<double>& row) const {
        std::vector<double> s(heads_.size());
        for (std::size_t h = 0; h < heads_.size(); ++h) {
            s[h] = base_[h];
            for (const auto& t : heads_[h]) s[h] += lr_ * t.predict_value(row);
        }
        return s;
    }

    std::vector<double> proba_one(const std::vector<double>& row) const {
        auto s = score_one(row);
        if (num_classes_ == 2) {
            const double p1 = 1.0 / (1.0 + std::exp(-s[0]));
            return {1.0 - p1, p1};
        }
        std::vector<double> p(s.size());
        double sum = 0;
        for (std::size_t h = 0; h < s.size(); ++h) {
            p[h] = 1.0 / (1.0 + std::exp(-s[h]));
            sum += p[h];
        }
        for (auto& v : p) v /= sum;
        return p;
    }

    std::vector<int> predict(const Matrix& X) const {
        if (!fitted()) throw RevsentError("gb: predict before fit");
        std::vector<int> out;
        for (const auto& r : X) {
            if (constant_class_ >= 0) {
                out.push_back(constant_class_);
                continue;
            }
            auto p = proba_one(r);
            out.push_back(int(std::max_element(p.begin(), p.end()) - p.begin()));
        }
        return out;
    }

    std::vector<std::vector<double>> predict_proba(const Matrix& X) const {
        std::vector<std::vector<double>> out;
        for (const auto& r : X) out.push_back(proba_one(r));
        return out;
    }

private:
    static void newton_rescale(DecisionTree& tree, const Matrix& X,
                               const std::vector<double>& residual,
                               const std::vector<double>& hessian) {
        // group rows by leaf via pointer identity of the leaf vector
        std::vector<const std::vector<double>*> leaves(X.size());
        for (std::size_t i = 0; i < X.size(); ++i) leaves[i] = &tree.leaf_of(X[i]);
        std::vector<std::pair<const std::vector<double>*, std::pair<double, double>>> agg;
        for (std::size_t i = 0; i < X.size(); ++i) {
            auto it = std::find_if(agg.begin(), agg.end(),
                                   [&](const auto& e) { return e.first == leaves[i]; });
            if (it == agg.end()) {
                agg.push_back({leaves[i], {residual[i], hessian[i]}});
            } else {
                it->second.first += residual[i];
                it->second.second += hessian[i];
            }
        }
        for (auto& [leaf, rh] : agg)
            const_cast<std::vector<double>*>(leaf)->at(0) = rh.first / rh.second;
    }

    double lr_;
    int max_depth_;
    double feature_fraction_;
    int n_rounds_;
    std::uint64_t seed_;
    int num_classes_ = 2;
    int constant_class_ = -1;
    std::vector<double> base_;
    std::vector<std::vector<DecisionTree>> heads_;
    std::vector<double> train_losses_;
};

// ---- MLP baseline --------------------------------------------------------

// Feed-forward classifier on the autodiff core: hidden layers (default
// 256/128), relu, softmax cross-entropy, Adam.
class Mlp {
public:
    struct Config {
        std::vector<int> hidden = {256, 128};
        real lr = real(1e-3);
        int epochs = 20;
        int batch_size = 32;
        std::uint64_t seed = 0;
    };

    Mlp() = default;
    explicit Mlp(Config cfg) : cfg_(std::move(cfg)) {}

    void fit(const Matrix& X, const std::vector<int>& y, int num_classes) {
        if (X.empty() || X.size() != y.size()) throw RevsentError("mlp: need |X| == |y| > 0");
        num_classes_ = num_classes;
        input_dim_ = int(X[0].size());
        Rng rng(make_rng(derive_seed(cfg_.seed, 0x31b)));
        weights_.clear();
        biases_.clear();
        int in = input_dim_;
        std::vector<int> dims = cfg_.hidden;
        dims.push_back(num_classes);
        for (int d : dims) {
            const real bound = real(1) / std::sqrt(real(in));
            weights_.push_back(Tensor::uniform({in, d}, bound, rng, true));
            biases_.push_back(Tensor::zeros({d}, true));
            in = d;
        }
        std::vector<Tensor> params;
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            params.push_back(weights_[l]);
            params.push_back(biases_[l]);
        }
        Adam opt({.lr = cfg_.lr});
        opt.attach(params);
        Rng shuffle_rng(make_rng(derive_seed(cfg_.seed, 0x32c)));
        std::vector<std::size_t> order(X.size());
        std::iota(order.begin(), order.end(), std::size_t(0));
        for (int e = 0; e < cfg_.epochs; ++e) {
            std::shuffle(order.begin(), order.end(), shuffle_rng);
            for (std::size_t start = 0; start < order.size();
                 start += std::size_t(cfg_.batch_size)) {
                const std::size_t end =
                    std::min(order.size(), start + std::size_t(cfg_.batch_size));
                std::vector<real> flat;
                std::vector<int> labels;
                for (std::size_t j = start; j < end; ++j) {
                    for (double v : X[order[j]]) flat.push_back(real(v));
                    labels.push_back(y[order[j]]);
                }
                Tensor batch = Tensor::from(std::move(flat), {int(end - start), input_dim_});
                Tensor loss = cross_entropy(logits(batch), labels);
                opt.zero_grad();
                backward(loss);
                opt.step();
            }
        }
        fitted_ = true;
    }

    bool fitted() const { return fitted_; }

    std::vector<std::vector<double>> predict_proba(const Matrix& X) const {
        if (!fitted_) throw RevsentError("mlp: predict before fit");
        std::vector<std::vector<double>> out;
        for (const auto& row : X) {
            if (int(row.size()) != input_dim_)
                throw ShapeError("mlp: feature dim " + std::to_string(row.size()) +
                                 " != train dim " + std::to_string(input_dim_));
            std::vector<real> flat(row.begin(), row.end());
            Tensor probs = softmax(logits(Tensor::from(std::move(flat), {1, input_dim_})));
            out.emplace_back(probs.data().begin(), probs.data().end());
        }
        return out;
    }

    std::vector<int> predict(const Matrix& X) const {
        std::vector<int> out;
        for (auto& p : predict_proba(X))
            out.push_back(int(std::max_element(p.begin(), p.end()) - p.begin()));
        return out;
    }

    NamedParams named_params() {
        NamedParams p;
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            p.emplace_back("mlp.W" + std::to_string(l), weights_[l]);
            p.emplace_back("mlp.b" + std::to_string(l), biases_[l]);
        }
        return p;
    }

private:
    Tensor logits(const Tensor& x) const {
        Tensor h = x;
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            h = add(matmul(h, weights_[l]), biases_[l]);
            if (l + 1 < weights_.size()) h = relu(h);
        }
        return h;
    }

    Config cfg_;
    int num_classes_ = 2;
    int input_dim_ = 0;
    bool fitted_ = false;
    std::vector<Tensor> weights_, biases_;
};

}  // namespace revsent
