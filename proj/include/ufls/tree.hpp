#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ufls/dataset.hpp"
#include "ufls/features.hpp"
#include "ufls/logistic.hpp"
#include "ufls/stats.hpp"

namespace ufls {

struct NodeRef {
    bool is_leaf = true;
    int index = -1;
};

// Hyperplane split node. The node sends a point to child_pos when
// beta[0] + sum_j beta[1+j]*x_j >= 0 (the higher-label side) and to
// child_neg otherwise. m_lower/m_upper bound that linear form over the
// training rows that reached the node; span_lower/span_upper bound it over
// the whole training dataset (the MILP indicator constraints also act on
// points that never reach this node, so their big-M values need the wider
// range).
struct SplitNode {
    std::vector<double> beta;
    double threshold_c = 0.0; // label threshold that produced this split
    NodeRef child_neg, child_pos;
    double m_lower = 0.0, m_upper = 0.0;
    double span_lower = 0.0, span_upper = 0.0;
    bool separated = false; // logistic fit needed the regularized fallback
};

// Linear-regression leaf; a zero leaf predicts exactly 0.0. m_lower/m_upper
// bound alpha[0] + sum alpha[1+j]*x_j over the leaf's training rows,
// span_lower/span_upper over the whole training dataset.
struct Leaf {
    std::vector<double> alpha;
    bool is_zero_leaf = false;
    double m_lower = 0.0, m_upper = 0.0;
    double span_lower = 0.0, span_upper = 0.0;
    double train_mae = 0.0;
    bool rank_deficient = false;
    std::size_t n_train = 0;
};

struct RegressionTree {
    NodeRef root;
    std::vector<SplitNode> nodes;   // preorder ids, root is node 0
    std::vector<Leaf> leaves;       // preorder ids, negative branch first
    FeatureBounds feature_bounds{}; // over the training dataset

    // Piecewise-linear prediction: route by the sign of each node's linear
    // form, then evaluate the leaf (a zero leaf returns exactly 0.0).
    double predict(std::span<const double> features) const;
    int predict_leaf(std::span<const double> features) const;
    // Leaf a label belongs to by the stored thresholds (y >= c goes to the
    // positive branch); used for the classification scores.
    int label_leaf(double y) const;
};

struct TreeConfig {
    int max_depth = 2;
    std::size_t min_leaf_size = 30;
    double c_step = 0.1;            // MW, label-threshold grid
    double improvement_tol = 1e-6;  // MW of node-MAE improvement to split
};

struct SplitCandidate {
    double c = 0.0;
    LogisticFit fit;
    std::vector<std::uint32_t> rows_neg, rows_pos; // indices into node rows
    double sae = 0.0; // sum of absolute leaf-fit residuals (filled on selection)
};

struct LeafFit {
    std::vector<double> alpha;
    bool is_zero = false;
    bool rank_deficient = false;
    double sae = 0.0; // sum of absolute residuals on the fitted rows
};

// Ordinary least squares on [1 X] via a rank-revealing orthogonal
// factorization; rank deficiency falls back to the minimum-norm solution
// (flagged). All labels exactly zero produce a zero leaf fit.
LeafFit fit_leaf_ols(const FeatureColumns& x, std::span<const double> y);

// Label-threshold grid search: for each c on the grid {0, c_step, ...} up to
// max(y), fit a logistic split on z = (y >= c) and partition the rows by the
// sign of the fitted linear form. Grid points that repeat the previous
// partition, produce a single class, or leave a side smaller than
// min_leaf_size are dropped. Throws NoValidCandidate when nothing survives.
std::vector<SplitCandidate> split_candidates(const FeatureColumns& x,
                                             std::span<const double> y,
                                             const TreeConfig& cfg);

// Fills each candidate's sum of absolute residuals (OLS fit per side) and
// returns the index of the minimizer; ties keep the smallest c.
std::size_t select_split(const FeatureColumns& x, std::span<const double> y,
                         std::vector<SplitCandidate>& candidates);

RegressionTree build_tree(const Dataset& train, const TreeConfig& cfg = {});

struct TreeEvaluation {
    double mae = 0.0;
    std::vector<std::size_t> leaf_count;  // rows routed to each leaf
    std::vector<double> leaf_mae;         // MAE of rows routed to each leaf
    std::vector<double> node_accuracy;    // sign(form) vs (y >= c), per node
    ConfusionMatrix confusion;            // label leaf vs routed leaf
    std::vector<double> residuals;        // predicted - observed
};

TreeEvaluation evaluate(const RegressionTree& tree, const Dataset& test);
std::string evaluation_report(const RegressionTree& tree,
                              const TreeEvaluation& ev);

} // namespace ufls
