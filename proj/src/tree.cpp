#include "ufls/tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "ufls/errors.hpp"
#include "ufls/kernels.hpp"

namespace ufls {

double RegressionTree::predict(std::span<const double> features) const {
    const Leaf& leaf = leaves[predict_leaf(features)];
    if (leaf.is_zero_leaf) return 0.0;
    return affine_eval_row(leaf.alpha, features);
}

int RegressionTree::predict_leaf(std::span<const double> features) const {
    NodeRef ref = root;
    while (!ref.is_leaf) {
        const SplitNode& node = nodes[ref.index];
        const double form = affine_eval_row(node.beta, features);
        ref = form >= 0.0 ? node.child_pos : node.child_neg;
    }
    return ref.index;
}

int RegressionTree::label_leaf(double y) const {
    NodeRef ref = root;
    while (!ref.is_leaf) {
        const SplitNode& node = nodes[ref.index];
        ref = y >= node.threshold_c ? node.child_pos : node.child_neg;
    }
    return ref.index;
}

LeafFit fit_leaf_ols(const FeatureColumns& x, std::span<const double> y) {
    const std::size_t n = x.n;
    const std::size_t p = x.p();
    if (n == 0 || y.size() != n)
        throw Error(ErrorClass::Training, "LengthMismatch",
                    "labels do not match the feature matrix");

    LeafFit fit;
    bool all_zero = true;
    for (double v : y)
        if (v != 0.0) { all_zero = false; break; }
    if (all_zero) {
        fit.alpha.assign(p + 1, 0.0);
        fit.is_zero = true;
        fit.sae = 0.0;
        return fit;
    }

    Eigen::MatrixXd a(n, p + 1);
    for (std::size_t i = 0; i < n; ++i) a(i, 0) = 1.0;
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t i = 0; i < n; ++i) a(i, 1 + j) = x.cols[j][i];
    Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(y.data(), n);

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    fit.rank_deficient = cod.rank() < static_cast<Eigen::Index>(p + 1);
    Eigen::VectorXd alpha = cod.solve(rhs);

    fit.alpha.assign(alpha.data(), alpha.data() + p + 1);
    Eigen::VectorXd resid = a * alpha - rhs;
    fit.sae = resid.lpNorm<1>();
    return fit;
}

std::vector<SplitCandidate> split_candidates(const FeatureColumns& x,
                                             std::span<const double> y,
                                             const TreeConfig& cfg) {
    const std::size_t n = x.n;
    if (n == 0 || y.size() != n)
        throw Error(ErrorClass::Training, "LengthMismatch",
                    "labels do not match the feature matrix");
    if (!(cfg.c_step > 0.0))
        throw Error(ErrorClass::Training, "BadGrid", "c_step must be > 0");

    const double c_max = *std::max_element(y.begin(), y.end());
    std::vector<SplitCandidate> out;
    std::size_t prev_n_pos = n + 1; // sentinel: no previous grid point

    for (long long k = 0;; ++k) {
        const double c = static_cast<double>(k) * cfg.c_step;
        if (c > c_max + 1e-12) break;

        std::vector<std::uint8_t> z(n);
        std::size_t n_pos = 0;
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = y[i] >= c ? 1 : 0;
            n_pos += z[i];
        }
        // Same class vector as the previous grid point, or single class:
        // nothing new to fit.
        if (n_pos == prev_n_pos) continue;
        prev_n_pos = n_pos;
        if (n_pos == 0 || n_pos == n) continue;

        LogisticFit fit = fit_logistic(x, z);

        SplitCandidate cand;
        cand.c = c;
        const std::vector<double> eta = affine_eval(x, fit.beta);
        for (std::size_t i = 0; i < n; ++i) {
            if (eta[i] >= 0.0)
                cand.rows_pos.push_back(static_cast<std::uint32_t>(i));
            else
                cand.rows_neg.push_back(static_cast<std::uint32_t>(i));
        }
        if (cand.rows_neg.size() < cfg.min_leaf_size ||
            cand.rows_pos.size() < cfg.min_leaf_size)
            continue;
        cand.fit = std::move(fit);
        out.push_back(std::move(cand));
    }
    if (out.empty())
        throw Error(ErrorClass::Training, "NoValidCandidate",
                    "no label threshold produced a usable split");
    return out;
}

std::size_t select_split(const FeatureColumns& x, std::span<const double> y,
                         std::vector<SplitCandidate>& candidates) {
    if (candidates.empty())
        throw Error(ErrorClass::Training, "NoValidCandidate",
                    "empty candidate list");
    std::size_t best = 0;
    double best_sae = std::numeric_limits<double>::infinity();
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
        SplitCandidate& cand = candidates[ci];
        double sae = 0.0;
        for (const auto* side : {&cand.rows_neg, &cand.rows_pos}) {
            const FeatureColumns sub = x.gather(*side);
            std::vector<double> suby;
            suby.reserve(side->size());
            for (std::uint32_t i : *side) suby.push_back(y[i]);
            sae += fit_leaf_ols(sub, suby).sae;
        }
        cand.sae = sae;
        if (sae < best_sae) { // strict: ties keep the smallest c
            best_sae = sae;
            best = ci;
        }
    }
    return best;
}

namespace {

class TreeBuilder {
public:
    TreeBuilder(const FeatureColumns& x, std::vector<double> y, TreeConfig cfg)
        : x_(x), y_(std::move(y)), cfg_(cfg) {}

    RegressionTree build() {
        std::vector<std::uint32_t> all(x_.n);
        for (std::size_t i = 0; i < x_.n; ++i) all[i] = static_cast<std::uint32_t>(i);
        RegressionTree tree;
        tree.root = grow(all, 0);
        tree.nodes = std::move(nodes_);
        tree.leaves = std::move(leaves_);
        // Whole-training-set range of every linear form: the MILP encoding
        // applies each form's big-M constraints at points routed elsewhere,
        // so the per-node ranges are not enough.
        for (SplitNode& node : tree.nodes) {
            const std::vector<double> vals = affine_eval(x_, node.beta);
            std::tie(node.span_lower, node.span_upper) = kern::minmax(vals);
        }
        for (Leaf& leaf : tree.leaves) {
            if (leaf.is_zero_leaf) {
                leaf.span_lower = leaf.span_upper = 0.0;
                continue;
            }
            const std::vector<double> vals = affine_eval(x_, leaf.alpha);
            std::tie(leaf.span_lower, leaf.span_upper) = kern::minmax(vals);
        }
        return tree;
    }

private:
    NodeRef grow(const std::vector<std::uint32_t>& rows, int depth) {
        std::vector<double> suby;
        suby.reserve(rows.size());
        for (std::uint32_t i : rows) suby.push_back(y_[i]);
        const FeatureColumns subx = x_.gather(rows);

        bool all_zero = true;
        for (double v : suby)
            if (v != 0.0) { all_zero = false; break; }
        if (all_zero) return make_leaf(subx, suby);

        if (depth >= cfg_.max_depth || rows.size() < 2 * cfg_.min_leaf_size)
            return make_leaf(subx, suby);

        std::vector<SplitCandidate> cands;
        try {
            cands = split_candidates(subx, suby, cfg_);
        } catch (const Error& e) {
            if (e.code() == "NoValidCandidate") return make_leaf(subx, suby);
            throw;
        }
        const std::size_t best = select_split(subx, suby, cands);
        SplitCandidate& cand = cands[best];

        // Split only when it beats a single leaf on this node by more than
        // the improvement tolerance (in MAE terms).
        const LeafFit whole = fit_leaf_ols(subx, suby);
        const double n = static_cast<double>(rows.size());
        if ((whole.sae - cand.sae) / n <= cfg_.improvement_tol)
            return make_leaf(subx, suby, &whole);

        const int node_id = static_cast<int>(nodes_.size());
        nodes_.emplace_back(); // reserve the preorder slot
        {
            SplitNode& node = nodes_[node_id];
            node.beta = cand.fit.beta;
            node.threshold_c = cand.c;
            node.separated = cand.fit.separated;
            const std::vector<double> eta = affine_eval(subx, node.beta);
            const auto [lo, hi] = kern::minmax(eta);
            node.m_lower = lo;
            node.m_upper = hi;
        }

        std::vector<std::uint32_t> gneg, gpos;
        gneg.reserve(cand.rows_neg.size());
        gpos.reserve(cand.rows_pos.size());
        for (std::uint32_t i : cand.rows_neg) gneg.push_back(rows[i]);
        for (std::uint32_t i : cand.rows_pos) gpos.push_back(rows[i]);

        // When the chosen threshold isolates the zero label class (no label
        // lies strictly between 0 and c), the negative branch is that class
        // and needs no further classification: it becomes a zero leaf even
        // if routing leaked a few positive rows into it.
        bool zero_class_below = cand.c > 0.0;
        for (double v : suby)
            if (v > 0.0 && v < cand.c) { zero_class_below = false; break; }

        const NodeRef neg = zero_class_below ? make_zero_leaf(gneg)
                                             : grow(gneg, depth + 1);
        const NodeRef pos = grow(gpos, depth + 1);
        nodes_[node_id].child_neg = neg;
        nodes_[node_id].child_pos = pos;
        return {false, node_id};
    }

    NodeRef make_zero_leaf(const std::vector<std::uint32_t>& rows) {
        Leaf leaf;
        leaf.alpha.assign(x_.p() + 1, 0.0);
        leaf.is_zero_leaf = true;
        leaf.m_lower = 0.0;
        leaf.m_upper = 0.0;
        leaf.n_train = rows.size();
        double sae = 0.0;
        for (std::uint32_t i : rows) sae += std::fabs(y_[i]);
        leaf.train_mae = rows.empty() ? 0.0 : sae / static_cast<double>(rows.size());
        const int id = static_cast<int>(leaves_.size());
        leaves_.push_back(std::move(leaf));
        return {true, id};
    }

    NodeRef make_leaf(const FeatureColumns& subx, const std::vector<double>& suby,
                      const LeafFit* prefit = nullptr) {
        const LeafFit fit = prefit ? *prefit : fit_leaf_ols(subx, suby);
        Leaf leaf;
        leaf.alpha = fit.alpha;
        leaf.is_zero_leaf = fit.is_zero;
        leaf.rank_deficient = fit.rank_deficient;
        leaf.n_train = suby.size();
        leaf.train_mae = fit.sae / static_cast<double>(suby.size());
        if (fit.is_zero) {
            leaf.m_lower = 0.0;
            leaf.m_upper = 0.0;
        } else {
            const std::vector<double> vals = affine_eval(subx, leaf.alpha);
            const auto [lo, hi] = kern::minmax(vals);
            leaf.m_lower = lo;
            leaf.m_upper = hi;
        }
        const int id = static_cast<int>(leaves_.size());
        leaves_.push_back(std::move(leaf));
        return {true, id};
    }

    const FeatureColumns& x_;
    std::vector<double> y_;
    TreeConfig cfg_;
    std::vector<SplitNode> nodes_;
    std::vector<Leaf> leaves_;
};

} // namespace

RegressionTree build_tree(const Dataset& train, const TreeConfig& cfg) {
    if (train.empty())
        throw Error(ErrorClass::Training, "EmptyDataset",
                    "cannot train on an empty dataset");
    const FeatureColumns x = FeatureColumns::from_dataset(train);
    RegressionTree tree = TreeBuilder(x, train.labels(), cfg).build();
    tree.feature_bounds = train.feature_bounds();
    return tree;
}

TreeEvaluation evaluate(const RegressionTree& tree, const Dataset& test) {
    if (test.empty())
        throw Error(ErrorClass::Data, "EmptyDataset", "empty test dataset");
    const std::size_t n = test.size();
    TreeEvaluation ev;
    ev.residuals.resize(n);
    ev.leaf_count.assign(tree.leaves.size(), 0);
    ev.leaf_mae.assign(tree.leaves.size(), 0.0);

    std::vector<double> preds(n), labels(n);
    std::vector<int> pred_leaf(n), true_leaf(n);
    std::vector<double> feat(kNumFeatures);
    for (std::size_t i = 0; i < n; ++i) {
        const OutageSample& s = test.rows()[i];
        for (std::size_t j = 0; j < kNumFeatures; ++j) feat[j] = s.feature(j);
        preds[i] = tree.predict(feat);
        labels[i] = s.y;
        pred_leaf[i] = tree.predict_leaf(feat);
        true_leaf[i] = tree.label_leaf(s.y);
        ev.residuals[i] = preds[i] - s.y;
        ev.leaf_count[pred_leaf[i]]++;
        ev.leaf_mae[pred_leaf[i]] += std::fabs(ev.residuals[i]);
    }
    ev.mae = mean_abs_error(preds, labels);
    for (std::size_t l = 0; l < tree.leaves.size(); ++l)
        ev.leaf_mae[l] = ev.leaf_count[l]
                             ? ev.leaf_mae[l] / static_cast<double>(ev.leaf_count[l])
                             : std::numeric_limits<double>::quiet_NaN();

    // Per-node classification accuracy over the test rows reaching the node.
    ev.node_accuracy.assign(tree.nodes.size(), 0.0);
    std::vector<std::size_t> node_n(tree.nodes.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        const OutageSample& s = test.rows()[i];
        for (std::size_t j = 0; j < kNumFeatures; ++j) feat[j] = s.feature(j);
        NodeRef ref = tree.root;
        while (!ref.is_leaf) {
            const SplitNode& node = tree.nodes[ref.index];
            const double form = affine_eval_row(node.beta, feat);
            const bool go_pos = form >= 0.0;
            const bool label_pos = s.y >= node.threshold_c;
            node_n[ref.index]++;
            if (go_pos == label_pos) ev.node_accuracy[ref.index] += 1.0;
            ref = go_pos ? node.child_pos : node.child_neg;
        }
    }
    for (std::size_t ni = 0; ni < tree.nodes.size(); ++ni)
        ev.node_accuracy[ni] = node_n[ni]
                                   ? ev.node_accuracy[ni] / static_cast<double>(node_n[ni])
                                   : std::numeric_limits<double>::quiet_NaN();

    if (!tree.nodes.empty())
        ev.confusion = confusion_matrix(true_leaf, pred_leaf);
    else {
        ev.confusion.classes = {0};
        ev.confusion.pct = {{100.0}};
        ev.confusion.accuracy_pct = 100.0;
    }
    return ev;
}

std::string evaluation_report(const RegressionTree& tree,
                              const TreeEvaluation& ev) {
    std::ostringstream os;
    char buf[64];
    os << "regression tree: " << tree.nodes.size() << " nodes, "
       << tree.leaves.size() << " leaves\n";
    std::snprintf(buf, sizeof buf, "%.6f", ev.mae);
    os << "test MAE: " << buf << " MW\n\n";

    os << "node  c[MW]   accuracy  beta (intercept";
    for (const std::string& f : kFeatureNames) os << ", " << f;
    os << ")\n";
    for (std::size_t ni = 0; ni < tree.nodes.size(); ++ni) {
        const SplitNode& nd = tree.nodes[ni];
        std::snprintf(buf, sizeof buf, "N%zu    %-7.2f %6.2f%%  ", ni,
                      nd.threshold_c, 100.0 * ev.node_accuracy[ni]);
        os << buf;
        for (std::size_t j = 0; j < nd.beta.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%s%.6g", j ? " " : "", nd.beta[j]);
            os << buf;
        }
        os << "\n";
    }
    os << "\nleaf  rows    MAE[MW]   alpha\n";
    for (std::size_t li = 0; li < tree.leaves.size(); ++li) {
        const Leaf& lf = tree.leaves[li];
        std::snprintf(buf, sizeof buf, "L%zu    %-7zu ", li, ev.leaf_count[li]);
        os << buf;
        if (std::isnan(ev.leaf_mae[li]))
            os << "   -      ";
        else {
            std::snprintf(buf, sizeof buf, "%-9.6f ", ev.leaf_mae[li]);
            os << buf;
        }
        if (lf.is_zero_leaf) os << "zero leaf";
        else
            for (std::size_t j = 0; j < lf.alpha.size(); ++j) {
                std::snprintf(buf, sizeof buf, "%s%.6g", j ? " " : "", lf.alpha[j]);
                os << buf;
            }
        os << "\n";
    }
    os << "\nconfusion matrix (rows: label class, cols: routed class)\n";
    os << ev.confusion.to_string();
    return os.str();
}

} // namespace ufls
