#include "ufls/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "ufls/errors.hpp"

namespace ufls {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_bounds(const FeatureBounds& b, std::ostream& out) {
    out << "feature_bounds";
    for (std::size_t j = 0; j < kNumFeatures; ++j)
        out << ' ' << fmt(b.lo[j]) << ' ' << fmt(b.hi[j]);
    out << '\n';
}

std::string ref_str(NodeRef r) {
    return (r.is_leaf ? "l" : "n") + std::to_string(r.index);
}

class LineReader {
public:
    LineReader(std::istream& in, std::string origin)
        : in_(in), origin_(std::move(origin)) {}

    // Next non-empty line split into tokens.
    std::vector<std::string> next() {
        std::string line;
        while (std::getline(in_, line)) {
            ++lineno_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            std::istringstream is(line);
            std::vector<std::string> toks;
            std::string t;
            while (is >> t) toks.push_back(t);
            return toks;
        }
        fail("unexpected end of file");
        return {};
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorClass::Data, "BadModelFile",
                    origin_ + ":" + std::to_string(lineno_) + ": " + what);
    }

    double num(const std::string& tok) const {
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (tok.empty() || end != tok.c_str() + tok.size())
            fail("bad number '" + tok + "'");
        return v;
    }

    int integer(const std::string& tok) const {
        try {
            return std::stoi(tok);
        } catch (const std::exception&) {
            fail("bad integer '" + tok + "'");
        }
    }

    NodeRef ref(const std::string& tok) const {
        if (tok.size() < 2 || (tok[0] != 'n' && tok[0] != 'l'))
            fail("bad node reference '" + tok + "'");
        return {tok[0] == 'l', integer(tok.substr(1))};
    }

private:
    std::istream& in_;
    std::string origin_;
    std::size_t lineno_ = 0;
};

FeatureBounds read_bounds(LineReader& lr) {
    const auto toks = lr.next();
    if (toks.size() != 1 + 2 * kNumFeatures || toks[0] != "feature_bounds")
        lr.fail("expected feature_bounds");
    FeatureBounds b;
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
        b.lo[j] = lr.num(toks[1 + 2 * j]);
        b.hi[j] = lr.num(toks[2 + 2 * j]);
    }
    return b;
}

} // namespace

void write_tree(const RegressionTree& tree, std::ostream& out) {
    out << "ufls_model v1 tree\n";
    out << "features";
    for (const std::string& f : kFeatureNames) out << ' ' << f;
    out << '\n';
    write_bounds(tree.feature_bounds, out);
    out << "root " << ref_str(tree.root) << '\n';
    out << "nodes " << tree.nodes.size() << '\n';
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const SplitNode& n = tree.nodes[i];
        out << "node " << i << " c " << fmt(n.threshold_c) << " neg "
            << ref_str(n.child_neg) << " pos " << ref_str(n.child_pos)
            << " bounds " << fmt(n.m_lower) << ' ' << fmt(n.m_upper)
            << " span " << fmt(n.span_lower) << ' ' << fmt(n.span_upper)
            << " separated " << (n.separated ? 1 : 0) << " beta";
        for (double b : n.beta) out << ' ' << fmt(b);
        out << '\n';
    }
    out << "leaves " << tree.leaves.size() << '\n';
    for (std::size_t i = 0; i < tree.leaves.size(); ++i) {
        const Leaf& l = tree.leaves[i];
        out << "leaf " << i << " zero " << (l.is_zero_leaf ? 1 : 0) << " bounds "
            << fmt(l.m_lower) << ' ' << fmt(l.m_upper) << " span "
            << fmt(l.span_lower) << ' ' << fmt(l.span_upper) << " train_mae "
            << fmt(l.train_mae) << " n_train " << l.n_train << " rank_deficient "
            << (l.rank_deficient ? 1 : 0) << " alpha";
        for (double a : l.alpha) out << ' ' << fmt(a);
        out << '\n';
    }
    out << "end\n";
}

void write_tobit(const TobitModel& model, const FeatureBounds& bounds,
                 std::ostream& out) {
    out << "ufls_model v1 tobit\n";
    out << "features";
    for (const std::string& f : kFeatureNames) out << ' ' << f;
    out << '\n';
    write_bounds(bounds, out);
    out << "alpha";
    for (double a : model.alpha) out << ' ' << fmt(a);
    out << '\n';
    out << "sigma " << fmt(model.sigma) << '\n';
    out << "loglik " << fmt(model.loglik) << '\n';
    out << "converged " << (model.converged ? 1 : 0) << '\n';
    out << "none_censored " << (model.none_censored ? 1 : 0) << '\n';
    out << "end\n";
}

void save_tree(const RegressionTree& tree, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorClass::Io, "Io", "cannot open '" + path + "' for writing");
    write_tree(tree, out);
    if (!out) throw Error(ErrorClass::Io, "Io", "write to '" + path + "' failed");
}

void save_tobit(const TobitModel& model, const FeatureBounds& bounds,
                const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorClass::Io, "Io", "cannot open '" + path + "' for writing");
    write_tobit(model, bounds, out);
    if (!out) throw Error(ErrorClass::Io, "Io", "write to '" + path + "' failed");
}

ModelFile read_model(std::istream& in, const std::string& origin) {
    LineReader lr(in, origin);
    auto header = lr.next();
    if (header.size() != 3 || header[0] != "ufls_model" || header[1] != "v1")
        lr.fail("not a ufls model file");
    const std::string kind = header[2];

    const auto feats = lr.next();
    if (feats.size() != 1 + kNumFeatures || feats[0] != "features")
        lr.fail("expected the feature list");
    for (std::size_t j = 0; j < kNumFeatures; ++j)
        if (feats[1 + j] != kFeatureNames[j])
            lr.fail("unexpected feature '" + feats[1 + j] + "'");

    ModelFile mf;
    mf.feature_bounds = read_bounds(lr);

    if (kind == "tree") {
        mf.kind = ModelFile::Kind::Tree;
        RegressionTree tree;
        tree.feature_bounds = mf.feature_bounds;

        auto root = lr.next();
        if (root.size() != 2 || root[0] != "root") lr.fail("expected root");
        tree.root = lr.ref(root[1]);

        auto nodes = lr.next();
        if (nodes.size() != 2 || nodes[0] != "nodes") lr.fail("expected nodes");
        tree.nodes.resize(static_cast<std::size_t>(lr.integer(nodes[1])));
        for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
            auto t = lr.next();
            if (t.size() != 18 + kNumFeatures || t[0] != "node" ||
                static_cast<std::size_t>(lr.integer(t[1])) != i || t[2] != "c" ||
                t[4] != "neg" || t[6] != "pos" || t[8] != "bounds" ||
                t[11] != "span" || t[14] != "separated" || t[16] != "beta")
                lr.fail("malformed node line");
            SplitNode& n = tree.nodes[i];
            n.threshold_c = lr.num(t[3]);
            n.child_neg = lr.ref(t[5]);
            n.child_pos = lr.ref(t[7]);
            n.m_lower = lr.num(t[9]);
            n.m_upper = lr.num(t[10]);
            n.span_lower = lr.num(t[12]);
            n.span_upper = lr.num(t[13]);
            n.separated = lr.integer(t[15]) != 0;
            for (std::size_t j = 0; j <= kNumFeatures; ++j)
                n.beta.push_back(lr.num(t[17 + j]));
        }

        auto leaves = lr.next();
        if (leaves.size() != 2 || leaves[0] != "leaves") lr.fail("expected leaves");
        tree.leaves.resize(static_cast<std::size_t>(lr.integer(leaves[1])));
        if (tree.leaves.empty()) lr.fail("a tree needs at least one leaf");
        for (std::size_t i = 0; i < tree.leaves.size(); ++i) {
            auto t = lr.next();
            if (t.size() != 18 + kNumFeatures || t[0] != "leaf" ||
                static_cast<std::size_t>(lr.integer(t[1])) != i || t[2] != "zero" ||
                t[4] != "bounds" || t[7] != "span" || t[10] != "train_mae" ||
                t[12] != "n_train" || t[14] != "rank_deficient" ||
                t[16] != "alpha")
                lr.fail("malformed leaf line");
            Leaf& l = tree.leaves[i];
            l.is_zero_leaf = lr.integer(t[3]) != 0;
            l.m_lower = lr.num(t[5]);
            l.m_upper = lr.num(t[6]);
            l.span_lower = lr.num(t[8]);
            l.span_upper = lr.num(t[9]);
            l.train_mae = lr.num(t[11]);
            l.n_train = static_cast<std::size_t>(lr.integer(t[13]));
            l.rank_deficient = lr.integer(t[15]) != 0;
            for (std::size_t j = 0; j <= kNumFeatures; ++j)
                l.alpha.push_back(lr.num(t[17 + j]));
        }
        auto end = lr.next();
        if (end.size() != 1 || end[0] != "end") lr.fail("expected end");

        // Reference validation.
        auto check_ref = [&](NodeRef r) {
            const int limit = r.is_leaf ? static_cast<int>(tree.leaves.size())
                                        : static_cast<int>(tree.nodes.size());
            if (r.index < 0 || r.index >= limit) lr.fail("dangling node reference");
        };
        check_ref(tree.root);
        for (const SplitNode& n : tree.nodes) {
            check_ref(n.child_neg);
            check_ref(n.child_pos);
        }
        mf.tree = std::move(tree);
        return mf;
    }

    if (kind == "tobit") {
        mf.kind = ModelFile::Kind::Tobit;
        TobitModel model;
        auto alpha = lr.next();
        if (alpha.size() != 2 + kNumFeatures || alpha[0] != "alpha")
            lr.fail("expected alpha");
        for (std::size_t j = 0; j <= kNumFeatures; ++j)
            model.alpha.push_back(lr.num(alpha[1 + j]));
        auto sigma = lr.next();
        if (sigma.size() != 2 || sigma[0] != "sigma") lr.fail("expected sigma");
        model.sigma = lr.num(sigma[1]);
        if (!(model.sigma > 0.0)) lr.fail("sigma must be > 0");
        auto ll = lr.next();
        if (ll.size() != 2 || ll[0] != "loglik") lr.fail("expected loglik");
        model.loglik = lr.num(ll[1]);
        auto conv = lr.next();
        if (conv.size() != 2 || conv[0] != "converged") lr.fail("expected converged");
        model.converged = lr.integer(conv[1]) != 0;
        auto nc = lr.next();
        if (nc.size() != 2 || nc[0] != "none_censored")
            lr.fail("expected none_censored");
        model.none_censored = lr.integer(nc[1]) != 0;
        auto end = lr.next();
        if (end.size() != 1 || end[0] != "end") lr.fail("expected end");
        mf.tobit = std::move(model);
        return mf;
    }
    lr.fail("unknown model kind '" + kind + "'");
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorClass::Io, "Io", "cannot open '" + path + "'");
    return read_model(in, path);
}

} // namespace ufls
