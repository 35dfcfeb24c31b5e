#include "ufls/milp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ufls/errors.hpp"

namespace ufls {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double inflate_slack(double v, const EncodeOptions& opts) {
    return std::max(opts.slack_rel * std::fabs(v), opts.slack_abs);
}

void require_finite(double lo, double up, const std::string& what,
                    const char* code) {
    if (!std::isfinite(lo) || !std::isfinite(up) || lo > up)
        throw Error(ErrorClass::Encoding, code,
                    "bounds of " + what + " are not finite");
}

// Leaf ids in the subtree rooted at `ref`.
void collect_leaves(const RegressionTree& tree, NodeRef ref,
                    std::vector<int>& out) {
    if (ref.is_leaf) {
        out.push_back(ref.index);
        return;
    }
    collect_leaves(tree, tree.nodes[ref.index].child_neg, out);
    collect_leaves(tree, tree.nodes[ref.index].child_pos, out);
}

void add_feature_vars(MilpBlock& block, const FeatureBounds& bounds) {
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
        require_finite(bounds.lo[j], bounds.hi[j], "feature " + kFeatureNames[j],
                       "UnboundedFeature");
        MilpVar v;
        v.name = block.prefix + "x_" + kFeatureNames[j];
        v.kind = VarKind::Continuous;
        v.role = VarRole::Feature;
        v.lb = bounds.lo[j];
        v.ub = bounds.hi[j];
        block.feature_vars.push_back(v.name);
        block.variables.push_back(std::move(v));
    }
}

void push_term(MilpConstraint& c, const std::string& var, double coeff) {
    if (coeff != 0.0) c.terms.emplace_back(var, coeff);
}

// The four product-linearization rows tying r = form * u with bounds
// lo <= form <= up on the side where u = 1.
void add_product_linearization(MilpBlock& block, const std::string& tag,
                               std::span<const double> alpha, double lo,
                               double up, const std::string& u,
                               const std::string& r) {
    MilpConstraint a;
    a.name = block.prefix + tag + "_a";
    for (std::size_t j = 0; j < kNumFeatures; ++j)
        push_term(a, block.feature_vars[j], alpha[1 + j]);
    push_term(a, u, up);
    push_term(a, r, -1.0);
    a.sense = Sense::Le;
    a.rhs = up - alpha[0];
    block.constraints.push_back(std::move(a));

    MilpConstraint b;
    b.name = block.prefix + tag + "_b";
    for (std::size_t j = 0; j < kNumFeatures; ++j)
        push_term(b, block.feature_vars[j], alpha[1 + j]);
    push_term(b, u, lo);
    push_term(b, r, -1.0);
    b.sense = Sense::Ge;
    b.rhs = lo - alpha[0];
    block.constraints.push_back(std::move(b));

    MilpConstraint c;
    c.name = block.prefix + tag + "_c";
    push_term(c, u, up);
    push_term(c, r, -1.0);
    c.sense = Sense::Ge;
    c.rhs = 0.0;
    block.constraints.push_back(std::move(c));

    MilpConstraint d;
    d.name = block.prefix + tag + "_d";
    push_term(d, u, lo);
    push_term(d, r, -1.0);
    d.sense = Sense::Le;
    d.rhs = 0.0;
    block.constraints.push_back(std::move(d));
}

} // namespace

std::pair<double, double> compute_bigm(std::span<const double> coeffs,
                                       const FeatureBounds& bounds) {
    double lo = coeffs[0], up = coeffs[0];
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
        const double a = coeffs[1 + j] * bounds.lo[j];
        const double b = coeffs[1 + j] * bounds.hi[j];
        lo += std::min(a, b);
        up += std::max(a, b);
    }
    return {lo, up};
}

EncodingStats MilpBlock::stats() const {
    EncodingStats s;
    s.n_constraints = constraints.size();
    for (const MilpVar& v : variables) {
        if (v.kind == VarKind::Binary) ++s.n_binary;
        else if (v.role == VarRole::Aux) ++s.n_continuous;
        else if (v.role == VarRole::Output) ++s.n_output;
    }
    return s;
}

const MilpVar* MilpBlock::find_var(const std::string& name) const {
    for (const MilpVar& v : variables)
        if (v.name == name) return &v;
    return nullptr;
}

MilpBlock encode_tree(const RegressionTree& tree, int obs_id,
                      const EncodeOptions& opts) {
    MilpBlock block;
    block.prefix = "o" + std::to_string(obs_id) + "_";
    add_feature_vars(block, tree.feature_bounds);

    const std::size_t n_leaves = tree.leaves.size();

    // Encoding bounds per leaf and node, inflated so that the epsilon offset
    // of the strict side can never cut off an in-distribution point. The
    // zero leaf keeps exact (0, 0) bounds.
    std::vector<std::pair<double, double>> leaf_bounds(n_leaves);
    for (std::size_t l = 0; l < n_leaves; ++l) {
        const Leaf& leaf = tree.leaves[l];
        double lo, up;
        if (opts.bigm_source == BigMSource::FeatureBox)
            std::tie(lo, up) = compute_bigm(leaf.alpha, tree.feature_bounds);
        else
            std::tie(lo, up) = std::make_pair(leaf.span_lower, leaf.span_upper);
        require_finite(lo, up, "leaf " + std::to_string(l), "UnboundedNode");
        if (!leaf.is_zero_leaf) {
            lo -= inflate_slack(lo, opts);
            up += inflate_slack(up, opts);
        }
        leaf_bounds[l] = {lo, up};
    }

    std::vector<std::string> u_names(n_leaves), r_names(n_leaves);
    for (std::size_t l = 0; l < n_leaves; ++l) {
        u_names[l] = block.prefix + "u_" + std::to_string(l);
        r_names[l] = block.prefix + "r_" + std::to_string(l);
        block.variables.push_back(
            {u_names[l], VarKind::Binary, VarRole::Indicator, 0.0, 1.0});
    }
    double y_lo = 0.0, y_up = 0.0;
    for (std::size_t l = 0; l < n_leaves; ++l) {
        const auto [lo, up] = leaf_bounds[l];
        block.variables.push_back({r_names[l], VarKind::Continuous, VarRole::Aux,
                                   std::min(lo, 0.0), std::max(up, 0.0)});
        y_lo = std::min(y_lo, lo);
        y_up = std::max(y_up, up);
    }
    block.output_var = block.prefix + "yhat";
    block.variables.push_back(
        {block.output_var, VarKind::Continuous, VarRole::Output, y_lo, y_up});

    // One-hot over the leaf indicators.
    MilpConstraint onehot;
    onehot.name = block.prefix + "onehot";
    for (const std::string& u : u_names) push_term(onehot, u, 1.0);
    onehot.sense = Sense::Eq;
    onehot.rhs = 1.0;
    block.constraints.push_back(std::move(onehot));

    // Two indicator constraints per node.
    for (std::size_t ni = 0; ni < tree.nodes.size(); ++ni) {
        const SplitNode& node = tree.nodes[ni];
        double lo, up;
        if (opts.bigm_source == BigMSource::FeatureBox)
            std::tie(lo, up) = compute_bigm(node.beta, tree.feature_bounds);
        else
            std::tie(lo, up) = std::make_pair(node.span_lower, node.span_upper);
        require_finite(lo, up, "node " + std::to_string(ni), "UnboundedNode");
        lo -= inflate_slack(lo, opts);
        up += inflate_slack(up, opts);

        std::vector<int> pos_leaves, neg_leaves;
        collect_leaves(tree, node.child_pos, pos_leaves);
        collect_leaves(tree, node.child_neg, neg_leaves);

        // Leaves on the positive side force form >= 0.
        MilpConstraint clo;
        clo.name = block.prefix + "n" + std::to_string(ni) + "_lo";
        for (std::size_t j = 0; j < kNumFeatures; ++j)
            push_term(clo, block.feature_vars[j], node.beta[1 + j]);
        for (int l : pos_leaves) push_term(clo, u_names[l], lo);
        clo.sense = Sense::Ge;
        clo.rhs = lo - node.beta[0];
        block.constraints.push_back(std::move(clo));

        // Leaves on the negative side force form <= -epsilon (strict "< 0").
        MilpConstraint cup;
        cup.name = block.prefix + "n" + std::to_string(ni) + "_up";
        for (std::size_t j = 0; j < kNumFeatures; ++j)
            push_term(cup, block.feature_vars[j], node.beta[1 + j]);
        for (int l : neg_leaves) push_term(cup, u_names[l], up);
        cup.sense = Sense::Le;
        cup.rhs = up - opts.epsilon - node.beta[0];
        block.constraints.push_back(std::move(cup));
    }

    // Product linearization per leaf and the y-hat assembly.
    for (std::size_t l = 0; l < n_leaves; ++l)
        add_product_linearization(block, "l" + std::to_string(l),
                                  tree.leaves[l].alpha, leaf_bounds[l].first,
                                  leaf_bounds[l].second, u_names[l], r_names[l]);

    MilpConstraint ydef;
    ydef.name = block.prefix + "yhat_def";
    for (const std::string& r : r_names) push_term(ydef, r, 1.0);
    push_term(ydef, block.output_var, -1.0);
    ydef.sense = Sense::Eq;
    ydef.rhs = 0.0;
    block.constraints.push_back(std::move(ydef));
    return block;
}

MilpBlock encode_tobit(const TobitModel& model, const FeatureBounds& bounds,
                       int obs_id, const EncodeOptions& opts) {
    MilpBlock block;
    block.prefix = "o" + std::to_string(obs_id) + "_";
    add_feature_vars(block, bounds);

    auto [lo, up] = compute_bigm(model.alpha, bounds);
    require_finite(lo, up, "the linear form", "UnboundedFeature");
    lo -= inflate_slack(lo, opts);
    up += inflate_slack(up, opts);

    const std::string u_pos = block.prefix + "u_pos";
    const std::string u_neg = block.prefix + "u_neg";
    const std::string r_pos = block.prefix + "r_pos";
    const std::string r_neg = block.prefix + "r_neg";
    block.variables.push_back({u_pos, VarKind::Binary, VarRole::Indicator, 0.0, 1.0});
    block.variables.push_back({u_neg, VarKind::Binary, VarRole::Indicator, 0.0, 1.0});
    block.variables.push_back({r_pos, VarKind::Continuous, VarRole::Aux,
                               std::min(lo, 0.0), std::max(up, 0.0)});
    block.variables.push_back({r_neg, VarKind::Continuous, VarRole::Aux, 0.0, 0.0});
    block.output_var = block.prefix + "yhat";
    block.variables.push_back({block.output_var, VarKind::Continuous,
                               VarRole::Output, std::min(lo, 0.0),
                               std::max(up, 0.0)});

    // u_pos = 1 forces form >= 0.
    MilpConstraint ind_pos;
    ind_pos.name = block.prefix + "ind_pos";
    for (std::size_t j = 0; j < kNumFeatures; ++j)
        push_term(ind_pos, block.feature_vars[j], model.alpha[1 + j]);
    push_term(ind_pos, u_pos, lo);
    ind_pos.sense = Sense::Ge;
    ind_pos.rhs = lo - model.alpha[0];
    block.constraints.push_back(std::move(ind_pos));

    // u_neg = 1 forces form <= -epsilon (strict "< 0").
    MilpConstraint ind_neg;
    ind_neg.name = block.prefix + "ind_neg";
    for (std::size_t j = 0; j < kNumFeatures; ++j)
        push_term(ind_neg, block.feature_vars[j], model.alpha[1 + j]);
    push_term(ind_neg, u_neg, up);
    ind_neg.sense = Sense::Le;
    ind_neg.rhs = up - opts.epsilon - model.alpha[0];
    block.constraints.push_back(std::move(ind_neg));

    MilpConstraint onehot;
    onehot.name = block.prefix + "onehot";
    push_term(onehot, u_pos, 1.0);
    push_term(onehot, u_neg, 1.0);
    onehot.sense = Sense::Eq;
    onehot.rhs = 1.0;
    block.constraints.push_back(std::move(onehot));

    add_product_linearization(block, "pos", model.alpha, lo, up, u_pos, r_pos);
    const std::vector<double> zero_form(kNumFeatures + 1, 0.0);
    add_product_linearization(block, "neg", zero_form, 0.0, 0.0, u_neg, r_neg);

    MilpConstraint ydef;
    ydef.name = block.prefix + "yhat_def";
    push_term(ydef, r_pos, 1.0);
    push_term(ydef, r_neg, 1.0);
    push_term(ydef, block.output_var, -1.0);
    ydef.sense = Sense::Eq;
    ydef.rhs = 0.0;
    block.constraints.push_back(std::move(ydef));
    return block;
}

void emit_lp(std::span<const MilpBlock> blocks, std::ostream& out) {
    out << "\\ constraint blocks for UFLS estimation models\n";
    out << "Minimize\n obj:\nSubject To\n";
    for (const MilpBlock& b : blocks) {
        for (const MilpConstraint& c : b.constraints) {
            out << ' ' << c.name << ':';
            for (std::size_t t = 0; t < c.terms.size(); ++t) {
                const auto& [var, coeff] = c.terms[t];
                if (t == 0) {
                    out << ' ' << fmt(coeff) << ' ' << var;
                } else if (coeff < 0.0) {
                    out << " - " << fmt(-coeff) << ' ' << var;
                } else {
                    out << " + " << fmt(coeff) << ' ' << var;
                }
            }
            switch (c.sense) {
                case Sense::Le: out << " <= "; break;
                case Sense::Ge: out << " >= "; break;
                case Sense::Eq: out << " = "; break;
            }
            out << fmt(c.rhs) << '\n';
        }
    }
    out << "Bounds\n";
    for (const MilpBlock& b : blocks)
        for (const MilpVar& v : b.variables)
            if (v.kind == VarKind::Continuous)
                out << ' ' << fmt(v.lb) << " <= " << v.name << " <= " << fmt(v.ub)
                    << '\n';
    out << "Binary\n";
    for (const MilpBlock& b : blocks)
        for (const MilpVar& v : b.variables)
            if (v.kind == VarKind::Binary) out << ' ' << v.name << '\n';
    out << "End\n";
}

void emit_lp_file(std::span<const MilpBlock> blocks, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorClass::Io, "Io", "cannot open '" + path + "' for writing");
    emit_lp(blocks, out);
    if (!out)
        throw Error(ErrorClass::Io, "Io", "write to '" + path + "' failed");
}

void write_manifest(std::span<const MilpBlock> blocks, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorClass::Io, "Io", "cannot open '" + path + "' for writing");
    out << "ufls_lp_manifest v1\n";
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        out << "obs " << i << " prefix " << blocks[i].prefix << " output "
            << blocks[i].output_var << " features";
        for (const std::string& f : blocks[i].feature_vars) out << ' ' << f;
        out << '\n';
    }
    if (!out)
        throw Error(ErrorClass::Io, "Io", "write to '" + path + "' failed");
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream is(line);
    std::string t;
    while (is >> t) toks.push_back(t);
    return toks;
}

bool parse_number(const std::string& s, double& out) {
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return !s.empty() && end == s.c_str() + s.size();
}

} // namespace

std::vector<MilpBlock> parse_lp_file(const std::string& lp_path,
                                     const std::string& manifest_path) {
    std::ifstream mf(manifest_path);
    if (!mf)
        throw Error(ErrorClass::Io, "Io", "cannot open '" + manifest_path + "'");
    std::string line;
    if (!std::getline(mf, line) || line != "ufls_lp_manifest v1")
        throw Error(ErrorClass::Data, "BadManifest",
                    manifest_path + ": missing manifest header");
    std::vector<MilpBlock> blocks;
    while (std::getline(mf, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> toks = tokenize(line);
        // obs <id> prefix <p> output <name> features <f...>
        if (toks.size() < 7 || toks[0] != "obs" || toks[2] != "prefix" ||
            toks[4] != "output" || toks[6] != "features")
            throw Error(ErrorClass::Data, "BadManifest",
                        manifest_path + ": malformed line '" + line + "'");
        MilpBlock b;
        b.prefix = toks[3];
        b.output_var = toks[5];
        for (std::size_t i = 7; i < toks.size(); ++i)
            b.feature_vars.push_back(toks[i]);
        blocks.push_back(std::move(b));
    }

    std::ifstream in(lp_path);
    if (!in)
        throw Error(ErrorClass::Io, "Io", "cannot open '" + lp_path + "'");
    auto fail = [&](std::size_t lineno, const std::string& what) {
        throw Error(ErrorClass::Data, "BadLpFile",
                    lp_path + ":" + std::to_string(lineno) + ": " + what);
    };
    auto block_of = [&](const std::string& name) -> MilpBlock* {
        for (MilpBlock& b : blocks)
            if (name.rfind(b.prefix, 0) == 0) return &b;
        return nullptr;
    };

    enum class Section { Preamble, Objective, Constraints, Bounds, Binary, Done };
    Section section = Section::Preamble;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '\\') continue;
        std::string stripped = line;
        stripped.erase(0, stripped.find_first_not_of(" \t"));
        if (stripped == "Minimize") { section = Section::Objective; continue; }
        if (stripped == "Subject To") { section = Section::Constraints; continue; }
        if (stripped == "Bounds") { section = Section::Bounds; continue; }
        if (stripped == "Binary") { section = Section::Binary; continue; }
        if (stripped == "End") { section = Section::Done; continue; }

        if (section == Section::Objective) continue; // placeholder objective
        if (section == Section::Constraints) {
            const std::size_t colon = stripped.find(':');
            if (colon == std::string::npos) fail(lineno, "missing constraint name");
            MilpConstraint c;
            c.name = stripped.substr(0, colon);
            const std::vector<std::string> toks = tokenize(stripped.substr(colon + 1));
            double sign = 1.0;
            std::size_t i = 0;
            bool have_sense = false;
            while (i < toks.size()) {
                if (toks[i] == "+") { sign = 1.0; ++i; continue; }
                if (toks[i] == "-") { sign = -1.0; ++i; continue; }
                if (toks[i] == "<=" || toks[i] == ">=" || toks[i] == "=") {
                    c.sense = toks[i] == "<=" ? Sense::Le
                              : toks[i] == ">=" ? Sense::Ge : Sense::Eq;
                    if (i + 1 != toks.size() - 1) fail(lineno, "malformed rhs");
                    if (!parse_number(toks[i + 1], c.rhs)) fail(lineno, "bad rhs");
                    have_sense = true;
                    break;
                }
                double coeff;
                if (!parse_number(toks[i], coeff)) fail(lineno, "bad coefficient '" + toks[i] + "'");
                if (i + 1 >= toks.size()) fail(lineno, "dangling coefficient");
                c.terms.emplace_back(toks[i + 1], sign * coeff);
                sign = 1.0;
                i += 2;
            }
            if (!have_sense) fail(lineno, "missing constraint sense");
            MilpBlock* b = block_of(c.name);
            if (!b) fail(lineno, "constraint '" + c.name + "' matches no manifest prefix");
            b->constraints.push_back(std::move(c));
            continue;
        }
        if (section == Section::Bounds) {
            const std::vector<std::string> toks = tokenize(stripped);
            if (toks.size() != 5 || toks[1] != "<=" || toks[3] != "<=")
                fail(lineno, "malformed bounds line");
            MilpVar v;
            if (!parse_number(toks[0], v.lb) || !parse_number(toks[4], v.ub))
                fail(lineno, "bad bound value");
            v.name = toks[2];
            v.kind = VarKind::Continuous;
            if (v.name.find("_x_") != std::string::npos) v.role = VarRole::Feature;
            else if (v.name.size() >= 5 &&
                     v.name.compare(v.name.size() - 5, 5, "_yhat") == 0)
                v.role = VarRole::Output;
            else v.role = VarRole::Aux;
            MilpBlock* b = block_of(v.name);
            if (!b) fail(lineno, "variable '" + v.name + "' matches no manifest prefix");
            b->variables.push_back(std::move(v));
            continue;
        }
        if (section == Section::Binary) {
            const std::vector<std::string> toks = tokenize(stripped);
            if (toks.size() != 1) fail(lineno, "malformed binary line");
            MilpVar v;
            v.name = toks[0];
            v.kind = VarKind::Binary;
            v.role = VarRole::Indicator;
            v.lb = 0.0;
            v.ub = 1.0;
            MilpBlock* b = block_of(v.name);
            if (!b) fail(lineno, "variable '" + v.name + "' matches no manifest prefix");
            b->variables.push_back(std::move(v));
            continue;
        }
        fail(lineno, "unexpected content before a section header");
    }
    if (section != Section::Done)
        throw Error(ErrorClass::Data, "BadLpFile", lp_path + ": missing End marker");
    return blocks;
}

VerifyReport verify_encoding(const MilpBlock& block,
                             std::span<const double> features, double expected,
                             double tol) {
    VerifyReport report;
    if (features.size() != block.feature_vars.size())
        throw Error(ErrorClass::Verification, "LengthMismatch",
                    "feature vector does not match the block");

    std::vector<const MilpVar*> binaries;
    for (const MilpVar& v : block.variables)
        if (v.kind == VarKind::Binary) binaries.push_back(&v);
    if (binaries.size() > 20)
        throw Error(ErrorClass::Verification, "TooManyBinaries",
                    "brute-force enumeration over " +
                        std::to_string(binaries.size()) + " binaries refused");

    // Feasibility slack: must stay well under the strict-inequality epsilon.
    const double feas_tol = 1e-9 * std::max(1.0, std::fabs(expected)) + 1e-9;
    const double pin_tol = 1e-7;

    double best_yhat = 0.0;
    for (std::uint64_t mask = 0; mask < (1ull << binaries.size()); ++mask) {
        std::map<std::string, double> value;
        for (std::size_t j = 0; j < features.size(); ++j)
            value[block.feature_vars[j]] = features[j];
        for (std::size_t bi = 0; bi < binaries.size(); ++bi)
            value[binaries[bi]->name] = (mask >> bi) & 1 ? 1.0 : 0.0;

        // Interval state for the not-yet-pinned continuous variables.
        std::map<std::string, std::pair<double, double>> interval;
        for (const MilpVar& v : block.variables)
            if (v.kind == VarKind::Continuous && !value.count(v.name) &&
                v.role != VarRole::Feature)
                interval[v.name] = {-std::numeric_limits<double>::infinity(),
                                    std::numeric_limits<double>::infinity()};

        bool infeasible = false;
        std::string excluded_by;

        auto tighten = [&](const std::string& var, double lo, double up,
                           const std::string& cname) {
            auto& iv = interval[var];
            iv.first = std::max(iv.first, lo);
            iv.second = std::min(iv.second, up);
            if (iv.first > iv.second + pin_tol) {
                infeasible = true;
                excluded_by = cname;
            }
        };

        for (int pass = 0; pass < 8 && !infeasible; ++pass) {
            bool progress = false;
            for (const MilpConstraint& c : block.constraints) {
                if (infeasible) break;
                double fixed = 0.0;
                std::string unknown;
                double unknown_coeff = 0.0;
                int n_unknown = 0;
                for (const auto& [var, coeff] : c.terms) {
                    auto it = value.find(var);
                    if (it != value.end()) {
                        fixed += coeff * it->second;
                    } else {
                        ++n_unknown;
                        unknown = var;
                        unknown_coeff = coeff;
                    }
                }
                if (n_unknown == 0) {
                    const double lhs = fixed;
                    const bool ok = c.sense == Sense::Le ? lhs <= c.rhs + feas_tol
                                    : c.sense == Sense::Ge ? lhs >= c.rhs - feas_tol
                                    : std::fabs(lhs - c.rhs) <= feas_tol;
                    if (!ok) {
                        infeasible = true;
                        excluded_by = c.name;
                    }
                    continue;
                }
                if (n_unknown > 1) continue; // handled once the r's are pinned
                const double rest = (c.rhs - fixed) / unknown_coeff;
                const bool flip = unknown_coeff < 0.0;
                switch (c.sense) {
                    case Sense::Le:
                        if (flip) tighten(unknown, rest, std::numeric_limits<double>::infinity(), c.name);
                        else tighten(unknown, -std::numeric_limits<double>::infinity(), rest, c.name);
                        break;
                    case Sense::Ge:
                        if (flip) tighten(unknown, -std::numeric_limits<double>::infinity(), rest, c.name);
                        else tighten(unknown, rest, std::numeric_limits<double>::infinity(), c.name);
                        break;
                    case Sense::Eq:
                        tighten(unknown, rest, rest, c.name);
                        break;
                }
            }
            if (infeasible) break;
            // Pin intervals that have collapsed.
            for (auto it = interval.begin(); it != interval.end();) {
                const auto& [lo, up] = it->second;
                if (std::isfinite(lo) && std::isfinite(up) && up - lo <= pin_tol) {
                    value[it->first] = 0.5 * (lo + up);
                    it = interval.erase(it);
                    progress = true;
                } else {
                    ++it;
                }
            }
            if (!progress && pass > 0) break;
        }

        if (!infeasible && !interval.empty()) {
            // A variable the constraints do not pin: not an encoding this
            // verifier understands.
            report.detail = "unresolved continuous variable '" +
                            interval.begin()->first + "'";
            infeasible = true;
            excluded_by = "<unresolved>";
        }

        // Declared bounds of aux/output variables must hold as well.
        if (!infeasible) {
            for (const MilpVar& v : block.variables) {
                if (v.kind != VarKind::Continuous || v.role == VarRole::Feature)
                    continue;
                const double val = value[v.name];
                if (val < v.lb - pin_tol || val > v.ub + pin_tol) {
                    infeasible = true;
                    excluded_by = "bounds of " + v.name;
                    break;
                }
            }
        }

        if (infeasible) {
            report.exclusions.push_back("assignment " + std::to_string(mask) +
                                        " excluded by " + excluded_by);
            continue;
        }
        ++report.n_feasible;
        best_yhat = value[block.output_var];
    }

    report.yhat = best_yhat;
    if (report.n_feasible == 0) {
        report.status = VerifyReport::Status::NoFeasibleAssignment;
    } else if (report.n_feasible > 1) {
        report.status = VerifyReport::Status::MultipleFeasibleAssignments;
    } else if (std::fabs(best_yhat - expected) <= tol) {
        report.status = VerifyReport::Status::Pass;
    } else {
        report.status = VerifyReport::Status::Mismatch;
        report.detail = "yhat " + fmt(best_yhat) + " vs expected " + fmt(expected);
    }
    return report;
}

} // namespace ufls
