#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ufls/dataset.hpp"
#include "ufls/tobit.hpp"
#include "ufls/tree.hpp"

namespace ufls {

enum class VarKind { Continuous, Binary };
// Role in the encoding: feature symbols are the externally-fixed inputs a
// host optimization would supply, aux variables are the linearization r's,
// output is the materialized y-hat.
enum class VarRole { Feature, Indicator, Aux, Output };

struct MilpVar {
    std::string name;
    VarKind kind = VarKind::Continuous;
    VarRole role = VarRole::Aux;
    double lb = 0.0;
    double ub = 0.0;
};

enum class Sense { Le, Ge, Eq };

struct MilpConstraint {
    std::string name;
    std::vector<std::pair<std::string, double>> terms; // (variable, coefficient)
    Sense sense = Sense::Le;
    double rhs = 0.0;
};

// Per-observation variable/constraint counts. n_continuous counts the aux
// variables only; the materialized y-hat variable is reported separately
// (n_output) and feature symbols belong to the host problem.
struct EncodingStats {
    std::size_t n_constraints = 0;
    std::size_t n_binary = 0;
    std::size_t n_continuous = 0;
    std::size_t n_output = 0;
};

struct MilpBlock {
    std::string prefix; // e.g. "o0_"; every variable/constraint name starts with it
    std::vector<MilpVar> variables;
    std::vector<MilpConstraint> constraints;
    std::string output_var;
    std::vector<std::string> feature_vars; // in feature order

    EncodingStats stats() const;
    const MilpVar* find_var(const std::string& name) const;
};

// Where the big-M bounds come from: the per-node/leaf training-data bounds
// stored in the tree (tighter relaxation, valid for in-distribution points)
// or interval arithmetic over the feature box (valid for any in-box point).
enum class BigMSource { TrainingData, FeatureBox };

struct EncodeOptions {
    double epsilon = 1e-6;      // strict-inequality offset, in linear-form units
    double slack_rel = 0.01;    // relative big-M inflation
    double slack_abs = 1e-4;    // absolute inflation floor (must exceed epsilon)
    BigMSource bigm_source = BigMSource::TrainingData;
};

// Interval-arithmetic bounds of coeffs[0] + sum coeffs[1+j]*x_j over the
// feature box.
std::pair<double, double> compute_bigm(std::span<const double> coeffs,
                                       const FeatureBounds& bounds);

// Tree encoding: a one-hot over leaf indicators, two big-M constraints per
// node tying the sign of its linear form to the leaf indicators of each
// subtree (the strict side realized as <= M - epsilon), four product
// linearization constraints per leaf, and the y-hat assembly. Throws
// UnboundedNode / UnboundedFeature when a required bound is not finite.
MilpBlock encode_tree(const RegressionTree& tree, int obs_id,
                      const EncodeOptions& opts = {});

// Tobit encoding: two side indicators with a one-hot, four linearization
// constraints for (alpha-form) * u_pos, four for the constant-zero side, and
// the y-hat assembly: 12 constraints, 2 binaries, 2 aux continuous.
MilpBlock encode_tobit(const TobitModel& model, const FeatureBounds& bounds,
                       int obs_id, const EncodeOptions& opts = {});

// LP-format text emission (CPLEX dialect): placeholder zero objective,
// "Subject To", "Bounds", "Binary", "End". Deterministic bytes for a fixed
// block list.
void emit_lp(std::span<const MilpBlock> blocks, std::ostream& out);
void emit_lp_file(std::span<const MilpBlock> blocks, const std::string& path);

// Observation manifest: one line per block mapping the observation id to its
// variable-name prefix, plus the output/feature variable names.
void write_manifest(std::span<const MilpBlock> blocks, const std::string& path);

// Minimal reader for the dialect emit_lp writes. Returns blocks grouped by
// the manifest prefixes; roles are recovered from the name conventions.
std::vector<MilpBlock> parse_lp_file(const std::string& lp_path,
                                     const std::string& manifest_path);

// Brute-force encoding check at a fixed feature vector: enumerate all binary
// assignments, solve the pinned linear system for the aux variables, and
// compare the unique feasible y-hat against `expected`.
struct VerifyReport {
    enum class Status { Pass, Mismatch, NoFeasibleAssignment, MultipleFeasibleAssignments };
    Status status = Status::NoFeasibleAssignment;
    double yhat = 0.0;          // from the unique feasible assignment, if any
    std::size_t n_feasible = 0;
    // For each infeasible assignment, the name of a constraint that excluded it.
    std::vector<std::string> exclusions;
    std::string detail;
};

VerifyReport verify_encoding(const MilpBlock& block,
                             std::span<const double> features, double expected,
                             double tol = 1e-6);

} // namespace ufls
