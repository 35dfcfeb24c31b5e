#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "ufls/tobit.hpp"
#include "ufls/tree.hpp"

namespace ufls {

// Plain-text model persistence. Doubles are written with 17 significant
// digits, so save/load round-trips are value-exact. Both model kinds share
// one file family distinguished by the header line:
//
//   ufls_model v1 tree|tobit
//
// A loaded file carries exactly one model; `kind` tells which.
struct ModelFile {
    enum class Kind { Tree, Tobit };
    Kind kind = Kind::Tree;
    std::optional<RegressionTree> tree;
    std::optional<TobitModel> tobit;
    FeatureBounds feature_bounds{};
};

void save_tree(const RegressionTree& tree, const std::string& path);
void save_tobit(const TobitModel& model, const FeatureBounds& bounds,
                const std::string& path);

void write_tree(const RegressionTree& tree, std::ostream& out);
void write_tobit(const TobitModel& model, const FeatureBounds& bounds,
                 std::ostream& out);

ModelFile load_model(const std::string& path);
ModelFile read_model(std::istream& in, const std::string& origin = "<stream>");

} // namespace ufls
