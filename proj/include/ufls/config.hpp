#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ufls/scenario.hpp"
#include "ufls/tree.hpp"
#include "ufls/units.hpp"

namespace ufls {

struct SplitConfig {
    double test_fraction = 0.2;
    std::uint64_t seed = 1;
};

struct EncodeConfig {
    double epsilon = 1e-6;
    double slack_rel = 0.01;
    double slack_abs = 1e-4;
};

// Full pipeline configuration read from one plain-text file; see README for
// the schema. Section/key validation is strict: unknown keys are errors.
struct PipelineConfig {
    std::vector<GeneratingUnit> units; // sorted by id
    UflsScheme scheme;
    double load_damping = 1.0;
    SimConfig sim;
    ScenarioRules scenario;
    SplitConfig split;
    TreeConfig tree;
    EncodeConfig encode;
};

PipelineConfig load_config(const std::string& path);
PipelineConfig parse_config(std::istream& in, const std::string& origin);

// Canonical re-rendering of a parsed config (used in run manifests).
std::string render_config(const PipelineConfig& cfg);

} // namespace ufls
