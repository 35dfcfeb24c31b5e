#include "ufls/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ufls/errors.hpp"

namespace ufls {

namespace {

struct Parser {
    std::istream& in;
    std::string origin;
    std::size_t lineno = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorClass::Config, "BadConfig",
                    origin + ":" + std::to_string(lineno) + ": " + what);
    }

    double num(const std::string& tok) const {
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (tok.empty() || end != tok.c_str() + tok.size())
            fail("bad number '" + tok + "'");
        return v;
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

PipelineConfig parse_config(std::istream& in, const std::string& origin) {
    Parser p{in, origin};
    PipelineConfig cfg;
    bool have_ufls = false, have_scenario = false;

    std::string section;
    GeneratingUnit* current_unit = nullptr;
    std::string line;
    while (std::getline(in, line)) {
        ++p.lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream is(line);
        std::vector<std::string> toks;
        std::string t;
        while (is >> t) toks.push_back(t);
        if (toks.empty()) continue;

        if (toks[0].front() == '[') {
            std::string joined = toks[0];
            for (std::size_t i = 1; i < toks.size(); ++i) joined += " " + toks[i];
            if (joined.back() != ']') p.fail("malformed section header");
            const std::string name = joined.substr(1, joined.size() - 2);
            if (name.rfind("unit ", 0) == 0) {
                const std::string id = name.substr(5);
                if (id.empty()) p.fail("unit section needs an id");
                for (const GeneratingUnit& u : cfg.units)
                    if (u.id == id) p.fail("duplicate unit '" + id + "'");
                cfg.units.emplace_back();
                cfg.units.back().id = id;
                current_unit = &cfg.units.back();
                section = "unit";
            } else if (name == "ufls" || name == "system" || name == "sim" ||
                       name == "scenario" || name == "split" || name == "tree" ||
                       name == "encode") {
                section = name;
                current_unit = nullptr;
                if (name == "ufls") have_ufls = true;
                if (name == "scenario") have_scenario = true;
            } else {
                p.fail("unknown section '" + name + "'");
            }
            continue;
        }

        const std::string& key = toks[0];
        auto want = [&](std::size_t n_values) {
            if (toks.size() != 1 + n_values)
                p.fail("key '" + key + "' expects " + std::to_string(n_values) +
                       " value(s)");
        };

        if (section == "unit") {
            want(1);
            const double v = p.num(toks[1]);
            GeneratingUnit& u = *current_unit;
            if (key == "p_min") u.p_min = v;
            else if (key == "p_max") u.p_max = v;
            else if (key == "rated") u.rated = v;
            else if (key == "inertia_h") u.h = v;
            else if (key == "gov_gain") u.k_gov = v;
            else if (key == "gov_tconst") u.t_gov = v;
            else if (key == "cost_a") u.cost_a = v;
            else if (key == "cost_b") u.cost_b = v;
            else if (key == "cost_c") u.cost_c = v;
            else p.fail("unknown unit key '" + key + "'");
        } else if (section == "ufls") {
            if (key == "stage") {
                want(3);
                cfg.scheme.stages.push_back(
                    {p.num(toks[1]), p.num(toks[2]), p.num(toks[3])});
            } else if (key == "f_nominal") {
                want(1);
                cfg.scheme.f_nominal = p.num(toks[1]);
            } else if (key == "breaker_delay") {
                want(1);
                cfg.scheme.breaker_delay = p.num(toks[1]);
            } else {
                p.fail("unknown ufls key '" + key + "'");
            }
        } else if (section == "system") {
            want(1);
            if (key == "load_damping") cfg.load_damping = p.num(toks[1]);
            else p.fail("unknown system key '" + key + "'");
        } else if (section == "sim") {
            want(1);
            if (key == "dt") cfg.sim.dt = p.num(toks[1]);
            else if (key == "horizon") cfg.sim.horizon = p.num(toks[1]);
            else p.fail("unknown sim key '" + key + "'");
        } else if (section == "scenario") {
            want(1);
            if (key == "step") cfg.scenario.step = p.num(toks[1]);
            else if (key == "gen_min") cfg.scenario.gen_min = p.num(toks[1]);
            else if (key == "gen_max") cfg.scenario.gen_max = p.num(toks[1]);
            else if (key == "keep_per_level")
                cfg.scenario.keep_per_level = static_cast<int>(p.num(toks[1]));
            else p.fail("unknown scenario key '" + key + "'");
        } else if (section == "split") {
            want(1);
            if (key == "test_fraction") cfg.split.test_fraction = p.num(toks[1]);
            else if (key == "seed")
                cfg.split.seed = static_cast<std::uint64_t>(p.num(toks[1]));
            else p.fail("unknown split key '" + key + "'");
        } else if (section == "tree") {
            want(1);
            if (key == "max_depth") cfg.tree.max_depth = static_cast<int>(p.num(toks[1]));
            else if (key == "min_leaf_size")
                cfg.tree.min_leaf_size = static_cast<std::size_t>(p.num(toks[1]));
            else if (key == "c_step") cfg.tree.c_step = p.num(toks[1]);
            else if (key == "improvement_tol") cfg.tree.improvement_tol = p.num(toks[1]);
            else p.fail("unknown tree key '" + key + "'");
        } else if (section == "encode") {
            want(1);
            if (key == "epsilon") cfg.encode.epsilon = p.num(toks[1]);
            else if (key == "slack_rel") cfg.encode.slack_rel = p.num(toks[1]);
            else if (key == "slack_abs") cfg.encode.slack_abs = p.num(toks[1]);
            else p.fail("unknown encode key '" + key + "'");
        } else {
            p.fail("key '" + key + "' outside any section");
        }
    }

    p.lineno = 0; // whole-file validation below
    if (cfg.units.empty())
        throw Error(ErrorClass::Config, "BadConfig",
                    origin + ": at least one [unit <id>] section is required");
    if (!have_ufls)
        throw Error(ErrorClass::Config, "BadConfig",
                    origin + ": the [ufls] section is required");
    if (!have_scenario)
        throw Error(ErrorClass::Config, "BadConfig",
                    origin + ": the [scenario] section is required");
    std::sort(cfg.units.begin(), cfg.units.end(),
              [](const GeneratingUnit& a, const GeneratingUnit& b) {
                  return a.id < b.id;
              });
    try {
        for (const GeneratingUnit& u : cfg.units) u.validate();
        cfg.scheme.validate();
        cfg.sim.validate();
    } catch (const Error& e) {
        throw Error(ErrorClass::Config, e.code(), origin + ": " + e.what());
    }
    if (cfg.load_damping < 0.0)
        throw Error(ErrorClass::Config, "BadConfig",
                    origin + ": load_damping must be >= 0");
    if (!(cfg.scenario.step > 0.0) || cfg.scenario.gen_min > cfg.scenario.gen_max)
        throw Error(ErrorClass::Config, "BadConfig",
                    origin + ": bad scenario window or step");
    if (cfg.scenario.keep_per_level < 1)
        throw Error(ErrorClass::Config, "BadConfig",
                    origin + ": keep_per_level must be >= 1");
    if (!(cfg.split.test_fraction > 0.0 && cfg.split.test_fraction < 1.0))
        throw Error(ErrorClass::Config, "BadConfig",
                    origin + ": test_fraction must be in (0, 1)");
    if (cfg.tree.max_depth < 0 || cfg.tree.min_leaf_size < 1 ||
        !(cfg.tree.c_step > 0.0))
        throw Error(ErrorClass::Config, "BadConfig",
                    origin + ": bad tree hyperparameters");
    if (!(cfg.encode.epsilon > 0.0) || cfg.encode.slack_rel < 0.0 ||
        cfg.encode.slack_abs < cfg.encode.epsilon)
        throw Error(ErrorClass::Config, "BadConfig",
                    origin + ": encode slack must cover epsilon");
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorClass::Io, "Io", "cannot open '" + path + "'");
    return parse_config(in, path);
}

std::string render_config(const PipelineConfig& cfg) {
    std::ostringstream os;
    for (const GeneratingUnit& u : cfg.units) {
        os << "[unit " << u.id << "]\n";
        os << "p_min " << fmt(u.p_min) << "\np_max " << fmt(u.p_max)
           << "\nrated " << fmt(u.rated) << "\ninertia_h " << fmt(u.h)
           << "\ngov_gain " << fmt(u.k_gov) << "\ngov_tconst " << fmt(u.t_gov)
           << "\ncost_a " << fmt(u.cost_a) << "\ncost_b " << fmt(u.cost_b)
           << "\ncost_c " << fmt(u.cost_c) << "\n\n";
    }
    os << "[ufls]\nf_nominal " << fmt(cfg.scheme.f_nominal) << "\n";
    for (const UflsStage& s : cfg.scheme.stages)
        os << "stage " << fmt(s.f_threshold) << ' ' << fmt(s.shed_fraction) << ' '
           << fmt(s.relay_delay) << "\n";
    os << "breaker_delay " << fmt(cfg.scheme.breaker_delay) << "\n\n";
    os << "[system]\nload_damping " << fmt(cfg.load_damping) << "\n\n";
    os << "[sim]\ndt " << fmt(cfg.sim.dt) << "\nhorizon " << fmt(cfg.sim.horizon)
       << "\n\n";
    os << "[scenario]\nstep " << fmt(cfg.scenario.step) << "\ngen_min "
       << fmt(cfg.scenario.gen_min) << "\ngen_max " << fmt(cfg.scenario.gen_max)
       << "\nkeep_per_level " << cfg.scenario.keep_per_level << "\n\n";
    os << "[split]\ntest_fraction " << fmt(cfg.split.test_fraction) << "\nseed "
       << cfg.split.seed << "\n\n";
    os << "[tree]\nmax_depth " << cfg.tree.max_depth << "\nmin_leaf_size "
       << cfg.tree.min_leaf_size << "\nc_step " << fmt(cfg.tree.c_step)
       << "\nimprovement_tol " << fmt(cfg.tree.improvement_tol) << "\n\n";
    os << "[encode]\nepsilon " << fmt(cfg.encode.epsilon) << "\nslack_rel "
       << fmt(cfg.encode.slack_rel) << "\nslack_abs " << fmt(cfg.encode.slack_abs)
       << "\n";
    return os.str();
}

} // namespace ufls
