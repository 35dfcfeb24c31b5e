// Command-line front end for the UFLS estimation pipeline:
// simulate / generate / label / analyze / train / encode / verify / pipeline.

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "ufls/config.hpp"
#include "ufls/dataset.hpp"
#include "ufls/errors.hpp"
#include "ufls/kernels.hpp"
#include "ufls/milp.hpp"
#include "ufls/model_io.hpp"
#include "ufls/scenario.hpp"
#include "ufls/sfr.hpp"
#include "ufls/stats.hpp"
#include "ufls/tobit.hpp"
#include "ufls/tree.hpp"

namespace fs = std::filesystem;
using namespace ufls;

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// "unit=MW,unit=MW,..." -> OperatingPoint (demand = dispatch total).
OperatingPoint parse_combo_spec(const std::string& spec,
                                const PipelineConfig& cfg) {
    OperatingPoint op;
    op.load_damping = cfg.load_damping;
    std::stringstream ss(spec);
    std::string item;
    double total = 0.0;
    while (std::getline(ss, item, ',')) {
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorClass::Usage, "BadComboSpec",
                        "expected unit=MW, got '" + item + "'");
        const std::string id = item.substr(0, eq);
        char* end = nullptr;
        const std::string val = item.substr(eq + 1);
        const double mw = std::strtod(val.c_str(), &end);
        if (val.empty() || end != val.c_str() + val.size())
            throw Error(ErrorClass::Usage, "BadComboSpec",
                        "bad dispatch value '" + val + "'");
        unit_by_id(cfg.units, id); // existence check
        if (mw > 0.0) op.dispatch.push_back({id, mw});
        total += mw;
    }
    op.demand = total;
    std::sort(op.dispatch.begin(), op.dispatch.end(),
              [](const DispatchEntry& a, const DispatchEntry& b) {
                  return a.unit_id < b.unit_id;
              });
    op.validate(cfg.units);
    return op;
}

int cmd_simulate(const std::string& config_path, const std::string& combo_spec,
                 const std::string& lost, const std::string& traj_path) {
    const PipelineConfig cfg = load_config(config_path);
    const OperatingPoint op = parse_combo_spec(combo_spec, cfg);
    SimConfig sim = cfg.sim;
    sim.record_trajectory = !traj_path.empty();
    const SimResult res = simulate_outage(op, cfg.units, lost, cfg.scheme, sim);

    std::printf("outage of %s (%.17g MW), demand %.17g MW\n", lost.c_str(),
                op.find(lost)->mw, op.demand);
    std::printf("ufls_total_mw %.17g\n", res.ufls_total);
    std::printf("f_nadir_hz %.17g\n", res.f_nadir);
    std::printf("f_qss_hz %.17g\n", res.f_qss);
    std::printf("stages_fired %zu\n", res.fired_stages.size());
    for (const FiredStage& s : res.fired_stages)
        std::printf("stage %d fired_at_s %.17g\n", s.stage, s.time);
    if (!traj_path.empty()) {
        std::ofstream out(traj_path);
        if (!out)
            throw Error(ErrorClass::Io, "Io", "cannot open '" + traj_path + "'");
        out << "t,f\n";
        for (const auto& [t, f] : res.trajectory)
            out << fmt(t) << ',' << fmt(f) << '\n';
        std::printf("trajectory -> %s\n", traj_path.c_str());
    }
    return 0;
}

int cmd_generate(const std::string& config_path, const std::string& out_path) {
    const PipelineConfig cfg = load_config(config_path);
    auto combos = enumerate_combinations(cfg.units, cfg.scenario.step,
                                         cfg.scenario.gen_min,
                                         cfg.scenario.gen_max);
    const std::size_t raw = combos.size();
    combos = rank_and_prune(combos, cfg.scenario.keep_per_level);
    write_combos_csv(combos, cfg.units, out_path);
    std::printf("enumerated %zu combinations, retained %zu -> %s\n", raw,
                combos.size(), out_path.c_str());
    return 0;
}

int cmd_label(const std::string& config_path, const std::string& combos_path,
              const std::string& out_path, unsigned workers, bool resume,
              bool quiet) {
    const PipelineConfig cfg = load_config(config_path);
    const auto combos = read_combos_csv(combos_path, cfg.units);

    LabelProgress progress = nullptr;
    if (!quiet)
        progress = [](std::size_t done, std::size_t total) {
            std::fprintf(stderr, "\rlabeled %zu/%zu", done, total);
            if (done == total) std::fprintf(stderr, "\n");
        };

    Dataset ds;
    if (resume && fs::exists(out_path)) {
        const Dataset previous = read_csv_file(out_path);
        std::fprintf(stderr, "resuming: %zu labeled rows found\n",
                     previous.size());
        ds = build_dataset_resume(combos, cfg.units, cfg.scheme, cfg.sim,
                                  cfg.load_damping, previous, workers, progress);
    } else {
        ds = build_dataset(combos, cfg.units, cfg.scheme, cfg.sim,
                           cfg.load_damping, workers, progress);
    }
    write_csv_file(ds, out_path);
    std::printf("labeled %zu outage samples -> %s\n", ds.size(), out_path.c_str());
    return 0;
}

int cmd_analyze(const std::string& dataset_path, const std::string& out_path) {
    const Dataset ds = read_csv_file(dataset_path);
    if (ds.empty())
        throw Error(ErrorClass::Data, "EmptyDataset",
                    "dataset '" + dataset_path + "' has no rows");
    const CorrelationMatrix m = correlation_matrix(ds);
    if (!out_path.empty()) write_correlation_csv(m, out_path);

    std::printf("rows %zu\n", ds.size());
    std::size_t zeros = 0;
    double ymax = 0.0;
    for (const OutageSample& s : ds.rows()) {
        if (s.y == 0.0) ++zeros;
        ymax = std::max(ymax, s.y);
    }
    std::printf("zero-UFLS rows %zu (%.2f%%), max UFLS %.3f MW\n", zeros,
                100.0 * static_cast<double>(zeros) / static_cast<double>(ds.size()),
                ymax);
    std::printf("pearson correlation with y: ");
    for (std::size_t j = 0; j < kNumFeatures; ++j)
        std::printf("%s=%.4f ", kFeatureNames[j].c_str(), m.r[j][4]);
    std::printf("\n");
    if (!out_path.empty()) std::printf("matrix -> %s\n", out_path.c_str());
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& dataset_path,
              const std::string& model_kind, const std::string& model_path,
              const std::string& report_path, const std::string& residuals_path) {
    const PipelineConfig cfg = load_config(config_path);
    const Dataset ds = read_csv_file(dataset_path);
    const auto [train, test] = split(ds, cfg.split.test_fraction, cfg.split.seed);

    std::string report;
    if (model_kind == "tree") {
        const RegressionTree tree = build_tree(train, cfg.tree);
        save_tree(tree, model_path);
        const TreeEvaluation ev = evaluate(tree, test);
        report = evaluation_report(tree, ev);
        if (!residuals_path.empty()) {
            std::ofstream out(residuals_path);
            out << "residual\n";
            for (double r : ev.residuals) out << fmt(r) << '\n';
        }
    } else if (model_kind == "tobit") {
        const TobitModel model = fit_tobit(train);
        save_tobit(model, train.feature_bounds(), model_path);
        std::vector<double> preds, labels, feat(kNumFeatures);
        std::ostringstream res_out;
        res_out << "residual\n";
        for (const OutageSample& s : test.rows()) {
            for (std::size_t j = 0; j < kNumFeatures; ++j) feat[j] = s.feature(j);
            preds.push_back(predict_tobit(model, feat));
            labels.push_back(s.y);
            res_out << fmt(preds.back() - s.y) << '\n';
        }
        std::ostringstream os;
        os << "tobit model: sigma " << fmt(model.sigma) << ", loglik "
           << fmt(model.loglik) << (model.converged ? "" : " (not converged)")
           << (model.none_censored ? " (no censored rows: OLS)" : "") << "\n";
        os << "alpha (intercept";
        for (const std::string& f : kFeatureNames) os << ", " << f;
        os << "):";
        for (double a : model.alpha) os << ' ' << fmt(a);
        os << "\ntest MAE: " << fmt(mean_abs_error(preds, labels)) << " MW\n";
        report = os.str();
        if (!residuals_path.empty()) {
            std::ofstream out(residuals_path);
            out << res_out.str();
        }
    } else {
        throw Error(ErrorClass::Usage, "BadModelKind",
                    "model must be 'tree' or 'tobit', got '" + model_kind + "'");
    }
    std::fputs(report.c_str(), stdout);
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        if (!out)
            throw Error(ErrorClass::Io, "Io", "cannot open '" + report_path + "'");
        out << report;
    }
    std::printf("model -> %s\n", model_path.c_str());
    return 0;
}

std::vector<MilpBlock> encode_model(const ModelFile& mf, int n_observations,
                                    const EncodeConfig& ec) {
    EncodeOptions opts;
    opts.epsilon = ec.epsilon;
    opts.slack_rel = ec.slack_rel;
    opts.slack_abs = ec.slack_abs;
    std::vector<MilpBlock> blocks;
    for (int i = 0; i < n_observations; ++i) {
        if (mf.kind == ModelFile::Kind::Tree)
            blocks.push_back(encode_tree(*mf.tree, i, opts));
        else
            blocks.push_back(encode_tobit(*mf.tobit, mf.feature_bounds, i, opts));
    }
    return blocks;
}

int cmd_encode(const std::string& config_path, const std::string& model_path,
               int n_observations, const std::string& lp_path,
               const std::string& manifest_path) {
    EncodeConfig ec;
    if (!config_path.empty()) ec = load_config(config_path).encode;
    const ModelFile mf = load_model(model_path);
    const auto blocks = encode_model(mf, n_observations, ec);
    emit_lp_file(blocks, lp_path);
    write_manifest(blocks, manifest_path);

    const EncodingStats st = blocks.front().stats();
    std::printf("%d observation block(s) -> %s (manifest %s)\n", n_observations,
                lp_path.c_str(), manifest_path.c_str());
    std::printf("per observation: %zu constraints, %zu binary, %zu continuous "
                "(+1 output variable)\n",
                st.n_constraints, st.n_binary, st.n_continuous);
    return 0;
}

int cmd_verify(const std::string& model_path, const std::string& lp_path,
               const std::string& manifest_path, const std::string& dataset_path,
               std::size_t n_samples, std::uint64_t seed, unsigned workers,
               const std::string& report_path) {
    const ModelFile mf = load_model(model_path);
    const auto blocks = parse_lp_file(lp_path, manifest_path);
    if (blocks.empty())
        throw Error(ErrorClass::Data, "BadManifest", "no blocks in manifest");
    const Dataset ds = read_csv_file(dataset_path);
    if (ds.empty())
        throw Error(ErrorClass::Data, "EmptyDataset", "dataset has no rows");

    // Sampled dataset rows are in-distribution by construction, which is the
    // regime the training-data big-M bounds are valid for.
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> picks(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i)
        picks[i] = static_cast<std::size_t>(rng() % ds.size());

    std::vector<VerifyReport> reports(n_samples);
    std::atomic<std::size_t> next{0};
    auto worker_loop = [&] {
        std::vector<double> feat(kNumFeatures);
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_samples) break;
            const OutageSample& s = ds.rows()[picks[i]];
            for (std::size_t j = 0; j < kNumFeatures; ++j) feat[j] = s.feature(j);
            const double expected = mf.kind == ModelFile::Kind::Tree
                                        ? mf.tree->predict(feat)
                                        : predict_tobit(*mf.tobit, feat);
            const MilpBlock& block = blocks[i % blocks.size()];
            reports[i] = verify_encoding(block, feat, expected);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < std::max(1u, workers); ++w)
        pool.emplace_back(worker_loop);
    worker_loop();
    for (std::thread& t : pool) t.join();

    std::size_t pass = 0;
    std::ostringstream detail;
    for (std::size_t i = 0; i < n_samples; ++i) {
        if (reports[i].status == VerifyReport::Status::Pass) {
            ++pass;
            continue;
        }
        detail << "sample " << i << " (row " << picks[i] << "): ";
        switch (reports[i].status) {
            case VerifyReport::Status::Mismatch: detail << "mismatch"; break;
            case VerifyReport::Status::NoFeasibleAssignment:
                detail << "no feasible assignment";
                break;
            case VerifyReport::Status::MultipleFeasibleAssignments:
                detail << "multiple feasible assignments";
                break;
            default: detail << "?";
        }
        if (!reports[i].detail.empty()) detail << " [" << reports[i].detail << "]";
        for (const std::string& e : reports[i].exclusions) detail << "\n    " << e;
        detail << "\n";
    }
    std::printf("verified %zu/%zu sampled observations\n", pass, n_samples);
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        out << "verified " << pass << "/" << n_samples << "\n" << detail.str();
    }
    if (pass != n_samples) {
        std::fputs(detail.str().c_str(), stderr);
        throw Error(ErrorClass::Verification, "VerificationFailed",
                    std::to_string(n_samples - pass) + " sampled observations failed");
    }
    return 0;
}

int cmd_pipeline(const std::string& config_path, const std::string& out_dir,
                 unsigned workers, std::size_t verify_samples, bool quiet) {
    const PipelineConfig cfg = load_config(config_path);
    fs::create_directories(out_dir);
    const auto path = [&](const std::string& name) {
        return (fs::path(out_dir) / name).string();
    };

    int rc = cmd_generate(config_path, path("combos.csv"));
    if (rc) return rc;
    rc = cmd_label(config_path, path("combos.csv"), path("dataset.csv"), workers,
                   /*resume=*/false, quiet);
    if (rc) return rc;
    rc = cmd_analyze(path("dataset.csv"), path("correlation.csv"));
    if (rc) return rc;
    rc = cmd_train(config_path, path("dataset.csv"), "tree", path("tree.model"),
                   path("tree.report.txt"), path("tree.residuals.csv"));
    if (rc) return rc;
    rc = cmd_train(config_path, path("dataset.csv"), "tobit", path("tobit.model"),
                   path("tobit.report.txt"), path("tobit.residuals.csv"));
    if (rc) return rc;
    rc = cmd_encode(config_path, path("tree.model"), 1, path("tree.lp"),
                    path("tree.lp.manifest"));
    if (rc) return rc;
    rc = cmd_encode(config_path, path("tobit.model"), 1, path("tobit.lp"),
                    path("tobit.lp.manifest"));
    if (rc) return rc;
    rc = cmd_verify(path("tree.model"), path("tree.lp"), path("tree.lp.manifest"),
                    path("dataset.csv"), verify_samples, cfg.split.seed, workers,
                    path("tree.verify.txt"));
    if (rc) return rc;
    rc = cmd_verify(path("tobit.model"), path("tobit.lp"),
                    path("tobit.lp.manifest"), path("dataset.csv"),
                    verify_samples, cfg.split.seed, workers,
                    path("tobit.verify.txt"));
    if (rc) return rc;

    // Run manifest: inputs, seed, artifact inventory. No timestamps, so two
    // identical runs produce identical bytes.
    std::ofstream mfst(path("manifest.txt"));
    if (!mfst)
        throw Error(ErrorClass::Io, "Io", "cannot write the run manifest");
    mfst << "ufls_run_manifest v1\n";
    mfst << "seed " << cfg.split.seed << "\n";
    mfst << "artifacts\n";
    for (const char* name :
         {"combos.csv", "dataset.csv", "correlation.csv", "tree.model",
          "tree.report.txt", "tree.residuals.csv", "tobit.model",
          "tobit.report.txt", "tobit.residuals.csv", "tree.lp",
          "tree.lp.manifest", "tobit.lp", "tobit.lp.manifest", "tree.verify.txt",
          "tobit.verify.txt"}) {
        mfst << "  " << name << " bytes " << fs::file_size(path(name)) << "\n";
    }
    mfst << "config\n" << render_config(cfg);
    std::printf("pipeline artifacts -> %s\n", out_dir.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"UFLS estimation pipeline: simulate outages, build labeled "
                 "datasets, train tree/Tobit estimators, emit MILP blocks"};
    app.require_subcommand(1);

    std::string config_path, combos_path, dataset_path, model_path, lp_path;
    std::string manifest_path, out_path, report_path, residuals_path;
    std::string combo_spec, lost_unit, traj_path, model_kind, out_dir;
    unsigned workers = 1;
    int n_observations = 1;
    std::size_t n_samples = 100;
    std::uint64_t seed = 1;
    bool resume = false, quiet = false;

    auto* sim = app.add_subcommand("simulate", "simulate one outage");
    sim->add_option("--config", config_path)->required();
    sim->add_option("--combo", combo_spec, "dispatch as unit=MW,unit=MW,...")
        ->required();
    sim->add_option("--lost", lost_unit)->required();
    sim->add_option("--trajectory", traj_path, "CSV (t, f) dump path");

    auto* gen = app.add_subcommand("generate",
                                   "enumerate, rank and prune combinations");
    gen->add_option("--config", config_path)->required();
    gen->add_option("--out", out_path)->required();

    auto* lab = app.add_subcommand("label", "simulate every outage to a dataset");
    lab->add_option("--config", config_path)->required();
    lab->add_option("--combos", combos_path)->required();
    lab->add_option("--out", out_path)->required();
    lab->add_option("--workers", workers);
    lab->add_flag("--resume", resume, "reuse labels already present in --out");
    lab->add_flag("--quiet", quiet);

    auto* ana = app.add_subcommand("analyze", "dataset summary and correlations");
    ana->add_option("--dataset", dataset_path)->required();
    ana->add_option("--out", out_path, "correlation matrix CSV");

    auto* trn = app.add_subcommand("train", "split, fit and evaluate a model");
    trn->add_option("--config", config_path)->required();
    trn->add_option("--dataset", dataset_path)->required();
    trn->add_option("--model", model_kind, "tree|tobit")->required();
    trn->add_option("--out", model_path)->required();
    trn->add_option("--report", report_path);
    trn->add_option("--residuals", residuals_path);

    auto* enc = app.add_subcommand("encode", "emit MILP constraint blocks");
    enc->add_option("--config", config_path);
    enc->add_option("--model", model_path)->required();
    enc->add_option("--observations", n_observations);
    enc->add_option("--out", lp_path)->required();
    enc->add_option("--manifest", manifest_path);

    auto* ver = app.add_subcommand("verify",
                                   "brute-force check of an emitted LP file");
    ver->add_option("--model", model_path)->required();
    ver->add_option("--lp", lp_path)->required();
    ver->add_option("--manifest", manifest_path)->required();
    ver->add_option("--dataset", dataset_path)->required();
    ver->add_option("--samples", n_samples);
    ver->add_option("--seed", seed);
    ver->add_option("--workers", workers);
    ver->add_option("--report", report_path);

    auto* pipe = app.add_subcommand("pipeline", "run the whole chain");
    pipe->add_option("--config", config_path)->required();
    pipe->add_option("--out", out_dir)->required();
    pipe->add_option("--workers", workers);
    pipe->add_option("--verify-samples", n_samples);
    pipe->add_flag("--quiet", quiet);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(config_path, combo_spec, lost_unit, traj_path);
        if (gen->parsed()) return cmd_generate(config_path, out_path);
        if (lab->parsed())
            return cmd_label(config_path, combos_path, out_path, workers, resume,
                             quiet);
        if (ana->parsed()) return cmd_analyze(dataset_path, out_path);
        if (trn->parsed())
            return cmd_train(config_path, dataset_path, model_kind, model_path,
                             report_path, residuals_path);
        if (enc->parsed()) {
            if (manifest_path.empty()) manifest_path = lp_path + ".manifest";
            return cmd_encode(config_path, model_path, n_observations, lp_path,
                              manifest_path);
        }
        if (ver->parsed())
            return cmd_verify(model_path, lp_path, manifest_path, dataset_path,
                              n_samples, seed, workers, report_path);
        if (pipe->parsed())
            return cmd_pipeline(config_path, out_dir, workers, n_samples, quiet);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.exit_code();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return static_cast<int>(ErrorClass::Internal);
    }
    return static_cast<int>(ErrorClass::Usage);
}
