// Command-line front end: data generation, training, evaluation, prototype
// selection, few-shot adaptation, gradient checks, and the repro suite.
// Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lda/adaptation.hpp"
#include "lda/aps.hpp"
#include "lda/errors.hpp"
#include "lda/io.hpp"
#include "lda/oracles.hpp"
#include "lda/repro.hpp"
#include "lda/trainer.hpp"

namespace fs = std::filesystem;

namespace {

void error_line(const std::string& kind, const std::string& message) {
    nlohmann::json j{{"error", {{"kind", kind}, {"message", message}}}};
    std::cerr << j.dump() << "\n";
}

std::vector<double> parse_doubles(const std::string& csv) {
    std::vector<double> out;
    std::string cur;
    for (char ch : csv + ",") {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(std::stod(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    return out;
}

lda::MixtureSpec load_spec(const std::string& name) {
    if (name == "fig1") return lda::default_fig1_spec();
    return lda::io::spec_from_json(nlohmann::json::parse(lda::io::read_file(name)));
}

// Accepts either a bare config JSON or a manifest (config nested under
// "config"), so runs can be reproduced straight from their manifests.
lda::TrainConfig load_config(const std::string& path) {
    if (path.empty()) return lda::TrainConfig{};
    nlohmann::json j = nlohmann::json::parse(lda::io::read_file(path));
    if (j.contains("config")) j = j.at("config");
    return lda::io::config_from_json(j);
}

std::vector<lda::LabeledSample> load_samples(const std::string& path) {
    return lda::io::samples_from_csv(lda::io::read_file(path));
}

struct CommonOpts {
    std::string config, data, dev, test, out, model, bank;
    std::string spec_name = "fig1";
    std::string shift, fpr_targets;
    int n = 2000;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int k_init = 0;
    bool no_pc_inter = false, no_pc_intra = false, aux = false;
    double t_live = 0.0, t_spoof = 0.0;
    bool t_live_set = false, t_spoof_set = false;
    double std_scale = 1.0;
    int trials = 50;
    double tolerance = 1e-5;
};

lda::TrainConfig effective_config(const CommonOpts& opt) {
    lda::TrainConfig cfg = load_config(opt.config);
    if (opt.seed_set) cfg.seed = opt.seed;
    if (opt.k_init > 0) cfg.lda.k_init = opt.k_init;
    if (opt.no_pc_inter) cfg.use_pc_inter = false;
    if (opt.no_pc_intra) cfg.use_pc_intra = false;
    if (opt.aux) cfg.use_aux = true;
    return cfg;
}

int cmd_gen_data(const CommonOpts& opt) {
    lda::MixtureSpec spec = load_spec(opt.spec_name);
    if (!opt.shift.empty() || opt.std_scale != 1.0) {
        lda::Vec shift(spec.d_in, 0.0);
        if (!opt.shift.empty()) shift = parse_doubles(opt.shift);
        spec = lda::shift_domain(spec, shift, opt.std_scale);
    }
    auto samples = lda::sample_mixture(spec, opt.n, opt.seed);
    fs::create_directories(opt.out);
    lda::io::write_file_atomic(fs::path(opt.out) / "samples.csv",
                               lda::io::samples_to_csv(samples));
    lda::io::write_file_atomic(fs::path(opt.out) / "spec.json",
                               lda::io::spec_to_json(spec).dump(2) + "\n");
    std::cout << "wrote " << samples.size() << " samples to " << opt.out << "\n";
    return 0;
}

int cmd_train(const CommonOpts& opt) {
    lda::TrainConfig cfg = effective_config(opt);
    auto train_set = load_samples(opt.data);
    auto dev_set = load_samples(opt.dev);

    lda::TrainResult run = lda::train(cfg, train_set, dev_set);

    fs::create_directories(opt.out);
    fs::path out(opt.out);
    lda::io::write_file_atomic(out / "model.json",
                               lda::io::model_to_json(run.model).dump() + "\n");
    lda::io::write_file_atomic(out / "bank.csv", lda::io::bank_to_csv(run.bank));
    lda::io::write_file_atomic(out / "history.csv",
                               lda::io::history_to_csv(run.history));
    lda::io::write_file_atomic(
        out / "manifest.json",
        lda::io::manifest_json(cfg, run.history.final_dev).dump(2) + "\n");
    std::printf("trained %d epochs; dev ACER %.4f at threshold %.4f\n", cfg.epochs,
                run.history.final_dev.acer, run.history.final_dev.threshold);
    return 0;
}

int cmd_eval(const CommonOpts& opt) {
    lda::TrainConfig cfg = effective_config(opt);
    lda::MlpParams model = lda::io::model_from_json(
        nlohmann::json::parse(lda::io::read_file(opt.model)));
    lda::PrototypeBank bank = lda::io::bank_from_csv(lda::io::read_file(opt.bank));
    auto dev_set = load_samples(opt.dev);
    auto test_set = load_samples(opt.test);

    std::vector<double> targets{0.01, 0.005, 0.001};
    if (!opt.fpr_targets.empty()) targets = parse_doubles(opt.fpr_targets);

    lda::EvalReport report =
        lda::evaluate(model, bank, cfg.lda, dev_set, test_set, targets);
    fs::create_directories(opt.out);
    lda::io::write_file_atomic(fs::path(opt.out) / "metrics.csv",
                               lda::io::metrics_to_csv(report, "test"));
    lda::io::write_file_atomic(fs::path(opt.out) / "metrics.json",
                               lda::io::eval_to_json(report).dump(2) + "\n");
    std::printf("test ACER %.4f (APCER %.4f, BPCER %.4f) at threshold %.4f\n",
                report.acer, report.apcer, report.bpcer, report.threshold);
    return 0;
}

int cmd_aps(const CommonOpts& opt) {
    lda::TrainConfig cfg = effective_config(opt);
    lda::MlpParams model = lda::io::model_from_json(
        nlohmann::json::parse(lda::io::read_file(opt.model)));
    lda::PrototypeBank bank = lda::io::bank_from_csv(lda::io::read_file(opt.bank));
    auto samples = load_samples(opt.data);

    lda::Matrix batch(static_cast<int>(samples.size()), model.input_dim());
    for (std::size_t i = 0; i < samples.size(); ++i)
        batch.set_row(static_cast<int>(i), samples[i].x);
    auto [emb, tape] = lda::forward(model, batch);
    std::vector<lda::Vec> live_emb, spoof_emb;
    for (std::size_t i = 0; i < samples.size(); ++i)
        (samples[i].y == 0 ? live_emb : spoof_emb)
            .push_back(emb.row(static_cast<int>(i)));

    auto thresholds = lda::default_thresholds(bank, live_emb, spoof_emb);
    double t_live = opt.t_live_set ? opt.t_live : thresholds[lda::kLive];
    double t_spoof = opt.t_spoof_set ? opt.t_spoof : thresholds[lda::kSpoof];

    lda::SelectionResult sel =
        lda::select_prototypes(bank, live_emb, spoof_emb, t_live, t_spoof);
    fs::create_directories(opt.out);
    lda::io::write_file_atomic(fs::path(opt.out) / "aps_log.json",
                               lda::io::aps_log_json(sel).dump(2) + "\n");
    lda::io::write_file_atomic(fs::path(opt.out) / "bank.csv",
                               lda::io::bank_to_csv(sel.reduced));
    std::printf("selected %d live + %d spoof prototypes (t_live %.4f, t_spoof %.4f)\n",
                sel.reduced.count(lda::kLive), sel.reduced.count(lda::kSpoof), t_live,
                t_spoof);
    (void)cfg;
    return 0;
}

int cmd_adapt(const CommonOpts& opt) {
    lda::MlpParams model = lda::io::model_from_json(
        nlohmann::json::parse(lda::io::read_file(opt.model)));
    lda::PrototypeBank bank = lda::io::bank_from_csv(lda::io::read_file(opt.bank));
    auto targets = load_samples(opt.data);

    lda::PrototypeBank adapted = lda::adapt(bank, model, targets);
    fs::create_directories(opt.out);
    lda::io::write_file_atomic(fs::path(opt.out) / "bank.csv",
                               lda::io::bank_to_csv(adapted));
    std::printf("extended bank to %d live + %d spoof prototypes\n",
                adapted.count(lda::kLive), adapted.count(lda::kSpoof));
    return 0;
}

int cmd_gradcheck(const CommonOpts& opt) {
    lda::TrainConfig cfg = effective_config(opt);
    lda::GradCheckReport report = lda::grad_check(cfg, opt.trials, opt.tolerance);
    nlohmann::json j{{"trials", report.trials},
                     {"resamples", report.resamples},
                     {"max_rel_err", report.max_rel_err},
                     {"tolerance", report.tolerance},
                     {"pass", report.pass},
                     {"worst_case", report.worst_case}};
    std::cout << j.dump(2) << "\n";
    return report.pass ? 0 : 1;
}

int cmd_repro(const CommonOpts& opt) {
    auto results = lda::repro::run_all(opt.out);
    bool all_pass = true;
    for (const auto& r : results) {
        std::printf("[%s] criterion %d (%s): %s\n", r.pass ? "PASS" : "FAIL", r.id,
                    r.name.c_str(), r.detail.c_str());
        all_pass = all_pass && r.pass;
    }
    std::printf("%s: %zu criteria checked\n", all_pass ? "PASS" : "FAIL",
                results.size());
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-prototype anti-spoofing toolkit"};
    app.require_subcommand(1);
    CommonOpts opt;

    auto* gen = app.add_subcommand("gen-data", "Sample a labelled mixture dataset");
    gen->add_option("--spec", opt.spec_name, "Builtin name (fig1) or spec JSON path");
    gen->add_option("--n", opt.n, "Number of samples");
    gen->add_option("--seed", opt.seed, "Sampling seed");
    gen->add_option("--shift", opt.shift, "Comma-separated mean translation");
    gen->add_option("--std-scale", opt.std_scale, "Stddev multiplier");
    gen->add_option("--out", opt.out, "Output directory")->required();

    auto* tr = app.add_subcommand("train", "Train model and prototype bank");
    tr->add_option("--config", opt.config, "Config or manifest JSON");
    tr->add_option("--data", opt.data, "Training samples CSV")->required();
    tr->add_option("--dev", opt.dev, "Development samples CSV")->required();
    tr->add_option("--out", opt.out, "Output directory")->required();
    auto* seed_opt = tr->add_option("--seed", opt.seed, "Override config seed");
    tr->add_option("--k-init", opt.k_init, "Override initial prototypes per class");
    tr->add_flag("--no-pc-inter", opt.no_pc_inter, "Disable the inter center term");
    tr->add_flag("--no-pc-intra", opt.no_pc_intra, "Disable the intra center term");
    tr->add_flag("--aux", opt.aux, "Enable auxiliary semantic heads");

    auto* ev = app.add_subcommand("eval", "Evaluate a trained model/bank");
    ev->add_option("--config", opt.config, "Config or manifest JSON");
    ev->add_option("--model", opt.model, "Model JSON")->required();
    ev->add_option("--bank", opt.bank, "Prototype bank CSV")->required();
    ev->add_option("--dev", opt.dev, "Dev samples CSV (threshold selection)")->required();
    ev->add_option("--test", opt.test, "Test samples CSV")->required();
    ev->add_option("--fpr-targets", opt.fpr_targets, "Comma-separated FPR targets");
    ev->add_option("--out", opt.out, "Output directory")->required();

    auto* ap = app.add_subcommand("aps", "Prune prototypes by sample density");
    ap->add_option("--config", opt.config, "Config or manifest JSON");
    ap->add_option("--model", opt.model, "Model JSON")->required();
    ap->add_option("--bank", opt.bank, "Prototype bank CSV")->required();
    ap->add_option("--data", opt.data, "Samples CSV providing the densities")->required();
    auto* tl = ap->add_option("--t-live", opt.t_live, "Live density threshold");
    auto* ts = ap->add_option("--t-spoof", opt.t_spoof, "Spoof density threshold");
    ap->add_option("--out", opt.out, "Output directory")->required();

    auto* ad = app.add_subcommand("adapt", "Extend a bank with target-domain means");
    ad->add_option("--model", opt.model, "Model JSON")->required();
    ad->add_option("--bank", opt.bank, "Prototype bank CSV")->required();
    ad->add_option("--data", opt.data, "Labelled target samples CSV")->required();
    ad->add_option("--out", opt.out, "Output directory")->required();

    auto* gc = app.add_subcommand("gradcheck", "Finite-difference gradient audit");
    gc->add_option("--config", opt.config, "Config or manifest JSON");
    gc->add_option("--trials", opt.trials, "Random instances to check");
    gc->add_option("--tolerance", opt.tolerance, "Max relative error allowed");
    auto* gc_seed = gc->add_option("--seed", opt.seed, "Override config seed");

    auto* rp = app.add_subcommand("repro", "Run the full verification suite");
    rp->add_option("--out", opt.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        error_line("usage", e.what());
        return 2;
    }
    opt.seed_set = seed_opt->count() > 0 || gc_seed->count() > 0;
    opt.t_live_set = tl->count() > 0;
    opt.t_spoof_set = ts->count() > 0;

    try {
        if (gen->parsed()) return cmd_gen_data(opt);
        if (tr->parsed()) return cmd_train(opt);
        if (ev->parsed()) return cmd_eval(opt);
        if (ap->parsed()) return cmd_aps(opt);
        if (ad->parsed()) return cmd_adapt(opt);
        if (gc->parsed()) return cmd_gradcheck(opt);
        if (rp->parsed()) return cmd_repro(opt);
    } catch (const lda::ConfigError& e) {
        error_line("config", e.what());
        return 2;
    } catch (const nlohmann::json::exception& e) {
        error_line("config", e.what());
        return 2;
    } catch (const std::exception& e) {
        error_line("runtime", e.what());
        return 1;
    }
    return 0;
}
