#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lda/lda_head.hpp"
#include "lda/metrics.hpp"
#include "lda/model.hpp"
#include "lda/synthdata.hpp"

namespace lda {

struct TrainConfig {
    LdaConfig lda;
    std::vector<int> layer_sizes{2, 32, 8};
    int epochs = 40;
    int batch_size = 64;
    double lr = 0.1;
    double momentum = 0.9;
    std::uint64_t seed = 1;
    bool use_pc_inter = true;
    bool use_pc_intra = true;
    bool use_aux = false;
    int n_spoof_types = 4;
    int n_illum = 2;
};

void validate(const TrainConfig& cfg); // throws ConfigError

struct EpochStats {
    double total = 0.0;
    double pd = 0.0;
    double pc_inter = 0.0;
    double pc_intra = 0.0;
    double aux = 0.0;
    double train_acer = 0.0;
    double max_proto_norm_err = 0.0; // post-step drift from unit norm
};

struct EvalReport {
    double threshold = 0.0;
    double apcer = 0.0;
    double bpcer = 0.0;
    double acer = 0.0;
    double hter = 0.0;
    std::vector<std::pair<double, double>> tpr_at_fpr; // (target, tpr)
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    EvalReport final_dev; // dev-threshold metrics on the dev set itself
};

struct TrainResult {
    MlpParams model;
    PrototypeBank bank;
    AuxHeads aux;
    TrainHistory history;
};

// Called after every optimizer step; used for norm audits and logging.
using StepHook =
    std::function<void(int epoch, int step, const MlpParams&, const PrototypeBank&)>;

// Mini-batch SGD (optional momentum) over model, prototypes and auxiliary
// heads. Prototypes are re-normalized to unit length after every step.
// Deterministic given cfg.seed: sub-seeds for params/bank/aux/shuffling are
// derived from it and reduction order is fixed. Throws TrainingDiverged on a
// non-finite loss, naming the epoch and step.
TrainResult train(const TrainConfig& cfg, const std::vector<LabeledSample>& train_set,
                  const std::vector<LabeledSample>& dev_set, const StepHook& hook = {});

// Spoof scores for a sample set under (model, bank).
ScoredSet score_samples(const MlpParams& model, const PrototypeBank& bank,
                        const LdaConfig& cfg, const std::vector<LabeledSample>& samples);

// Dev-selected threshold, then APCER/BPCER/ACER/HTER on the test set at that
// threshold plus TPR at each FPR target.
EvalReport evaluate(const MlpParams& model, const PrototypeBank& bank,
                    const LdaConfig& cfg, const std::vector<LabeledSample>& dev_set,
                    const std::vector<LabeledSample>& test_set,
                    const std::vector<double>& fpr_targets = {0.01, 0.005, 0.001});

struct GradCheckReport {
    int trials = 0;
    int resamples = 0; // instances redrawn near hinge kinks or argmax ties
    double max_rel_err = 0.0;
    double tolerance = 0.0;
    bool pass = true;
    std::string worst_case;
};

// Central finite differences vs analytic gradients of the head losses
// (data, inter, intra, combined, auxiliary) on random small instances.
// Instances landing within 1e-3 of a hinge kink or similarity tie are
// resampled. n_trials == 0 passes vacuously.
GradCheckReport grad_check(const TrainConfig& cfg, int n_trials, double tolerance);

} // namespace lda
