#pragma once

#include <vector>

namespace lda {

// Parallel spoof scores and ground-truth labels (0 = Live/bona fide,
// 1 = Spoof/attack). The decision rule everywhere is: predict Spoof iff
// score >= threshold.
struct ScoredSet {
    std::vector<double> scores;
    std::vector<int> labels;
};

struct Rates {
    double apcer = 0.0; // attacks accepted as bona fide
    double bpcer = 0.0; // bona fide rejected as attack
    double acer = 0.0;  // (apcer + bpcer) / 2
};

// Throws UndefinedRate unless both classes are present.
Rates rates_at_threshold(const ScoredSet& set, double thr);

// Threshold minimizing ACER over {midpoints of consecutive sorted unique
// scores} plus {0, 1}; ties resolve to the lowest threshold.
double select_threshold(const ScoredSet& dev);

// (false acceptance + false rejection) / 2 at a threshold fixed elsewhere
// (typically on development data); used for cross-domain evaluation.
double hter(const ScoredSet& test, double thr_from_dev);

// Maximum TPR over thresholds whose FPR <= fpr_target; positives are Spoof.
// Step-function ROC, no interpolation. fpr_target must lie in (0, 1).
double tpr_at_fpr(const ScoredSet& set, double fpr_target);

} // namespace lda
