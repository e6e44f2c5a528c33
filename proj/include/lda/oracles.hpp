#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "lda/lda_head.hpp"
#include "lda/linalg.hpp"
#include "lda/metrics.hpp"

namespace lda::oracles {

// Central finite differences, one coordinate at a time.
Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                double h = 1e-6);

// Relative error with a unit-scale floor: exact relative comparison for
// components of meaningful magnitude, absolute for vanishing ones where
// finite differences are roundoff-bound.
inline double rel_err(double a, double b) {
    return std::fabs(a - b) / std::max({1e-2, std::fabs(a), std::fabs(b)});
}

inline double max_rel_err(const Vec& a, const Vec& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, rel_err(a[i], b[i]));
    return worst;
}

// Plain two-class softmax cross-entropy on cosine logits; the reduction
// target for the margin-free single-prototype case.
double plain_softmax_ce(double cos_target, double cos_other, double s);

// Independent re-simulation of the greedy selection-with-popping process,
// recomputing every density from scratch with explicit set arithmetic each
// step. Returns ascending selected indices per class.
std::array<std::vector<int>, 2> greedy_selection_reference(
    const PrototypeBank& bank, const std::vector<Vec>& live_embeddings,
    const std::vector<Vec>& spoof_embeddings, double t_live, double t_spoof);

// Naive per-sample counting of APCER/BPCER/ACER at a threshold.
Rates counting_rates(const ScoredSet& set, double thr);

// Exhaustive ACER sweep over every candidate threshold.
double sweep_threshold(const ScoredSet& dev);

// Exhaustive ROC: evaluates TPR/FPR at every distinct threshold level.
double sweep_tpr_at_fpr(const ScoredSet& set, double fpr_target);

} // namespace lda::oracles
