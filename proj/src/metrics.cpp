#include "lda/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "lda/errors.hpp"

namespace lda {

namespace {

void check_set(const ScoredSet& set) {
    if (set.scores.size() != set.labels.size())
        throw ContractViolation("ScoredSet: scores/labels length mismatch");
    if (set.scores.empty()) throw UndefinedRate("ScoredSet: empty set");
    int n_live = 0, n_spoof = 0;
    for (std::size_t i = 0; i < set.labels.size(); ++i) {
        if (!std::isfinite(set.scores[i]))
            throw ContractViolation("ScoredSet: non-finite score");
        (set.labels[i] == 0 ? n_live : n_spoof)++;
    }
    if (n_live == 0 || n_spoof == 0)
        throw UndefinedRate("ScoredSet: both classes required for rates");
}

} // namespace

Rates rates_at_threshold(const ScoredSet& set, double thr) {
    check_set(set);
    int n_live = 0, n_spoof = 0, live_flagged = 0, spoof_missed = 0;
    for (std::size_t i = 0; i < set.scores.size(); ++i) {
        bool predicted_spoof = set.scores[i] >= thr;
        if (set.labels[i] == 0) {
            ++n_live;
            if (predicted_spoof) ++live_flagged;
        } else {
            ++n_spoof;
            if (!predicted_spoof) ++spoof_missed;
        }
    }
    Rates r;
    r.apcer = static_cast<double>(spoof_missed) / n_spoof;
    r.bpcer = static_cast<double>(live_flagged) / n_live;
    r.acer = 0.5 * (r.apcer + r.bpcer);
    return r;
}

double select_threshold(const ScoredSet& dev) {
    check_set(dev);
    std::vector<double> unique_scores = dev.scores;
    std::sort(unique_scores.begin(), unique_scores.end());
    unique_scores.erase(std::unique(unique_scores.begin(), unique_scores.end()),
                        unique_scores.end());

    std::vector<double> candidates{0.0, 1.0};
    for (std::size_t i = 0; i + 1 < unique_scores.size(); ++i)
        candidates.push_back(0.5 * (unique_scores[i] + unique_scores[i + 1]));
    std::sort(candidates.begin(), candidates.end());

    double best_thr = candidates.front();
    double best_acer = rates_at_threshold(dev, best_thr).acer;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        double acer = rates_at_threshold(dev, candidates[i]).acer;
        if (acer < best_acer) { // strict: ties keep the lowest threshold
            best_acer = acer;
            best_thr = candidates[i];
        }
    }
    return best_thr;
}

double hter(const ScoredSet& test, double thr_from_dev) {
    Rates r = rates_at_threshold(test, thr_from_dev);
    return 0.5 * (r.apcer + r.bpcer); // FAR = apcer, FRR = bpcer
}

double tpr_at_fpr(const ScoredSet& set, double fpr_target) {
    if (!(fpr_target > 0.0 && fpr_target < 1.0))
        throw ContractViolation("tpr_at_fpr: fpr_target must be in (0, 1)");
    check_set(set);

    int n_live = 0, n_spoof = 0;
    for (int y : set.labels) (y == 0 ? n_live : n_spoof)++;

    // Walk thresholds from high to low; at thr equal to each unique score the
    // predicted-spoof set is {score >= thr}. The empty predicted set (thr
    // above every score) has TPR 0 and is always admissible.
    std::vector<std::pair<double, int>> sorted(set.scores.size());
    for (std::size_t i = 0; i < set.scores.size(); ++i)
        sorted[i] = {set.scores[i], set.labels[i]};
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    double best_tpr = 0.0;
    int live_ge = 0, spoof_ge = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        double thr = sorted[i].first;
        while (i < sorted.size() && sorted[i].first == thr) {
            (sorted[i].second == 0 ? live_ge : spoof_ge)++;
            ++i;
        }
        double fpr = static_cast<double>(live_ge) / n_live;
        if (fpr <= fpr_target)
            best_tpr = std::max(best_tpr, static_cast<double>(spoof_ge) / n_spoof);
    }
    return best_tpr;
}

} // namespace lda
