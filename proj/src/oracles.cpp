#include "lda/oracles.hpp"

#include <algorithm>
#include <set>

#include "lda/errors.hpp"

namespace lda::oracles {

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
    Vec grad(x.size());
    Vec probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double orig = probe[i];
        probe[i] = orig + h;
        double up = f(probe);
        probe[i] = orig - h;
        double down = f(probe);
        probe[i] = orig;
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

double plain_softmax_ce(double cos_target, double cos_other, double s) {
    double a = s * cos_target;
    double b = s * cos_other;
    double hi = std::max(a, b);
    return -(a - hi) + std::log(std::exp(a - hi) + std::exp(b - hi));
}

namespace {

std::vector<int> greedy_class_reference(const std::vector<Vec>& protos,
                                        const std::vector<Vec>& embeddings, double t) {
    std::set<int> candidates, samples;
    for (std::size_t r = 0; r < protos.size(); ++r) candidates.insert(static_cast<int>(r));
    for (std::size_t i = 0; i < embeddings.size(); ++i) samples.insert(static_cast<int>(i));

    std::vector<int> selected;
    bool first = true;
    while (!candidates.empty()) {
        int best = -1, best_density = -1;
        for (int r : candidates) {
            int d = 0;
            for (int i : samples)
                if (dot(protos[r], embeddings[i]) > t) ++d;
            if (d > best_density) {
                best_density = d;
                best = r;
            }
        }
        if (!first && best_density == 0) break;
        first = false;
        selected.push_back(best);
        candidates.erase(best);
        std::vector<int> to_pop;
        for (int i : samples)
            if (dot(protos[best], embeddings[i]) > t) to_pop.push_back(i);
        for (int i : to_pop) samples.erase(i);
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

} // namespace

std::array<std::vector<int>, 2> greedy_selection_reference(
    const PrototypeBank& bank, const std::vector<Vec>& live_embeddings,
    const std::vector<Vec>& spoof_embeddings, double t_live, double t_spoof) {
    return {greedy_class_reference(bank.protos[kLive], live_embeddings, t_live),
            greedy_class_reference(bank.protos[kSpoof], spoof_embeddings, t_spoof)};
}

Rates counting_rates(const ScoredSet& set, double thr) {
    std::vector<int> predictions(set.scores.size());
    for (std::size_t i = 0; i < set.scores.size(); ++i)
        predictions[i] = set.scores[i] >= thr ? 1 : 0;

    double attacks = 0, attacks_accepted = 0, bona = 0, bona_rejected = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (set.labels[i] == 1) {
            attacks += 1;
            if (predictions[i] == 0) attacks_accepted += 1;
        } else {
            bona += 1;
            if (predictions[i] == 1) bona_rejected += 1;
        }
    }
    if (attacks == 0 || bona == 0)
        throw UndefinedRate("counting_rates: both classes required");
    Rates r;
    r.apcer = attacks_accepted / attacks;
    r.bpcer = bona_rejected / bona;
    r.acer = 0.5 * (r.apcer + r.bpcer);
    return r;
}

double sweep_threshold(const ScoredSet& dev) {
    std::vector<double> unique_scores = dev.scores;
    std::sort(unique_scores.begin(), unique_scores.end());
    unique_scores.erase(std::unique(unique_scores.begin(), unique_scores.end()),
                        unique_scores.end());
    std::vector<double> candidates{0.0, 1.0};
    for (std::size_t i = 0; i + 1 < unique_scores.size(); ++i)
        candidates.push_back(0.5 * (unique_scores[i] + unique_scores[i + 1]));
    std::sort(candidates.begin(), candidates.end());

    double best_thr = candidates.front();
    double best_acer = counting_rates(dev, best_thr).acer;
    for (double thr : candidates) {
        double acer = counting_rates(dev, thr).acer;
        if (acer < best_acer) {
            best_acer = acer;
            best_thr = thr;
        }
    }
    return best_thr;
}

double sweep_tpr_at_fpr(const ScoredSet& set, double fpr_target) {
    // Candidate thresholds: every score, plus one strictly above the maximum.
    std::vector<double> candidates = set.scores;
    double above = *std::max_element(set.scores.begin(), set.scores.end()) + 1.0;
    candidates.push_back(above);

    double n_live = 0, n_spoof = 0;
    for (int y : set.labels) (y == 0 ? n_live : n_spoof) += 1;

    double best = 0.0;
    for (double thr : candidates) {
        double live_ge = 0, spoof_ge = 0;
        for (std::size_t i = 0; i < set.scores.size(); ++i) {
            if (set.scores[i] >= thr) (set.labels[i] == 0 ? live_ge : spoof_ge) += 1;
        }
        double fpr = live_ge / n_live;
        double tpr = spoof_ge / n_spoof;
        if (fpr <= fpr_target) best = std::max(best, tpr);
    }
    return best;
}

} // namespace lda::oracles
