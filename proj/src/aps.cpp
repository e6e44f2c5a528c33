#include "lda/aps.hpp"

#include <algorithm>

#include "lda/errors.hpp"

namespace lda {

DensityReport density(const std::vector<Vec>& prototypes,
                      const std::vector<Vec>& embeddings, double t) {
    DensityReport report;
    report.threshold = t;
    report.density.reserve(prototypes.size());
    report.covered.reserve(prototypes.size());
    for (const Vec& p : prototypes) {
        std::vector<int> covered;
        for (std::size_t i = 0; i < embeddings.size(); ++i)
            if (dot(p, embeddings[i]) > t) covered.push_back(static_cast<int>(i));
        report.density.push_back(static_cast<int>(covered.size()));
        report.covered.push_back(std::move(covered));
    }
    return report;
}

namespace {

// One class' greedy loop. Coverage sets are computed once up front; popping
// a sample decrements the cached density of every candidate covering it.
void select_class(int cls, const std::vector<Vec>& protos,
                  const std::vector<Vec>& embeddings, double t,
                  SelectionResult& result) {
    int K = static_cast<int>(protos.size());
    DensityReport initial = density(protos, embeddings, t);

    std::vector<std::vector<int>> covering(embeddings.size());
    for (int r = 0; r < K; ++r)
        for (int i : initial.covered[r]) covering[i].push_back(r);

    std::vector<int> live_density = initial.density;
    std::vector<bool> proto_taken(K, false);
    std::vector<bool> sample_popped(embeddings.size(), false);

    int step = 0;
    int remaining = K;
    while (remaining > 0) {
        int best = -1;
        for (int r = 0; r < K; ++r) {
            if (proto_taken[r]) continue;
            if (best < 0 || live_density[r] > live_density[best]) best = r;
        }
        // After the mandatory seed, stop once the best candidate covers nothing.
        if (step > 0 && live_density[best] == 0) break;

        int dens = live_density[best];
        int popped = 0;
        for (int i : initial.covered[best]) {
            if (sample_popped[i]) continue;
            sample_popped[i] = true;
            ++popped;
            for (int r : covering[i]) --live_density[r];
        }
        proto_taken[best] = true;
        --remaining;
        result.selected[cls].push_back(best);
        result.log.push_back({cls, step, best, dens, popped});
        ++step;
    }

    std::sort(result.selected[cls].begin(), result.selected[cls].end());
    for (int r : result.selected[cls]) result.reduced.protos[cls].push_back(protos[r]);
}

} // namespace

SelectionResult select_prototypes(const PrototypeBank& bank,
                                  const std::vector<Vec>& live_embeddings,
                                  const std::vector<Vec>& spoof_embeddings,
                                  double t_live, double t_spoof) {
    validate(bank);
    SelectionResult result;
    result.thresholds = {t_live, t_spoof};
    select_class(kLive, bank.protos[kLive], live_embeddings, t_live, result);
    select_class(kSpoof, bank.protos[kSpoof], spoof_embeddings, t_spoof, result);
    return result;
}

std::array<double, 2> default_thresholds(const PrototypeBank& bank,
                                         const std::vector<Vec>& live_embeddings,
                                         const std::vector<Vec>& spoof_embeddings) {
    std::array<double, 2> out{0.0, 0.0};
    const std::vector<Vec>* sets[2] = {&live_embeddings, &spoof_embeddings};
    for (int cls = 0; cls < 2; ++cls) {
        const auto& emb = *sets[cls];
        if (emb.empty()) continue;
        std::vector<double> best(emb.size(), -2.0);
        for (std::size_t i = 0; i < emb.size(); ++i)
            for (const Vec& p : bank.protos[cls])
                best[i] = std::max(best[i], dot(p, emb[i]));
        std::sort(best.begin(), best.end());
        std::size_t n = best.size();
        out[cls] = n % 2 == 1 ? best[n / 2] : 0.5 * (best[n / 2 - 1] + best[n / 2]);
    }
    return out;
}

} // namespace lda
