#pragma once

#include <array>
#include <vector>

#include "lda/lda_head.hpp"
#include "lda/linalg.hpp"

namespace lda {

// Per-prototype sample densities at a similarity threshold: density[r] is
// |{f : <p_r, f> > t}| (strict inequality) and covered[r] lists those
// sample indices.
struct DensityReport {
    std::vector<int> density;
    std::vector<std::vector<int>> covered;
    double threshold = 0.0;
};

DensityReport density(const std::vector<Vec>& prototypes,
                      const std::vector<Vec>& embeddings, double t);

struct SelectionStep {
    int cls = 0;
    int step = 0;      // 0 is the mandatory pick
    int prototype = 0; // index into the input bank's class list
    int density = 0;   // density at the moment of selection
    int popped = 0;    // samples removed with it
};

struct SelectionResult {
    std::array<std::vector<int>, 2> selected; // ascending original indices
    PrototypeBank reduced;                    // selected vectors, unchanged
    std::vector<SelectionStep> log;
    std::array<double, 2> thresholds{};
};

// Greedy max-density selection per class: the max-density prototype is the
// mandatory seed, then candidates are re-scored against the remaining
// samples, the best one selected and its covered samples popped, until the
// max density reaches 0 or candidates run out. Ties break to the lowest
// prototype index.
SelectionResult select_prototypes(const PrototypeBank& bank,
                                  const std::vector<Vec>& live_embeddings,
                                  const std::vector<Vec>& spoof_embeddings,
                                  double t_live, double t_spoof);

// Data-driven default thresholds: per class, the median over samples of the
// best-prototype similarity (0 when the class has no samples).
std::array<double, 2> default_thresholds(const PrototypeBank& bank,
                                         const std::vector<Vec>& live_embeddings,
                                         const std::vector<Vec>& spoof_embeddings);

} // namespace lda
