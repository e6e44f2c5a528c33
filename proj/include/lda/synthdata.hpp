#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lda/linalg.hpp"

namespace lda {

struct GaussianCluster {
    Vec mean;
    double stddev = 1.0;
    double weight = 1.0; // mixing weight within its class
    int spoof_type = 0;  // 0 = no attack (Live convention)
    int illum = 0;
};

// Two-class isotropic Gaussian mixture. Cluster weights sum to 1 per class;
// the class itself is drawn Bernoulli(live_fraction).
struct MixtureSpec {
    int d_in = 2;
    double live_fraction = 0.5;
    std::array<std::vector<GaussianCluster>, 2> clusters; // [0]=Live, [1]=Spoof
};

void validate(const MixtureSpec& spec); // throws ConfigError

struct LabeledSample {
    Vec x;
    int y = 0; // 0 = Live, 1 = Spoof
    int spoof_type = 0;
    int illum = 0;
    int cluster = 0; // index within its class' cluster list (diagnostic)
};

// Deterministic given (spec, n, seed). Draw order per sample: class,
// cluster, then d_in gaussians.
std::vector<LabeledSample> sample_mixture(const MixtureSpec& spec, int n,
                                          std::uint64_t seed);

// Translate every cluster mean and scale every stddev; labels and weights
// are preserved.
MixtureSpec shift_domain(const MixtureSpec& spec, const Vec& translation,
                         double std_scale);

// 2-D scenario with three Spoof clusters and two Live clusters alternating
// on a ring, so no single-center linear separator gets every flank right.
MixtureSpec default_fig1_spec();

} // namespace lda
