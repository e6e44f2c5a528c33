#include "lda/synthdata.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lda/errors.hpp"
#include "lda/rng.hpp"

namespace lda {

void validate(const MixtureSpec& spec) {
    if (spec.d_in < 1) throw ConfigError("MixtureSpec: d_in must be positive");
    if (spec.live_fraction < 0.0 || spec.live_fraction > 1.0)
        throw ConfigError("MixtureSpec: live_fraction must be in [0, 1]");
    for (int cls = 0; cls < 2; ++cls) {
        if (spec.clusters[cls].empty())
            throw ConfigError("MixtureSpec: class " + std::to_string(cls) +
                              " has no clusters");
        double wsum = 0.0;
        for (const auto& c : spec.clusters[cls]) {
            if (static_cast<int>(c.mean.size()) != spec.d_in)
                throw ConfigError("MixtureSpec: cluster mean dimension mismatch");
            if (!(c.stddev > 0.0)) throw ConfigError("MixtureSpec: stddev must be positive");
            if (c.weight < 0.0) throw ConfigError("MixtureSpec: negative cluster weight");
            wsum += c.weight;
        }
        if (std::fabs(wsum - 1.0) > 1e-9)
            throw ConfigError("MixtureSpec: class " + std::to_string(cls) +
                              " weights sum to " + std::to_string(wsum));
    }
}

std::vector<LabeledSample> sample_mixture(const MixtureSpec& spec, int n,
                                          std::uint64_t seed) {
    validate(spec);
    if (n < 0) throw ContractViolation("sample_mixture: n must be non-negative");

    Rng rng(seed);
    std::vector<LabeledSample> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        int cls = rng.uniform() < spec.live_fraction ? 0 : 1;
        const auto& clusters = spec.clusters[cls];

        double u = rng.uniform();
        int ci = static_cast<int>(clusters.size()) - 1;
        double acc = 0.0;
        for (std::size_t k = 0; k < clusters.size(); ++k) {
            acc += clusters[k].weight;
            if (u < acc) {
                ci = static_cast<int>(k);
                break;
            }
        }

        const GaussianCluster& c = clusters[ci];
        LabeledSample s;
        s.x.resize(spec.d_in);
        for (int d = 0; d < spec.d_in; ++d)
            s.x[d] = c.mean[d] + c.stddev * rng.gaussian();
        s.y = cls;
        s.spoof_type = c.spoof_type;
        s.illum = c.illum;
        s.cluster = ci;
        out.push_back(std::move(s));
    }
    return out;
}

MixtureSpec shift_domain(const MixtureSpec& spec, const Vec& translation,
                         double std_scale) {
    validate(spec);
    if (static_cast<int>(translation.size()) != spec.d_in)
        throw ConfigError("shift_domain: translation dimension mismatch");
    if (!(std_scale > 0.0)) throw ConfigError("shift_domain: std_scale must be positive");

    MixtureSpec shifted = spec;
    for (int cls = 0; cls < 2; ++cls) {
        for (auto& c : shifted.clusters[cls]) {
            for (int d = 0; d < spec.d_in; ++d) c.mean[d] += translation[d];
            c.stddev *= std_scale;
        }
    }
    return shifted;
}

MixtureSpec default_fig1_spec() {
    constexpr double radius = 2.2;
    constexpr double stddev = 0.55;
    auto on_ring = [&](double deg) {
        double rad = deg * std::numbers::pi / 180.0;
        return Vec{radius * std::cos(rad), radius * std::sin(rad)};
    };

    MixtureSpec spec;
    spec.d_in = 2;
    spec.live_fraction = 0.5;
    // Live at 90 and 210 degrees; Spoof at 150 (interposed between the Live
    // pair), 270 and 30 degrees, alternating around the ring.
    spec.clusters[0] = {
        {on_ring(90.0), stddev, 0.5, 0, 0},
        {on_ring(210.0), stddev, 0.5, 0, 1},
    };
    spec.clusters[1] = {
        {on_ring(150.0), stddev, 1.0 / 3.0, 1, 0},
        {on_ring(270.0), stddev, 1.0 / 3.0, 2, 1},
        {on_ring(30.0), stddev, 1.0 / 3.0, 3, 0},
    };
    return spec;
}

} // namespace lda
