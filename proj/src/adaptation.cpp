#include "lda/adaptation.hpp"

#include <string>

#include "lda/errors.hpp"

namespace lda {

Vec class_mean_prototype(const std::vector<Vec>& embeddings) {
    if (embeddings.empty())
        throw ContractViolation("class_mean_prototype: empty embedding list");
    Vec mean(embeddings[0].size(), 0.0);
    for (const Vec& f : embeddings)
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += f[i];
    for (double& x : mean) x /= static_cast<double>(embeddings.size());
    if (l2_norm(mean) < 1e-12)
        throw DegenerateInput("class_mean_prototype: mean embedding is zero");
    return normalized(mean);
}

PrototypeBank adapt(const PrototypeBank& bank, const MlpParams& model,
                    const std::vector<LabeledSample>& target_samples) {
    validate(bank);
    if (target_samples.empty())
        throw ConfigError("adapt: no target samples");

    Matrix batch(static_cast<int>(target_samples.size()), model.input_dim());
    for (std::size_t i = 0; i < target_samples.size(); ++i)
        batch.set_row(static_cast<int>(i), target_samples[i].x);
    auto [embeddings, tape] = forward(model, batch);

    std::array<std::vector<Vec>, 2> by_class;
    for (std::size_t i = 0; i < target_samples.size(); ++i)
        by_class[target_samples[i].y].push_back(embeddings.row(static_cast<int>(i)));
    for (int cls = 0; cls < 2; ++cls)
        if (by_class[cls].empty())
            throw ConfigError("adapt: target samples missing class " +
                              std::to_string(cls));

    PrototypeBank adapted = bank;
    for (int cls = 0; cls < 2; ++cls)
        adapted.protos[cls].push_back(class_mean_prototype(by_class[cls]));
    return adapted;
}

} // namespace lda
