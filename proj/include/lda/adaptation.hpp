#pragma once

#include <vector>

#include "lda/lda_head.hpp"
#include "lda/model.hpp"
#include "lda/synthdata.hpp"

namespace lda {

// Arithmetic mean of the embeddings, re-normalized to unit length.
// Throws ContractViolation on an empty list and DegenerateInput when the
// mean is numerically zero (antipodal cancellation).
Vec class_mean_prototype(const std::vector<Vec>& embeddings);

// Append one class-mean prototype per class, computed from the target
// samples' embeddings under the given model. Original prototypes are left
// untouched. Throws ConfigError when a class is missing from the targets.
PrototypeBank adapt(const PrototypeBank& bank, const MlpParams& model,
                    const std::vector<LabeledSample>& target_samples);

} // namespace lda
