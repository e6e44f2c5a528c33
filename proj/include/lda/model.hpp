#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lda/linalg.hpp"

namespace lda {

// Fully-connected embedding network: linear layers with rectified-linear
// hidden activations, identity on the last layer, then L2 normalization of
// each output row onto the unit sphere.
struct MlpParams {
    std::vector<int> layer_sizes;  // [D_in, h1, ..., N]
    std::vector<Matrix> weights;   // weights[k]: layer_sizes[k+1] x layer_sizes[k]
    std::vector<Vec> biases;       // biases[k]: layer_sizes[k+1]

    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
    int num_layers() const { return static_cast<int>(weights.size()); }
};

// Everything forward() needs to retain so backward() can reproduce exact
// gradients: activations per layer and the pre-normalization feature norms.
struct ForwardTape {
    Matrix input;
    std::vector<Matrix> pre_acts;  // z_k, one per layer
    std::vector<Matrix> acts;      // relu(z_k) for hidden layers only
    Vec norms;                     // per-row max(||z_L||, kNormEps)
    Matrix embeddings;             // unit rows, z_L / norm
};

struct MlpGrads {
    std::vector<Matrix> weights;
    std::vector<Vec> biases;
};

// Deterministic init: weights uniform in +-sqrt(6/(fan_in+fan_out)),
// biases zero. Throws ConfigError on fewer than two layer sizes or a
// non-positive size.
MlpParams init_params(const std::vector<int>& layer_sizes, std::uint64_t seed);

// batch is B x D_in; returns unit-norm embeddings (B x N) plus the tape.
std::pair<Matrix, ForwardTape> forward(const MlpParams& params, const Matrix& batch);

// grad_embeddings is dLoss/dEmbeddings (B x N). Includes the normalization
// Jacobian term. Throws ContractViolation on shape mismatch.
MlpGrads backward(const MlpParams& params, const ForwardTape& tape,
                  const Matrix& grad_embeddings);

} // namespace lda
