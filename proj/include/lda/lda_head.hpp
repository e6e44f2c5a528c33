#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lda/linalg.hpp"

namespace lda {

inline constexpr int kLive = 0;
inline constexpr int kSpoof = 1;

// Per-class sets of unit-norm prototype vectors. Class 0 = Live, 1 = Spoof.
struct PrototypeBank {
    std::array<std::vector<Vec>, 2> protos;

    int count(int cls) const { return static_cast<int>(protos[cls].size()); }
    int dim() const { return protos[0].empty() ? 0 : static_cast<int>(protos[0][0].size()); }
};

// Throws ContractViolation unless both classes are non-empty, dimensions
// agree and every prototype is unit-norm within 1e-9.
void validate(const PrototypeBank& bank);

// Loss and selection hyper-parameters.
struct LdaConfig {
    double s = 64.0;        // logit scale
    double m = 0.7;         // angular margin (radians)
    double tau_w = 0.1;     // aggregation temperature inside the class-similarity softmax
    double delta1 = 0.5;    // inter-class hinge margin
    double delta2 = 0.0;    // intra-class hinge margin
    double lambda1 = 0.1;   // inter center-loss weight
    double lambda2 = 0.001; // intra center-loss weight
    double lambda_s = 0.1;  // spoof-type auxiliary weight
    double lambda_i = 0.01; // illumination auxiliary weight
    double lambda_aux = 1.0;
    int k_init = 4;         // initial prototypes per class
};

void validate(const LdaConfig& cfg); // throws ConfigError

// Aggregated class cosines plus the per-prototype similarities and softmax
// weights they were built from (needed for gradients and diagnostics).
struct ClassPrediction {
    std::array<double, 2> cos_theta{};
    std::array<std::vector<double>, 2> sims;
    std::array<std::vector<double>, 2> weights;
};

// cos(theta_j) = sum_r softmax_r(sims/tau_w) * sims_r, per class.
// Works on raw vectors; callers are expected to pass unit-norm inputs.
ClassPrediction class_similarity(const Vec& embedding, const PrototypeBank& bank,
                                 double tau_w);

struct PdLoss {
    double loss = 0.0;
    std::array<double, 2> d_cos{}; // dLoss/dcos(theta_0), dLoss/dcos(theta_1)
};

// Angular-margin two-class cross-entropy on the aggregated cosines:
//   -log( e^{s cos(theta_y + m)} / (e^{s cos(theta_y + m)} + e^{s cos(theta_{1-y})}) ).
// With m == 0 the target logit is s*cos(theta_y) exactly (no clamp), so the
// margin-free case reduces to plain softmax cross-entropy bit-for-bit.
PdLoss prototype_data_loss(const ClassPrediction& pred, int label, double s, double m);

// Gradients with the same shape as a bank.
struct BankGrads {
    std::array<std::vector<Vec>, 2> protos;
};

BankGrads zero_grads(const PrototypeBank& bank);

struct CenterLoss {
    double loss = 0.0;
    BankGrads grads;
};

// Hinge between the highest cross-class prototype similarity and the lowest
// same-class pair similarity. Defined as 0 when no same-class pair exists.
// Subgradients flow only to the argmax / argmin pairs (first pair in index
// order on exact ties, 0 at the exact kink).
CenterLoss inter_center_loss(const PrototypeBank& bank, double delta1);

// Sum of hinges over all same-class prototype pairs: [sim - delta2]_+.
CenterLoss intra_center_loss(const PrototypeBank& bank, double delta2);

struct LdaLossResult {
    double total = 0.0;
    double pd = 0.0;       // mean prototype-data loss over the batch
    double pc_inter = 0.0;
    double pc_intra = 0.0;
    Matrix grad_embeddings;
    BankGrads grad_protos;
};

// total = mean_i L_PD(i) + lambda1 * L_PC_inter + lambda2 * L_PC_intra.
// Center terms enter once per batch. Gradients chain through the
// aggregation weights and values.
LdaLossResult lda_loss(const Matrix& embeddings, const std::vector<int>& labels,
                       const PrototypeBank& bank, const LdaConfig& cfg);

// Linear heads mapping embedding -> logits for the semantic sub-labels.
struct AuxHeads {
    Matrix spoof_type; // n_s x N
    Matrix illum;      // n_i x N
};

AuxHeads init_aux_heads(int n_spoof_types, int n_illum, int dim, std::uint64_t seed);

struct AuxLossResult {
    double loss = 0.0;
    Vec grad_embedding;
    Matrix grad_spoof_w;
    Matrix grad_illum_w;
};

// lambda_s * CE(spoof-type) + lambda_i * CE(illumination), softmax
// cross-entropy each. Live samples use spoof-type class 0 ("no attack").
AuxLossResult aux_loss(const Vec& embedding, const AuxHeads& heads, int spoof_type_label,
                       int illum_label, double lambda_s, double lambda_i);

struct LdaSLossResult {
    double total = 0.0;
    double pd = 0.0;
    double pc_inter = 0.0;
    double pc_intra = 0.0;
    double aux = 0.0; // mean auxiliary loss over the batch
    Matrix grad_embeddings;
    BankGrads grad_protos;
    Matrix grad_spoof_w;
    Matrix grad_illum_w;
};

// lda_loss + lambda_aux * mean auxiliary loss, gradients summed.
LdaSLossResult lda_s_loss(const Matrix& embeddings, const std::vector<int>& labels,
                          const std::vector<int>& spoof_type_labels,
                          const std::vector<int>& illum_labels, const PrototypeBank& bank,
                          const AuxHeads& heads, const LdaConfig& cfg);

// Softmax over {s*cos(theta_0), s*cos(theta_1)}; margin excluded at inference.
double spoof_score(const ClassPrediction& pred, double s);

// k_init prototypes per class, uniform in [-1,1]^dim then L2-normalized.
PrototypeBank init_bank(int k_init, int dim, std::uint64_t seed);

} // namespace lda
