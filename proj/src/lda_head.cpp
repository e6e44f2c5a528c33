#include "lda/lda_head.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lda/errors.hpp"
#include "lda/rng.hpp"

namespace lda {

namespace {

constexpr double kCosClamp = 1.0 - 1e-7;

// log(1 + e^x) without overflow.
double log1p_exp(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

} // namespace

void validate(const PrototypeBank& bank) {
    if (bank.protos[kLive].empty() || bank.protos[kSpoof].empty())
        throw ContractViolation("bank: each class needs at least one prototype");
    std::size_t dim = bank.protos[kLive][0].size();
    for (int cls = 0; cls < 2; ++cls) {
        for (const Vec& p : bank.protos[cls]) {
            if (p.size() != dim)
                throw ContractViolation("bank: inconsistent prototype dimensions");
            if (std::fabs(l2_norm(p) - 1.0) > 1e-9)
                throw ContractViolation("bank: prototype is not unit-norm");
        }
    }
}

void validate(const LdaConfig& cfg) {
    auto fail = [](const std::string& what) { throw ConfigError("LdaConfig: " + what); };
    if (!(cfg.s > 0.0)) fail("s must be positive");
    if (!(cfg.tau_w > 0.0)) fail("tau_w must be positive");
    if (cfg.m < 0.0 || cfg.m >= std::numbers::pi / 2.0) fail("m must be in [0, pi/2)");
    if (cfg.delta1 < 0.0 || cfg.delta1 > 2.0) fail("delta1 must be in [0, 2]");
    if (cfg.delta2 < -1.0 || cfg.delta2 > 1.0) fail("delta2 must be in [-1, 1]");
    if (cfg.lambda1 < 0.0 || cfg.lambda2 < 0.0 || cfg.lambda_s < 0.0 ||
        cfg.lambda_i < 0.0 || cfg.lambda_aux < 0.0)
        fail("balance weights must be non-negative");
    if (cfg.k_init < 1) fail("k_init must be at least 1");
}

ClassPrediction class_similarity(const Vec& embedding, const PrototypeBank& bank,
                                 double tau_w) {
    ClassPrediction pred;
    for (int cls = 0; cls < 2; ++cls) {
        const auto& protos = bank.protos[cls];
        auto& sims = pred.sims[cls];
        auto& weights = pred.weights[cls];
        sims.resize(protos.size());
        weights.resize(protos.size());
        for (std::size_t r = 0; r < protos.size(); ++r)
            sims[r] = dot(embedding, protos[r]);

        // Softmax over sims / tau_w with max-subtraction.
        double hi = sims[0] / tau_w;
        for (std::size_t r = 1; r < sims.size(); ++r) hi = std::max(hi, sims[r] / tau_w);
        double z = 0.0;
        for (std::size_t r = 0; r < sims.size(); ++r) {
            weights[r] = std::exp(sims[r] / tau_w - hi);
            z += weights[r];
        }
        double cos_theta = 0.0;
        for (std::size_t r = 0; r < sims.size(); ++r) {
            weights[r] /= z;
            cos_theta += weights[r] * sims[r];
        }
        pred.cos_theta[cls] = cos_theta;
    }
    return pred;
}

PdLoss prototype_data_loss(const ClassPrediction& pred, int label, double s, double m) {
    if (label != 0 && label != 1)
        throw ContractViolation("prototype_data_loss: label must be 0 or 1");

    double cos_y = pred.cos_theta[label];
    double cos_other = pred.cos_theta[1 - label];

    double target_logit;
    double d_target; // d(target_logit)/d(cos_y)
    if (m == 0.0) {
        target_logit = s * cos_y;
        d_target = s;
    } else {
        // cos(theta + m) = cos*cos m - sin*sin m; clamp keeps the sqrt defined.
        double c = std::clamp(cos_y, -kCosClamp, kCosClamp);
        bool clamped = c != cos_y;
        double sin_y = std::sqrt(1.0 - c * c);
        target_logit = s * (c * std::cos(m) - sin_y * std::sin(m));
        d_target = clamped ? 0.0 : s * (std::cos(m) + std::sin(m) * c / sin_y);
    }
    double other_logit = s * cos_other;

    double diff = other_logit - target_logit;
    PdLoss out;
    out.loss = log1p_exp(diff);
    double p_wrong = sigmoid(diff);
    out.d_cos[label] = -p_wrong * d_target;
    out.d_cos[1 - label] = p_wrong * s;
    return out;
}

BankGrads zero_grads(const PrototypeBank& bank) {
    BankGrads g;
    for (int cls = 0; cls < 2; ++cls)
        g.protos[cls].assign(bank.protos[cls].size(), Vec(bank.dim(), 0.0));
    return g;
}

CenterLoss inter_center_loss(const PrototypeBank& bank, double delta1) {
    CenterLoss out;
    out.grads = zero_grads(bank);

    const auto& live = bank.protos[kLive];
    const auto& spoof = bank.protos[kSpoof];
    bool has_intra_pair = live.size() >= 2 || spoof.size() >= 2;
    if (!has_intra_pair) return out; // constraint is vacuous

    // Highest cross-class similarity; first pair in index order wins ties.
    double max_inter = -2.0;
    int mi_a = 0, mi_b = 0;
    for (std::size_t a = 0; a < live.size(); ++a) {
        for (std::size_t b = 0; b < spoof.size(); ++b) {
            double sim = dot(live[a], spoof[b]);
            if (sim > max_inter) {
                max_inter = sim;
                mi_a = static_cast<int>(a);
                mi_b = static_cast<int>(b);
            }
        }
    }

    // Lowest same-class pair similarity across both classes.
    double min_intra = 2.0;
    int mn_cls = 0, mn_r = 0, mn_t = 0;
    for (int cls = 0; cls < 2; ++cls) {
        const auto& ps = bank.protos[cls];
        for (std::size_t r = 0; r < ps.size(); ++r) {
            for (std::size_t t = r + 1; t < ps.size(); ++t) {
                double sim = dot(ps[r], ps[t]);
                if (sim < min_intra) {
                    min_intra = sim;
                    mn_cls = cls;
                    mn_r = static_cast<int>(r);
                    mn_t = static_cast<int>(t);
                }
            }
        }
    }

    double raw = max_inter - min_intra + delta1;
    if (raw <= 0.0) return out; // hinge inactive; subgradient 0 at the kink

    out.loss = raw;
    auto& g = out.grads.protos;
    for (std::size_t i = 0; i < live[mi_a].size(); ++i) {
        g[kLive][mi_a][i] += spoof[mi_b][i];
        g[kSpoof][mi_b][i] += live[mi_a][i];
        g[mn_cls][mn_r][i] -= bank.protos[mn_cls][mn_t][i];
        g[mn_cls][mn_t][i] -= bank.protos[mn_cls][mn_r][i];
    }
    return out;
}

CenterLoss intra_center_loss(const PrototypeBank& bank, double delta2) {
    CenterLoss out;
    out.grads = zero_grads(bank);
    for (int cls = 0; cls < 2; ++cls) {
        const auto& ps = bank.protos[cls];
        for (std::size_t r = 0; r < ps.size(); ++r) {
            for (std::size_t t = r + 1; t < ps.size(); ++t) {
                double margin = dot(ps[r], ps[t]) - delta2;
                if (margin > 0.0) {
                    out.loss += margin;
                    for (std::size_t i = 0; i < ps[r].size(); ++i) {
                        out.grads.protos[cls][r][i] += ps[t][i];
                        out.grads.protos[cls][t][i] += ps[r][i];
                    }
                }
            }
        }
    }
    return out;
}

LdaLossResult lda_loss(const Matrix& embeddings, const std::vector<int>& labels,
                       const PrototypeBank& bank, const LdaConfig& cfg) {
    int B = embeddings.rows;
    if (B == 0) throw ContractViolation("lda_loss: empty batch");
    if (static_cast<int>(labels.size()) != B)
        throw ContractViolation("lda_loss: labels/batch size mismatch");
    if (embeddings.cols != bank.dim())
        throw ContractViolation("lda_loss: embedding/prototype dimension mismatch");

    LdaLossResult out;
    out.grad_embeddings = Matrix(B, embeddings.cols);
    out.grad_protos = zero_grads(bank);

    double inv_b = 1.0 / B;
    for (int i = 0; i < B; ++i) {
        Vec f = embeddings.row(i);
        ClassPrediction pred = class_similarity(f, bank, cfg.tau_w);
        PdLoss pd = prototype_data_loss(pred, labels[i], cfg.s, cfg.m);
        out.pd += pd.loss * inv_b;

        // Chain d cos(theta_j) / d sim_t = w_t (1 + (sim_t - cos_theta)/tau_w),
        // then sim_t = <f, P_j^t>.
        for (int cls = 0; cls < 2; ++cls) {
            double g_cos = pd.d_cos[cls] * inv_b;
            if (g_cos == 0.0) continue;
            const auto& sims = pred.sims[cls];
            const auto& w = pred.weights[cls];
            for (std::size_t t = 0; t < sims.size(); ++t) {
                double q = w[t] * (1.0 + (sims[t] - pred.cos_theta[cls]) / cfg.tau_w);
                double g = g_cos * q;
                const Vec& p = bank.protos[cls][t];
                for (int c = 0; c < embeddings.cols; ++c) {
                    out.grad_embeddings.at(i, c) += g * p[c];
                    out.grad_protos.protos[cls][t][c] += g * f[c];
                }
            }
        }
    }

    if (cfg.lambda1 > 0.0) {
        CenterLoss inter = inter_center_loss(bank, cfg.delta1);
        out.pc_inter = inter.loss;
        for (int cls = 0; cls < 2; ++cls)
            for (std::size_t r = 0; r < inter.grads.protos[cls].size(); ++r)
                for (std::size_t c = 0; c < inter.grads.protos[cls][r].size(); ++c)
                    out.grad_protos.protos[cls][r][c] +=
                        cfg.lambda1 * inter.grads.protos[cls][r][c];
    } else {
        out.pc_inter = inter_center_loss(bank, cfg.delta1).loss;
    }

    if (cfg.lambda2 > 0.0) {
        CenterLoss intra = intra_center_loss(bank, cfg.delta2);
        out.pc_intra = intra.loss;
        for (int cls = 0; cls < 2; ++cls)
            for (std::size_t r = 0; r < intra.grads.protos[cls].size(); ++r)
                for (std::size_t c = 0; c < intra.grads.protos[cls][r].size(); ++c)
                    out.grad_protos.protos[cls][r][c] +=
                        cfg.lambda2 * intra.grads.protos[cls][r][c];
    } else {
        out.pc_intra = intra_center_loss(bank, cfg.delta2).loss;
    }

    out.total = out.pd + cfg.lambda1 * out.pc_inter + cfg.lambda2 * out.pc_intra;
    return out;
}

AuxHeads init_aux_heads(int n_spoof_types, int n_illum, int dim, std::uint64_t seed) {
    if (n_spoof_types < 2 || n_illum < 2)
        throw ConfigError("init_aux_heads: each head needs at least two classes");
    Rng rng(seed);
    AuxHeads heads;
    double bound_s = std::sqrt(6.0 / (dim + n_spoof_types));
    heads.spoof_type = Matrix(n_spoof_types, dim);
    for (double& x : heads.spoof_type.data) x = rng.uniform(-bound_s, bound_s);
    double bound_i = std::sqrt(6.0 / (dim + n_illum));
    heads.illum = Matrix(n_illum, dim);
    for (double& x : heads.illum.data) x = rng.uniform(-bound_i, bound_i);
    return heads;
}

namespace {

// Softmax cross-entropy for one linear head; accumulates into the gradients.
double head_ce(const Vec& f, const Matrix& w, int label, double weight, Vec& grad_f,
               Matrix& grad_w) {
    int n = w.rows;
    if (label < 0 || label >= n)
        throw ContractViolation("aux_loss: label " + std::to_string(label) +
                                " out of range for " + std::to_string(n) + " classes");
    Vec logits(n);
    for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int c = 0; c < w.cols; ++c) s += w.at(k, c) * f[c];
        logits[k] = s;
    }
    double hi = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double l : logits) z += std::exp(l - hi);
    double loss = hi + std::log(z) - logits[label];

    for (int k = 0; k < n; ++k) {
        double p = std::exp(logits[k] - hi) / z;
        double g = weight * (p - (k == label ? 1.0 : 0.0));
        for (int c = 0; c < w.cols; ++c) {
            grad_w.at(k, c) += g * f[c];
            grad_f[c] += g * w.at(k, c);
        }
    }
    return loss;
}

} // namespace

AuxLossResult aux_loss(const Vec& embedding, const AuxHeads& heads, int spoof_type_label,
                       int illum_label, double lambda_s, double lambda_i) {
    AuxLossResult out;
    out.grad_embedding.assign(embedding.size(), 0.0);
    out.grad_spoof_w = Matrix(heads.spoof_type.rows, heads.spoof_type.cols);
    out.grad_illum_w = Matrix(heads.illum.rows, heads.illum.cols);

    double ce_s = head_ce(embedding, heads.spoof_type, spoof_type_label, lambda_s,
                          out.grad_embedding, out.grad_spoof_w);
    double ce_i = head_ce(embedding, heads.illum, illum_label, lambda_i,
                          out.grad_embedding, out.grad_illum_w);
    out.loss = lambda_s * ce_s + lambda_i * ce_i;
    return out;
}

LdaSLossResult lda_s_loss(const Matrix& embeddings, const std::vector<int>& labels,
                          const std::vector<int>& spoof_type_labels,
                          const std::vector<int>& illum_labels, const PrototypeBank& bank,
                          const AuxHeads& heads, const LdaConfig& cfg) {
    int B = embeddings.rows;
    if (static_cast<int>(spoof_type_labels.size()) != B ||
        static_cast<int>(illum_labels.size()) != B)
        throw ContractViolation("lda_s_loss: auxiliary label size mismatch");

    LdaLossResult base = lda_loss(embeddings, labels, bank, cfg);

    LdaSLossResult out;
    out.pd = base.pd;
    out.pc_inter = base.pc_inter;
    out.pc_intra = base.pc_intra;
    out.grad_embeddings = std::move(base.grad_embeddings);
    out.grad_protos = std::move(base.grad_protos);
    out.grad_spoof_w = Matrix(heads.spoof_type.rows, heads.spoof_type.cols);
    out.grad_illum_w = Matrix(heads.illum.rows, heads.illum.cols);

    double scale = cfg.lambda_aux / B;
    for (int i = 0; i < B; ++i) {
        Vec f = embeddings.row(i);
        AuxLossResult aux = aux_loss(f, heads, spoof_type_labels[i], illum_labels[i],
                                     cfg.lambda_s, cfg.lambda_i);
        out.aux += aux.loss / B;
        for (int c = 0; c < embeddings.cols; ++c)
            out.grad_embeddings.at(i, c) += scale * aux.grad_embedding[c];
        for (std::size_t k = 0; k < aux.grad_spoof_w.data.size(); ++k)
            out.grad_spoof_w.data[k] += scale * aux.grad_spoof_w.data[k];
        for (std::size_t k = 0; k < aux.grad_illum_w.data.size(); ++k)
            out.grad_illum_w.data[k] += scale * aux.grad_illum_w.data[k];
    }
    out.total = base.total + cfg.lambda_aux * out.aux;
    return out;
}

double spoof_score(const ClassPrediction& pred, double s) {
    return sigmoid(s * (pred.cos_theta[kSpoof] - pred.cos_theta[kLive]));
}

PrototypeBank init_bank(int k_init, int dim, std::uint64_t seed) {
    if (k_init < 1) throw ConfigError("init_bank: k_init must be at least 1");
    if (dim < 1) throw ConfigError("init_bank: dim must be at least 1");
    Rng rng(seed);
    PrototypeBank bank;
    for (int cls = 0; cls < 2; ++cls) {
        bank.protos[cls].reserve(k_init);
        for (int r = 0; r < k_init; ++r) {
            Vec p(dim);
            do {
                for (double& x : p) x = rng.uniform(-1.0, 1.0);
            } while (l2_norm(p) < 1e-6); // redraw astronomically rare near-zero draws
            bank.protos[cls].push_back(normalized(p));
        }
    }
    return bank;
}

} // namespace lda
