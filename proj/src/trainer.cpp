#include "lda/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lda/errors.hpp"
#include "lda/oracles.hpp"
#include "lda/rng.hpp"

namespace lda {

void validate(const TrainConfig& cfg) {
    validate(cfg.lda);
    if (cfg.layer_sizes.size() < 2)
        throw ConfigError("TrainConfig: layer_sizes needs input and output dims");
    if (cfg.epochs < 1) throw ConfigError("TrainConfig: epochs must be >= 1");
    if (cfg.batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
    if (!(cfg.lr >= 0.0)) throw ConfigError("TrainConfig: lr must be non-negative");
    if (cfg.momentum < 0.0 || cfg.momentum >= 1.0)
        throw ConfigError("TrainConfig: momentum must be in [0, 1)");
    if (cfg.use_aux && (cfg.n_spoof_types < 2 || cfg.n_illum < 2))
        throw ConfigError("TrainConfig: auxiliary heads need >= 2 classes each");
}

namespace {

void check_split(const std::vector<LabeledSample>& set, const std::string& name) {
    if (set.empty()) throw ContractViolation("train: " + name + " set is empty");
    bool has_live = false, has_spoof = false;
    for (const auto& s : set) (s.y == 0 ? has_live : has_spoof) = true;
    if (!has_live || !has_spoof)
        throw ContractViolation("train: " + name + " set is missing a class");
}

// v <- mu*v + g; p <- p - lr*v
void sgd_step(Vec& param, Vec& velocity, const Vec& grad, double lr, double mu) {
    for (std::size_t i = 0; i < param.size(); ++i) {
        velocity[i] = mu * velocity[i] + grad[i];
        param[i] -= lr * velocity[i];
    }
}

void sgd_step(Matrix& param, Matrix& velocity, const Matrix& grad, double lr, double mu) {
    sgd_step(param.data, velocity.data, grad.data, lr, mu);
}

} // namespace

TrainResult train(const TrainConfig& cfg, const std::vector<LabeledSample>& train_set,
                  const std::vector<LabeledSample>& dev_set, const StepHook& hook) {
    validate(cfg);
    check_split(train_set, "train");
    check_split(dev_set, "dev");

    int n = static_cast<int>(train_set.size());
    int dim_out = cfg.layer_sizes.back();

    TrainResult result;
    result.model = init_params(cfg.layer_sizes, derive_seed(cfg.seed, 0));
    result.bank = init_bank(cfg.lda.k_init, dim_out, derive_seed(cfg.seed, 1));
    if (cfg.use_aux)
        result.aux = init_aux_heads(cfg.n_spoof_types, cfg.n_illum, dim_out,
                                    derive_seed(cfg.seed, 2));
    Rng shuffle_rng(derive_seed(cfg.seed, 3));

    // Ablation flags gate the center/auxiliary terms.
    LdaConfig eff = cfg.lda;
    if (!cfg.use_pc_inter) eff.lambda1 = 0.0;
    if (!cfg.use_pc_intra) eff.lambda2 = 0.0;

    // Momentum buffers.
    std::vector<Matrix> vel_w;
    std::vector<Vec> vel_b;
    for (int k = 0; k < result.model.num_layers(); ++k) {
        vel_w.emplace_back(result.model.weights[k].rows, result.model.weights[k].cols);
        vel_b.emplace_back(result.model.biases[k].size(), 0.0);
    }
    BankGrads vel_p = zero_grads(result.bank);
    Matrix vel_aux_s, vel_aux_i;
    if (cfg.use_aux) {
        vel_aux_s = Matrix(result.aux.spoof_type.rows, result.aux.spoof_type.cols);
        vel_aux_i = Matrix(result.aux.illum.rows, result.aux.illum.cols);
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);

        EpochStats stats;
        double pd_weighted = 0.0, aux_weighted = 0.0, total_weighted = 0.0;
        double inter_sum = 0.0, intra_sum = 0.0;
        int steps = 0;

        for (int start = 0; start < n; start += cfg.batch_size) {
            int bsz = std::min(cfg.batch_size, n - start);
            Matrix batch(bsz, cfg.layer_sizes.front());
            std::vector<int> labels(bsz), spoof_types(bsz), illums(bsz);
            for (int i = 0; i < bsz; ++i) {
                const LabeledSample& s = train_set[order[start + i]];
                batch.set_row(i, s.x);
                labels[i] = s.y;
                spoof_types[i] = s.spoof_type;
                illums[i] = s.illum;
            }

            auto [embeddings, tape] = forward(result.model, batch);

            double loss_total, loss_pd, loss_inter, loss_intra, loss_aux = 0.0;
            Matrix grad_emb;
            BankGrads grad_protos;
            Matrix grad_aux_s, grad_aux_i;
            if (cfg.use_aux) {
                LdaSLossResult loss = lda_s_loss(embeddings, labels, spoof_types, illums,
                                                 result.bank, result.aux, eff);
                loss_total = loss.total;
                loss_pd = loss.pd;
                loss_inter = loss.pc_inter;
                loss_intra = loss.pc_intra;
                loss_aux = loss.aux;
                grad_emb = std::move(loss.grad_embeddings);
                grad_protos = std::move(loss.grad_protos);
                grad_aux_s = std::move(loss.grad_spoof_w);
                grad_aux_i = std::move(loss.grad_illum_w);
            } else {
                LdaLossResult loss = lda_loss(embeddings, labels, result.bank, eff);
                loss_total = loss.total;
                loss_pd = loss.pd;
                loss_inter = loss.pc_inter;
                loss_intra = loss.pc_intra;
                grad_emb = std::move(loss.grad_embeddings);
                grad_protos = std::move(loss.grad_protos);
            }

            if (!std::isfinite(loss_total))
                throw TrainingDiverged("non-finite loss at epoch " +
                                       std::to_string(epoch) + " step " +
                                       std::to_string(steps));

            MlpGrads mg = backward(result.model, tape, grad_emb);
            for (int k = 0; k < result.model.num_layers(); ++k) {
                sgd_step(result.model.weights[k], vel_w[k], mg.weights[k], cfg.lr,
                         cfg.momentum);
                sgd_step(result.model.biases[k], vel_b[k], mg.biases[k], cfg.lr,
                         cfg.momentum);
            }
            for (int cls = 0; cls < 2; ++cls) {
                for (std::size_t r = 0; r < result.bank.protos[cls].size(); ++r) {
                    sgd_step(result.bank.protos[cls][r], vel_p.protos[cls][r],
                             grad_protos.protos[cls][r], cfg.lr, cfg.momentum);
                    result.bank.protos[cls][r] = normalized(result.bank.protos[cls][r]);
                    stats.max_proto_norm_err =
                        std::max(stats.max_proto_norm_err,
                                 std::fabs(l2_norm(result.bank.protos[cls][r]) - 1.0));
                }
            }
            if (cfg.use_aux) {
                sgd_step(result.aux.spoof_type, vel_aux_s, grad_aux_s, cfg.lr,
                         cfg.momentum);
                sgd_step(result.aux.illum, vel_aux_i, grad_aux_i, cfg.lr, cfg.momentum);
            }

            if (hook) hook(epoch, steps, result.model, result.bank);

            pd_weighted += loss_pd * bsz;
            aux_weighted += loss_aux * bsz;
            total_weighted += loss_total * bsz;
            inter_sum += loss_inter;
            intra_sum += loss_intra;
            ++steps;
        }

        stats.pd = pd_weighted / n;
        stats.aux = aux_weighted / n;
        stats.total = total_weighted / n;
        stats.pc_inter = inter_sum / steps;
        stats.pc_intra = intra_sum / steps;

        ScoredSet train_scores = score_samples(result.model, result.bank, eff, train_set);
        stats.train_acer =
            rates_at_threshold(train_scores, select_threshold(train_scores)).acer;

        result.history.epochs.push_back(stats);
    }

    result.history.final_dev =
        evaluate(result.model, result.bank, cfg.lda, dev_set, dev_set);
    return result;
}

ScoredSet score_samples(const MlpParams& model, const PrototypeBank& bank,
                        const LdaConfig& cfg, const std::vector<LabeledSample>& samples) {
    ScoredSet out;
    if (samples.empty()) return out;
    Matrix batch(static_cast<int>(samples.size()), model.input_dim());
    for (std::size_t i = 0; i < samples.size(); ++i)
        batch.set_row(static_cast<int>(i), samples[i].x);
    auto [embeddings, tape] = forward(model, batch);
    out.scores.reserve(samples.size());
    out.labels.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        ClassPrediction pred =
            class_similarity(embeddings.row(static_cast<int>(i)), bank, cfg.tau_w);
        out.scores.push_back(spoof_score(pred, cfg.s));
        out.labels.push_back(samples[i].y);
    }
    return out;
}

EvalReport evaluate(const MlpParams& model, const PrototypeBank& bank,
                    const LdaConfig& cfg, const std::vector<LabeledSample>& dev_set,
                    const std::vector<LabeledSample>& test_set,
                    const std::vector<double>& fpr_targets) {
    ScoredSet dev_scores = score_samples(model, bank, cfg, dev_set);
    ScoredSet test_scores = score_samples(model, bank, cfg, test_set);

    EvalReport report;
    report.threshold = select_threshold(dev_scores);
    Rates r = rates_at_threshold(test_scores, report.threshold);
    report.apcer = r.apcer;
    report.bpcer = r.bpcer;
    report.acer = r.acer;
    report.hter = hter(test_scores, report.threshold);
    for (double target : fpr_targets)
        report.tpr_at_fpr.emplace_back(target, tpr_at_fpr(test_scores, target));
    return report;
}

namespace {

struct GradCheckInstance {
    Matrix embeddings;
    std::vector<int> labels, spoof_types, illums;
    PrototypeBank bank;
    AuxHeads aux;
    LdaConfig cfg;
};

Vec random_unit(Rng& rng, int dim) {
    Vec v(dim);
    for (double& x : v) x = rng.gaussian();
    return normalized(v);
}

// Rejects instances near non-differentiable points: aggregated cosines close
// to the clamp region, hinge arguments close to 0, near-ties in the
// inter-loss argmax/argmin.
bool instance_is_smooth(const GradCheckInstance& inst) {
    constexpr double kGuard = 1e-3;

    for (int i = 0; i < inst.embeddings.rows; ++i) {
        ClassPrediction pred =
            class_similarity(inst.embeddings.row(i), inst.bank, inst.cfg.tau_w);
        for (int cls = 0; cls < 2; ++cls)
            if (std::fabs(pred.cos_theta[cls]) > 0.9) return false;
    }

    std::vector<double> cross, intra;
    for (const Vec& a : inst.bank.protos[kLive])
        for (const Vec& b : inst.bank.protos[kSpoof]) cross.push_back(dot(a, b));
    for (int cls = 0; cls < 2; ++cls) {
        const auto& ps = inst.bank.protos[cls];
        for (std::size_t r = 0; r < ps.size(); ++r)
            for (std::size_t t = r + 1; t < ps.size(); ++t)
                intra.push_back(dot(ps[r], ps[t]));
    }

    for (double sim : intra)
        if (std::fabs(sim - inst.cfg.delta2) < kGuard) return false;

    if (!intra.empty()) {
        double max_inter = *std::max_element(cross.begin(), cross.end());
        double min_intra = *std::min_element(intra.begin(), intra.end());
        if (std::fabs(max_inter - min_intra + inst.cfg.delta1) < kGuard) return false;

        std::sort(cross.begin(), cross.end());
        if (cross.size() >= 2 && cross[cross.size() - 1] - cross[cross.size() - 2] < kGuard)
            return false;
        std::sort(intra.begin(), intra.end());
        if (intra.size() >= 2 && intra[1] - intra[0] < kGuard) return false;
    }
    return true;
}

GradCheckInstance make_instance(Rng& rng, int trial) {
    GradCheckInstance inst;
    int N = 2 + static_cast<int>(rng.next_below(7));   // 2..8
    int kl = 1 + static_cast<int>(rng.next_below(4));  // 1..4
    int ks = 1 + static_cast<int>(rng.next_below(4));
    int B = 1 + static_cast<int>(rng.next_below(8));   // 1..8

    inst.cfg.s = std::exp(rng.uniform(0.0, std::log(64.0)));
    inst.cfg.m = trial % 2 == 0 ? 0.0 : rng.uniform(0.1, 1.2);
    inst.cfg.tau_w = rng.uniform(0.1, 1.0);
    inst.cfg.delta1 = rng.uniform(0.0, 1.0);
    inst.cfg.delta2 = rng.uniform(-0.5, 0.5);
    inst.cfg.lambda1 = rng.uniform(0.01, 0.5);
    inst.cfg.lambda2 = rng.uniform(0.01, 0.5);
    inst.cfg.lambda_s = rng.uniform(0.1, 1.0);
    inst.cfg.lambda_i = rng.uniform(0.1, 1.0);
    inst.cfg.lambda_aux = rng.uniform(0.1, 1.0);

    int n_s = 2 + static_cast<int>(rng.next_below(3));
    int n_i = 2 + static_cast<int>(rng.next_below(2));
    inst.aux = init_aux_heads(n_s, n_i, N, rng.next_u64());

    inst.embeddings = Matrix(B, N);
    for (int i = 0; i < B; ++i) inst.embeddings.set_row(i, random_unit(rng, N));
    inst.labels.resize(B);
    inst.spoof_types.resize(B);
    inst.illums.resize(B);
    for (int i = 0; i < B; ++i) {
        inst.labels[i] = static_cast<int>(rng.next_below(2));
        inst.spoof_types[i] = static_cast<int>(rng.next_below(n_s));
        inst.illums[i] = static_cast<int>(rng.next_below(n_i));
    }
    for (int r = 0; r < kl; ++r) inst.bank.protos[kLive].push_back(random_unit(rng, N));
    for (int r = 0; r < ks; ++r) inst.bank.protos[kSpoof].push_back(random_unit(rng, N));
    return inst;
}

Vec flatten_bank(const std::array<std::vector<Vec>, 2>& protos) {
    Vec flat;
    for (int cls = 0; cls < 2; ++cls)
        for (const Vec& p : protos[cls]) flat.insert(flat.end(), p.begin(), p.end());
    return flat;
}

PrototypeBank unflatten_bank(const PrototypeBank& shape, const Vec& flat) {
    PrototypeBank bank = shape;
    std::size_t k = 0;
    for (int cls = 0; cls < 2; ++cls)
        for (Vec& p : bank.protos[cls])
            for (double& x : p) x = flat[k++];
    return bank;
}

void track(GradCheckReport& report, const std::string& what, const Vec& analytic,
           const Vec& fd) {
    double err = oracles::max_rel_err(analytic, fd);
    if (err > report.max_rel_err) {
        report.max_rel_err = err;
        report.worst_case = what;
    }
}

void check_instance(const GradCheckInstance& inst, GradCheckReport& report) {
    // Pure data loss (center weights zeroed), full combined loss, and the
    // auxiliary-augmented loss each get embedding + prototype checks.
    LdaConfig pd_only = inst.cfg;
    pd_only.lambda1 = 0.0;
    pd_only.lambda2 = 0.0;

    const auto with_embeddings = [&](const LdaConfig& cfg, const Vec& flat) {
        Matrix emb = inst.embeddings;
        emb.data = flat;
        return lda_loss(emb, inst.labels, inst.bank, cfg).total;
    };
    const auto with_bank = [&](const LdaConfig& cfg, const Vec& flat) {
        return lda_loss(inst.embeddings, inst.labels, unflatten_bank(inst.bank, flat), cfg)
            .total;
    };

    for (const auto& [name, cfg] : std::initializer_list<
             std::pair<const char*, const LdaConfig*>>{{"pd", &pd_only},
                                                       {"lda", &inst.cfg}}) {
        LdaLossResult res = lda_loss(inst.embeddings, inst.labels, inst.bank, *cfg);
        const LdaConfig& c = *cfg;
        track(report, std::string(name) + "/embeddings", res.grad_embeddings.data,
              oracles::fd_gradient([&](const Vec& x) { return with_embeddings(c, x); },
                                   inst.embeddings.data));
        track(report, std::string(name) + "/prototypes", flatten_bank(res.grad_protos.protos),
              oracles::fd_gradient([&](const Vec& x) { return with_bank(c, x); },
                                   flatten_bank(inst.bank.protos)));
    }

    // Standalone center losses against prototype perturbations.
    CenterLoss inter = inter_center_loss(inst.bank, inst.cfg.delta1);
    track(report, "inter/prototypes", flatten_bank(inter.grads.protos),
          oracles::fd_gradient(
              [&](const Vec& x) {
                  return inter_center_loss(unflatten_bank(inst.bank, x), inst.cfg.delta1)
                      .loss;
              },
              flatten_bank(inst.bank.protos)));
    CenterLoss intra = intra_center_loss(inst.bank, inst.cfg.delta2);
    track(report, "intra/prototypes", flatten_bank(intra.grads.protos),
          oracles::fd_gradient(
              [&](const Vec& x) {
                  return intra_center_loss(unflatten_bank(inst.bank, x), inst.cfg.delta2)
                      .loss;
              },
              flatten_bank(inst.bank.protos)));

    // Auxiliary-augmented loss: embeddings, prototypes and head weights.
    LdaSLossResult res_s = lda_s_loss(inst.embeddings, inst.labels, inst.spoof_types,
                                      inst.illums, inst.bank, inst.aux, inst.cfg);
    const auto s_loss = [&](const Matrix& emb, const PrototypeBank& bank,
                            const AuxHeads& aux) {
        return lda_s_loss(emb, inst.labels, inst.spoof_types, inst.illums, bank, aux,
                          inst.cfg)
            .total;
    };
    track(report, "lda_s/embeddings", res_s.grad_embeddings.data,
          oracles::fd_gradient(
              [&](const Vec& x) {
                  Matrix emb = inst.embeddings;
                  emb.data = x;
                  return s_loss(emb, inst.bank, inst.aux);
              },
              inst.embeddings.data));
    track(report, "lda_s/prototypes", flatten_bank(res_s.grad_protos.protos),
          oracles::fd_gradient(
              [&](const Vec& x) {
                  return s_loss(inst.embeddings, unflatten_bank(inst.bank, x), inst.aux);
              },
              flatten_bank(inst.bank.protos)));
    track(report, "lda_s/spoof_head", res_s.grad_spoof_w.data,
          oracles::fd_gradient(
              [&](const Vec& x) {
                  AuxHeads aux = inst.aux;
                  aux.spoof_type.data = x;
                  return s_loss(inst.embeddings, inst.bank, aux);
              },
              inst.aux.spoof_type.data));
    track(report, "lda_s/illum_head", res_s.grad_illum_w.data,
          oracles::fd_gradient(
              [&](const Vec& x) {
                  AuxHeads aux = inst.aux;
                  aux.illum.data = x;
                  return s_loss(inst.embeddings, inst.bank, aux);
              },
              inst.aux.illum.data));
}

} // namespace

GradCheckReport grad_check(const TrainConfig& cfg, int n_trials, double tolerance) {
    GradCheckReport report;
    report.tolerance = tolerance;
    if (n_trials <= 0) {
        report.worst_case = "no trials run; vacuous pass";
        return report;
    }

    Rng rng(derive_seed(cfg.seed, 7));
    for (int trial = 0; trial < n_trials; ++trial) {
        GradCheckInstance inst = make_instance(rng, trial);
        int attempts = 0;
        while (!instance_is_smooth(inst) && attempts < 200) {
            inst = make_instance(rng, trial);
            ++report.resamples;
            ++attempts;
        }
        check_instance(inst, report);
        ++report.trials;
    }
    report.pass = report.max_rel_err < tolerance;
    return report;
}

} // namespace lda
