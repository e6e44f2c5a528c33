#include "lda/model.hpp"

#include <cmath>
#include <string>

#include "lda/errors.hpp"
#include "lda/rng.hpp"

namespace lda {

MlpParams init_params(const std::vector<int>& layer_sizes, std::uint64_t seed) {
    if (layer_sizes.size() < 2)
        throw ConfigError("init_params: need at least input and output sizes, got " +
                          std::to_string(layer_sizes.size()));
    for (int s : layer_sizes)
        if (s <= 0) throw ConfigError("init_params: layer size must be positive");

    MlpParams p;
    p.layer_sizes = layer_sizes;
    Rng rng(seed);
    for (std::size_t k = 0; k + 1 < layer_sizes.size(); ++k) {
        int fan_in = layer_sizes[k];
        int fan_out = layer_sizes[k + 1];
        double bound = std::sqrt(6.0 / (fan_in + fan_out));
        Matrix w(fan_out, fan_in);
        for (double& x : w.data) x = rng.uniform(-bound, bound);
        p.weights.push_back(std::move(w));
        p.biases.emplace_back(fan_out, 0.0);
    }
    return p;
}

std::pair<Matrix, ForwardTape> forward(const MlpParams& params, const Matrix& batch) {
    if (batch.cols != params.input_dim())
        throw ContractViolation("forward: batch has " + std::to_string(batch.cols) +
                                " columns, model expects " +
                                std::to_string(params.input_dim()));
    if (!all_finite(batch))
        throw ContractViolation("forward: non-finite input");

    int B = batch.rows;
    int L = params.num_layers();

    ForwardTape tape;
    tape.input = batch;

    Matrix cur = batch;
    for (int k = 0; k < L; ++k) {
        const Matrix& W = params.weights[k];
        const Vec& b = params.biases[k];
        Matrix z(B, W.rows);
        for (int i = 0; i < B; ++i) {
            for (int o = 0; o < W.rows; ++o) {
                double s = b[o];
                for (int c = 0; c < W.cols; ++c) s += W.at(o, c) * cur.at(i, c);
                z.at(i, o) = s;
            }
        }
        tape.pre_acts.push_back(z);
        if (k + 1 < L) {
            Matrix a = z;
            for (double& x : a.data) x = x > 0.0 ? x : 0.0;
            tape.acts.push_back(a);
            cur = std::move(a);
        } else {
            cur = std::move(z);
        }
    }

    // L2-normalize each row; norm floored at kNormEps so zero features stay defined.
    int N = params.output_dim();
    tape.norms.resize(B);
    Matrix out(B, N);
    for (int i = 0; i < B; ++i) {
        double n2 = 0.0;
        for (int c = 0; c < N; ++c) n2 += cur.at(i, c) * cur.at(i, c);
        double n = std::max(std::sqrt(n2), kNormEps);
        tape.norms[i] = n;
        for (int c = 0; c < N; ++c) out.at(i, c) = cur.at(i, c) / n;
    }
    tape.embeddings = out;
    return {out, std::move(tape)};
}

MlpGrads backward(const MlpParams& params, const ForwardTape& tape,
                  const Matrix& grad_embeddings) {
    int B = tape.input.rows;
    int N = params.output_dim();
    int L = params.num_layers();
    if (grad_embeddings.rows != B || grad_embeddings.cols != N)
        throw ContractViolation("backward: grad_embeddings shape mismatch");

    MlpGrads grads;
    grads.weights.reserve(L);
    grads.biases.reserve(L);
    for (int k = 0; k < L; ++k) {
        grads.weights.emplace_back(params.weights[k].rows, params.weights[k].cols);
        grads.biases.emplace_back(params.biases[k].size(), 0.0);
    }

    // Through f = v / n with n = max(||v||, eps):
    //   ||v|| > eps:  dv = (g - (g.f) f) / n
    //   floor active: f = v / eps, dv = g / eps
    Matrix dz(B, N);
    for (int i = 0; i < B; ++i) {
        double n = tape.norms[i];
        bool floored = n <= kNormEps;
        double gf = 0.0;
        if (!floored)
            for (int c = 0; c < N; ++c) gf += grad_embeddings.at(i, c) * tape.embeddings.at(i, c);
        for (int c = 0; c < N; ++c) {
            double g = grad_embeddings.at(i, c);
            dz.at(i, c) = floored ? g / n : (g - gf * tape.embeddings.at(i, c)) / n;
        }
    }

    for (int k = L - 1; k >= 0; --k) {
        const Matrix& a_prev = (k == 0) ? tape.input : tape.acts[k - 1];
        Matrix& dW = grads.weights[k];
        Vec& db = grads.biases[k];
        for (int i = 0; i < B; ++i) {
            for (int o = 0; o < dW.rows; ++o) {
                double g = dz.at(i, o);
                db[o] += g;
                for (int c = 0; c < dW.cols; ++c) dW.at(o, c) += g * a_prev.at(i, c);
            }
        }
        if (k == 0) break;
        // da_prev = W^T dz, then gate by relu'(z_prev); subgradient 0 at z == 0.
        const Matrix& W = params.weights[k];
        const Matrix& z_prev = tape.pre_acts[k - 1];
        Matrix da(B, W.cols);
        for (int i = 0; i < B; ++i) {
            for (int c = 0; c < W.cols; ++c) {
                double s = 0.0;
                for (int o = 0; o < W.rows; ++o) s += W.at(o, c) * dz.at(i, o);
                da.at(i, c) = z_prev.at(i, c) > 0.0 ? s : 0.0;
            }
        }
        dz = std::move(da);
    }
    return grads;
}

} // namespace lda
