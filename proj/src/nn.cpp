#include "lsrl/nn.hpp"

#include <cmath>
#include <limits>

#include "lsrl/errors.hpp"

namespace lsrl {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSigmaFloor = 1e-12;
}

Tensor apply_act(const Tensor& x, Act act, double slope) {
    switch (act) {
        case Act::None: return x;
        case Act::LeakyRelu: return leaky_relu(x, slope);
        case Act::Tanh: return tanh(x);
        case Act::Sigmoid: return sigmoid(x);
    }
    return x;
}

Tensor init_affine_weight(std::size_t out, std::size_t in, Act act, double slope, Rng& rng) {
    double std_dev;
    if (act == Act::LeakyRelu) {
        std_dev = std::sqrt(2.0 / ((1.0 + slope * slope) * static_cast<double>(in)));
    } else {
        std_dev = std::sqrt(1.0 / static_cast<double>(in));
    }
    std::vector<double> w(out * in);
    for (double& x : w) x = rng.normal(0.0, std_dev);
    return Tensor::from_data({out, in}, std::move(w));
}

SpectralNorm SpectralNorm::init(std::size_t out, std::size_t in, Rng& rng) {
    SpectralNorm sn;
    std::vector<double> u(out), v(in);
    double nu = 0.0, nv = 0.0;
    for (double& x : u) { x = rng.normal(); nu += x * x; }
    for (double& x : v) { x = rng.normal(); nv += x * x; }
    nu = std::sqrt(nu);
    nv = std::sqrt(nv);
    for (double& x : u) x /= nu;
    for (double& x : v) x /= nv;
    sn.u = Tensor::from_data({out}, std::move(u));
    sn.v = Tensor::from_data({in}, std::move(v));
    return sn;
}

void SpectralNorm::power_iterate(const Tensor& W) const {
    const std::size_t out = W.shape()[0], in = W.shape()[1];
    const auto& w = W.data();
    auto& ud = u.impl()->data;
    auto& vd = v.impl()->data;

    // v <- normalize(W^T u), u <- normalize(W v)
    double norm = 0.0;
    for (std::size_t j = 0; j < in; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < out; ++i) s += w[i * in + j] * ud[i];
        vd[j] = s;
        norm += s * s;
    }
    norm = std::max(std::sqrt(norm), kSigmaFloor);
    for (double& x : vd) x /= norm;

    norm = 0.0;
    for (std::size_t i = 0; i < out; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < in; ++j) s += w[i * in + j] * vd[j];
        ud[i] = s;
        norm += s * s;
    }
    norm = std::max(std::sqrt(norm), kSigmaFloor);
    for (double& x : ud) x /= norm;
}

double SpectralNorm::sigma_estimate(const Tensor& W) const {
    const std::size_t out = W.shape()[0], in = W.shape()[1];
    const auto& w = W.data();
    const auto& ud = u.data();
    const auto& vd = v.data();
    double sigma = 0.0;
    for (std::size_t i = 0; i < out; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < in; ++j) s += w[i * in + j] * vd[j];
        sigma += ud[i] * s;
    }
    return sigma;
}

Tensor SpectralNorm::apply(const Tensor& W, bool update) const {
    if (W.rank() != 2) throw ShapeError("spectral norm expects a matrix, got " + shape_str(W.shape()));
    if (update) {
        for (int i = 0; i < iters; ++i) power_iterate(W);
    }
    const std::size_t out = W.shape()[0], in = W.shape()[1];
    Tensor u_row = reshape(u, {1, out});
    Tensor v_col = reshape(v, {in, 1});
    Tensor sigma = clamp(matmul(matmul(u_row, W), v_col), kSigmaFloor, kInf);
    return div(W, reshape(sigma, {1}));
}

Tensor AffineLayer::forward(const Tensor& x, bool train) const {
    Tensor weight = sn ? sn->apply(W, train) : W;
    Tensor y = add(matmul(x, transpose_last2(weight)), b);
    return apply_act(y, act, slope);
}

Tensor SelfAttention1D::forward(const Tensor& x, bool train) const {
    if (x.rank() != 3 || x.shape()[1] != Wk.shape()[1]) {
        throw ShapeError("attention expects [batch x " + std::to_string(Wk.shape()[1]) +
                         " x n], got " + shape_str(x.shape()));
    }
    Tensor k_eff = sn_k ? sn_k->apply(Wk, train) : Wk;
    Tensor q_eff = sn_q ? sn_q->apply(Wq, train) : Wq;
    Tensor v_eff = sn_v ? sn_v->apply(Wv, train) : Wv;
    Tensor h_eff = sn_h ? sn_h->apply(Wh, train) : Wh;

    Tensor keys = matmul(k_eff, x);     // [B x c x n]
    Tensor queries = matmul(q_eff, x);  // [B x c x n]
    Tensor hidden = matmul(h_eff, x);   // [B x c x n]

    // scores[b][j][i] = q(x_j) . k(x_i); softmax over i makes each row of
    // beta a distribution over source positions.
    Tensor scores = matmul(transpose_last2(queries), keys);  // [B x n x n]
    Tensor beta = softmax(scores);
    Tensor mixed = matmul(hidden, transpose_last2(beta));    // [B x c x n]
    Tensor o = matmul(v_eff, mixed);
    return add(x, mul(o, gamma));
}

Tensor SelfAttention1D::attention(const Tensor& x) const {
    Tensor k_eff = sn_k ? sn_k->apply(Wk, false) : Wk;
    Tensor q_eff = sn_q ? sn_q->apply(Wq, false) : Wq;
    Tensor keys = matmul(k_eff, x);
    Tensor queries = matmul(q_eff, x);
    return softmax(matmul(transpose_last2(queries), keys));
}

Tensor bce_loss(const Tensor& recon, const Tensor& target) {
    if (recon.shape() != target.shape()) {
        throw ShapeError("bce_loss: shapes differ, " + shape_str(recon.shape()) + " vs " +
                         shape_str(target.shape()));
    }
    Tensor pos = mul(target, log(recon));
    Tensor negt = mul(sub(1.0, target), log(sub(1.0, recon)));
    return neg(mean(add(pos, negt)));
}

Tensor hinge_d_loss(const Tensor& d_real, const Tensor& d_fake) {
    Tensor real_margin = mean(clamp(sub(d_real, 1.0), -kInf, 0.0));   // E[min(0, -1 + D(real))]
    Tensor fake_margin = mean(clamp(sub(-1.0, d_fake), -kInf, 0.0));  // E[min(0, -1 - D(fake))]
    return neg(add(real_margin, fake_margin));
}

Tensor hinge_g_loss(const Tensor& d_fake) { return neg(mean(d_fake)); }

Tensor cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
    const std::size_t classes = logits.shape().back();
    const std::size_t rows = logits.size() / classes;
    if (rows != labels.size()) {
        throw ShapeError("cross_entropy: " + std::to_string(rows) + " rows vs " +
                         std::to_string(labels.size()) + " labels");
    }
    for (int l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= classes) {
            throw StateError("cross_entropy: label " + std::to_string(l) + " out of range 0.." +
                             std::to_string(classes - 1));
        }
    }
    Tensor probs = softmax(logits);
    Tensor picked = sum_axis(mul(probs, onehot(labels, classes)), logits.rank() - 1);
    return neg(mean(log(picked)));
}

Tensor softmax_probs(const Tensor& logits) { return softmax(logits); }

}  // namespace lsrl
