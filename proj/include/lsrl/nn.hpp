#pragma once

#include <optional>
#include <vector>

#include "lsrl/ops.hpp"
#include "lsrl/rng.hpp"
#include "lsrl/tensor.hpp"

namespace lsrl {

enum class Act { None, LeakyRelu, Tanh, Sigmoid };

Tensor apply_act(const Tensor& x, Act act, double slope = 0.2);

// He initialization for leaky-relu layers, Xavier otherwise; biases zero.
Tensor init_affine_weight(std::size_t out, std::size_t in, Act act, double slope, Rng& rng);

// Spectral normalization of one weight matrix by power iteration. u and v
// persist across forwards (they live in the owning model's ParamStore as
// buffers, excluded from gradients and optimizer state, included in
// checkpoints). The forward uses W / sigma_hat with sigma_hat = u^T W v
// treated as a function of W only; no gradient flows through the iteration.
struct SpectralNorm {
    Tensor u;  // [out]
    Tensor v;  // [in]
    int iters = 1;

    static SpectralNorm init(std::size_t out, std::size_t in, Rng& rng);

    // One power-iteration step per call when update is true (training); the
    // estimate is floored at 1e-12 so a zero matrix stays finite.
    Tensor apply(const Tensor& W, bool update) const;

    void power_iterate(const Tensor& W) const;
    double sigma_estimate(const Tensor& W) const;
};

struct AffineLayer {
    Tensor W;  // [out x in]
    Tensor b;  // [out]
    Act act = Act::None;
    double slope = 0.2;
    std::optional<SpectralNorm> sn;

    Tensor forward(const Tensor& x, bool train = false) const;
};

// 1-D self-attention over feature maps x of shape [batch x c x n]
// (c channels, n positions):
//
//   s_ij   = k(x_i)^T q(x_j)          k(x) = Wk x, q(x) = Wq x
//   beta_ji = exp(s_ij) / sum_i exp(s_ij)
//   o_j    = v(sum_i beta_ji h(x_i))  h(x) = Wh x, v(x) = Wv x
//   out    = x + gamma * o
//
// gamma starts at zero, so a fresh block is the identity map. All four
// projections are square [c x c] and spectral-normalized when sn_* is set.
struct SelfAttention1D {
    Tensor Wk, Wq, Wv, Wh;  // [c x c]
    Tensor gamma;           // [1]
    std::optional<SpectralNorm> sn_k, sn_q, sn_v, sn_h;

    Tensor forward(const Tensor& x, bool train = false) const;

    // Row-stochastic attention weights beta [batch x n x n], current
    // effective projections, no power-iteration update.
    Tensor attention(const Tensor& x) const;
};

// Losses. All reduce to a scalar by mean over every element / batch row.
Tensor bce_loss(const Tensor& recon, const Tensor& target);
Tensor hinge_d_loss(const Tensor& d_real, const Tensor& d_fake);
Tensor hinge_g_loss(const Tensor& d_fake);
Tensor cross_entropy(const Tensor& logits, const std::vector<int>& labels);
Tensor softmax_probs(const Tensor& logits);

}  // namespace lsrl
