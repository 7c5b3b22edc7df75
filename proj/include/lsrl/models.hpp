#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsrl/nn.hpp"
#include "lsrl/param_store.hpp"

namespace lsrl {

// The five fixed networks. Layer handles share storage with the model's
// ParamStore, so loading a checkpoint into the store updates the layers in
// place. Forward methods are const: only spectral-norm power iteration
// mutates state, and only when called with train = true.

// 784 -> 256 -> 64 -> 32 encoder, mirrored decoder with sigmoid output.
struct AutoEncoder {
    ParamStore params;
    AffineLayer enc1, enc2, enc3;
    AffineLayer dec1, dec2, dec3;

    static AutoEncoder init(std::uint64_t seed);

    Tensor encode(const Tensor& images) const;
    Tensor decode(const Tensor& codes) const;
    Tensor reconstruct(const Tensor& images) const;

    static constexpr std::size_t kCodeDim = 32;
};

// 784 -> 256 -> 128 -> 10 logits.
struct Classifier {
    ParamStore params;
    AffineLayer fc1, fc2, fc3;

    static Classifier init(std::uint64_t seed);

    Tensor logits(const Tensor& images) const;
    Tensor probs(const Tensor& images) const;
    std::vector<std::size_t> predict(const Tensor& images) const;
};

// z [B x z_dim] -> 128 -> [channels x positions] self-attention -> 64 -> 32.
// Every affine weight and attention projection is spectral-normalized.
struct Generator {
    ParamStore params;
    AffineLayer fc1, fc2, fc3;
    SelfAttention1D attn;
    std::size_t z_dim = 5;
    std::size_t channels = 16;

    static Generator init(std::uint64_t seed, std::size_t z_dim = 5, std::size_t channels = 16);

    Tensor forward(const Tensor& z, bool train = false) const;
};

// code [B x 32] -> 128 -> attention -> 64 -> 1 unbounded score, all
// spectral-normalized.
struct Discriminator {
    ParamStore params;
    AffineLayer fc1, fc2, fc3;
    SelfAttention1D attn;
    std::size_t channels = 16;

    static Discriminator init(std::uint64_t seed, std::size_t channels = 16);

    Tensor score(const Tensor& codes, bool train = false) const;
};

// 42 -> 256 -> 256 -> 5 with tanh output, bounding every action in [-1, 1].
struct Actor {
    ParamStore params;
    AffineLayer fc1, fc2, fc3;

    static Actor init(std::uint64_t seed, const std::string& rng_label = "init/actor");

    Tensor forward(const Tensor& states) const;

    static constexpr std::size_t kStateDim = 42;
    static constexpr std::size_t kActionDim = 5;
};

// Q(s, a): 47 -> 256 -> 256 -> 1.
struct Critic {
    ParamStore params;
    AffineLayer fc1, fc2, fc3;

    static Critic init(std::uint64_t seed, const std::string& rng_label);

    Tensor q(const Tensor& states, const Tensor& actions) const;
};

}  // namespace lsrl
