#include "lsrl/models.hpp"

namespace lsrl {

namespace {

AffineLayer make_affine(ParamStore& ps, const std::string& prefix, std::size_t out,
                        std::size_t in, Act act, bool spectral, Rng& rng) {
    AffineLayer layer;
    layer.act = act;
    layer.W = ps.add(prefix + ".W", init_affine_weight(out, in, act, 0.2, rng));
    layer.b = ps.add(prefix + ".b", Tensor::zeros({out}));
    if (spectral) {
        SpectralNorm sn = SpectralNorm::init(out, in, rng);
        sn.u = ps.add_buffer(prefix + ".u", sn.u);
        sn.v = ps.add_buffer(prefix + ".v", sn.v);
        // align u, v with W so sigma_hat starts positive
        sn.power_iterate(layer.W);
        layer.sn = sn;
    }
    return layer;
}

SelfAttention1D make_attention(ParamStore& ps, const std::string& prefix, std::size_t c,
                               bool spectral, Rng& rng) {
    SelfAttention1D att;
    att.Wk = ps.add(prefix + ".Wk", init_affine_weight(c, c, Act::None, 0.2, rng));
    att.Wq = ps.add(prefix + ".Wq", init_affine_weight(c, c, Act::None, 0.2, rng));
    att.Wv = ps.add(prefix + ".Wv", init_affine_weight(c, c, Act::None, 0.2, rng));
    att.Wh = ps.add(prefix + ".Wh", init_affine_weight(c, c, Act::None, 0.2, rng));
    att.gamma = ps.add(prefix + ".gamma", Tensor::zeros({1}));
    if (spectral) {
        auto add_sn = [&](const char* tag, const Tensor& W) {
            SpectralNorm sn = SpectralNorm::init(c, c, rng);
            sn.u = ps.add_buffer(prefix + "." + tag + "_u", sn.u);
            sn.v = ps.add_buffer(prefix + "." + tag + "_v", sn.v);
            sn.power_iterate(W);
            return sn;
        };
        att.sn_k = add_sn("Wk", att.Wk);
        att.sn_q = add_sn("Wq", att.Wq);
        att.sn_v = add_sn("Wv", att.Wv);
        att.sn_h = add_sn("Wh", att.Wh);
    }
    return att;
}

}  // namespace

AutoEncoder AutoEncoder::init(std::uint64_t seed) {
    Rng rng(seed, "init/autoencoder");
    AutoEncoder m;
    m.enc1 = make_affine(m.params, "enc1", 256, 784, Act::LeakyRelu, false, rng);
    m.enc2 = make_affine(m.params, "enc2", 64, 256, Act::LeakyRelu, false, rng);
    m.enc3 = make_affine(m.params, "enc3", kCodeDim, 64, Act::None, false, rng);
    m.dec1 = make_affine(m.params, "dec1", 64, kCodeDim, Act::LeakyRelu, false, rng);
    m.dec2 = make_affine(m.params, "dec2", 256, 64, Act::LeakyRelu, false, rng);
    m.dec3 = make_affine(m.params, "dec3", 784, 256, Act::Sigmoid, false, rng);
    return m;
}

Tensor AutoEncoder::encode(const Tensor& images) const {
    return enc3.forward(enc2.forward(enc1.forward(images)));
}

Tensor AutoEncoder::decode(const Tensor& codes) const {
    return dec3.forward(dec2.forward(dec1.forward(codes)));
}

Tensor AutoEncoder::reconstruct(const Tensor& images) const { return decode(encode(images)); }

Classifier Classifier::init(std::uint64_t seed) {
    Rng rng(seed, "init/classifier");
    Classifier m;
    m.fc1 = make_affine(m.params, "fc1", 256, 784, Act::LeakyRelu, false, rng);
    m.fc2 = make_affine(m.params, "fc2", 128, 256, Act::LeakyRelu, false, rng);
    m.fc3 = make_affine(m.params, "fc3", 10, 128, Act::None, false, rng);
    return m;
}

Tensor Classifier::logits(const Tensor& images) const {
    return fc3.forward(fc2.forward(fc1.forward(images)));
}

Tensor Classifier::probs(const Tensor& images) const { return softmax(logits(images)); }

std::vector<std::size_t> Classifier::predict(const Tensor& images) const {
    return argmax_last(logits(images));
}

Generator Generator::init(std::uint64_t seed, std::size_t z_dim, std::size_t channels) {
    Rng rng(seed, "init/generator");
    Generator m;
    m.z_dim = z_dim;
    m.channels = channels;
    m.fc1 = make_affine(m.params, "fc1", 128, z_dim, Act::LeakyRelu, true, rng);
    m.attn = make_attention(m.params, "attn", channels, true, rng);
    m.fc2 = make_affine(m.params, "fc2", 64, 128, Act::LeakyRelu, true, rng);
    m.fc3 = make_affine(m.params, "fc3", AutoEncoder::kCodeDim, 64, Act::None, true, rng);
    return m;
}

Tensor Generator::forward(const Tensor& z, bool train) const {
    const std::size_t batch = z.shape()[0];
    const std::size_t positions = 128 / channels;
    Tensor h = fc1.forward(z, train);
    Tensor a = attn.forward(reshape(h, {batch, channels, positions}), train);
    Tensor flat = reshape(a, {batch, 128});
    return fc3.forward(fc2.forward(flat, train), train);
}

Discriminator Discriminator::init(std::uint64_t seed, std::size_t channels) {
    Rng rng(seed, "init/discriminator");
    Discriminator m;
    m.channels = channels;
    m.fc1 = make_affine(m.params, "fc1", 128, AutoEncoder::kCodeDim, Act::LeakyRelu, true, rng);
    m.attn = make_attention(m.params, "attn", channels, true, rng);
    m.fc2 = make_affine(m.params, "fc2", 64, 128, Act::LeakyRelu, true, rng);
    m.fc3 = make_affine(m.params, "fc3", 1, 64, Act::None, true, rng);
    return m;
}

Tensor Discriminator::score(const Tensor& codes, bool train) const {
    const std::size_t batch = codes.shape()[0];
    const std::size_t positions = 128 / channels;
    Tensor h = fc1.forward(codes, train);
    Tensor a = attn.forward(reshape(h, {batch, channels, positions}), train);
    Tensor flat = reshape(a, {batch, 128});
    return fc3.forward(fc2.forward(flat, train), train);
}

Actor Actor::init(std::uint64_t seed, const std::string& rng_label) {
    Rng rng(seed, rng_label);
    Actor m;
    m.fc1 = make_affine(m.params, "fc1", 256, kStateDim, Act::LeakyRelu, false, rng);
    m.fc2 = make_affine(m.params, "fc2", 256, 256, Act::LeakyRelu, false, rng);
    m.fc3 = make_affine(m.params, "fc3", kActionDim, 256, Act::Tanh, false, rng);
    return m;
}

Tensor Actor::forward(const Tensor& states) const {
    return fc3.forward(fc2.forward(fc1.forward(states)));
}

Critic Critic::init(std::uint64_t seed, const std::string& rng_label) {
    Rng rng(seed, rng_label);
    Critic m;
    m.fc1 = make_affine(m.params, "fc1", 256, Actor::kStateDim + Actor::kActionDim,
                        Act::LeakyRelu, false, rng);
    m.fc2 = make_affine(m.params, "fc2", 256, 256, Act::LeakyRelu, false, rng);
    m.fc3 = make_affine(m.params, "fc3", 1, 256, Act::None, false, rng);
    return m;
}

Tensor Critic::q(const Tensor& states, const Tensor& actions) const {
    Tensor x = concat_last(states, actions);
    return fc3.forward(fc2.forward(fc1.forward(x)));
}

}  // namespace lsrl
