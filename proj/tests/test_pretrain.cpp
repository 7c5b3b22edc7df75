#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "lsrl/adam.hpp"
#include "lsrl/errors.hpp"
#include "lsrl/config.hpp"
#include "lsrl/nn.hpp"
#include "lsrl/pretrain.hpp"
#include "lsrl/tape.hpp"
#include "test_helpers.hpp"

using namespace lsrl;
using namespace lsrl::testing;
namespace fs = std::filesystem;

namespace {
std::string tmp(const char* name) { return (fs::temp_directory_path() / name).string(); }
}

TEST_CASE("overfitting one blank image drives the reconstruction loss under 0.05") {
    MnistSet blank;
    blank.images = Tensor::zeros({1, 784});
    blank.labels = {0};
    blank.split = "train";

    RunConfig cfg;
    cfg.seed = 3;
    cfg.ae.epochs = 200;  // one-image batches: 200 steps
    cfg.ae.batch = 1;
    cfg.ae.lr = 0.02;

    AutoEncoder ae = AutoEncoder::init(cfg.seed);
    AeTrainResult r = train_autoencoder(ae, blank, blank, cfg, tmp("ae_overfit_log.csv"));
    CHECK(r.final_val_bce < 0.05);
}

TEST_CASE("zero epochs leave the model at initialization") {
    MnistSet set = synthetic_set(8, 61, "train");
    RunConfig cfg;
    cfg.seed = 4;
    cfg.ae.epochs = 0;
    AutoEncoder ae = AutoEncoder::init(cfg.seed);
    const auto hash_before = ae.params.value_hash();
    train_autoencoder(ae, set, set, cfg, tmp("ae_zero_log.csv"));
    CHECK(ae.params.value_hash() == hash_before);
}

TEST_CASE("decode(encode(x)) through the cache reproduces the logged validation BCE") {
    MnistSet set = synthetic_set(64, 68, "train");
    RunConfig cfg;
    cfg.seed = 9;
    cfg.ae.epochs = 3;
    cfg.ae.batch = 16;
    cfg.ae.lr = 0.005;
    AutoEncoder ae = AutoEncoder::init(cfg.seed);
    AeTrainResult r = train_autoencoder(ae, set, set, cfg, tmp("ae_consist_log.csv"));

    const std::string cache = tmp("codes_consist.bin");
    std::filesystem::remove(cache);
    Tensor codes = encode_dataset(ae, set, cache);
    const double bce = bce_loss(ae.decode(codes), set.images).value();
    CHECK(bce == doctest::Approx(r.final_val_bce).epsilon(1e-12));
}

TEST_CASE("batches require batch_size >= 1") {
    MnistSet set = synthetic_set(4, 69, "train");
    Rng rng(1, "batches");
    CHECK_THROWS_AS(Batches(set, 0, rng), StateError);
}

TEST_CASE("validation BCE agrees across chunked and whole-set evaluation") {
    MnistSet big = synthetic_set(1500, 62, "val");  // spans two eval chunks
    AutoEncoder ae = AutoEncoder::init(5);
    const double chunked = validation_bce(ae, big);
    const double whole = bce_loss(ae.reconstruct(big.images), big.images).value();
    CHECK(chunked == doctest::Approx(whole).epsilon(1e-12));
}

TEST_CASE("encode_dataset caches by encoder hash and rebuilds when stale") {
    MnistSet set = synthetic_set(12, 63, "train");
    AutoEncoder ae = AutoEncoder::init(6);
    const std::string cache = tmp("codes_cache_test.bin");
    fs::remove(cache);

    Tensor first = encode_dataset(ae, set, cache);
    CHECK(fs::exists(cache));
    CHECK(first.shape() == Shape{12, 32});

    // poison one payload double, keep the header: proves the cache is read
    {
        std::fstream f(cache, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(4 + 8 + 8 + 8, std::ios::beg);
        const double poison = 123456.5;
        f.write(reinterpret_cast<const char*>(&poison), 8);
    }
    Tensor poisoned = encode_dataset(ae, set, cache);
    CHECK(poisoned.data()[0] == 123456.5);

    // any weight change flips the hash: stale cache is rebuilt, not reused
    ae.params.at("enc1.W").mutable_data()[0] += 1.0;
    Tensor rebuilt = encode_dataset(ae, set, cache);
    CHECK(rebuilt.data()[0] != 123456.5);
    Tensor direct = ae.encode(set.images);
    for (std::size_t i = 0; i < rebuilt.size(); ++i) {
        CHECK(rebuilt.data()[i] == direct.data()[i]);
    }

    // the rebuilt cache now serves the new encoder bitwise
    Tensor again = encode_dataset(ae, set, cache);
    CHECK(again.data() == rebuilt.data());
}

TEST_CASE("classifier training on a learnable synthetic rule") {
    // labels equal a threshold count of bright pixels in a band; a couple of
    // epochs should beat chance comfortably
    MnistSet set = synthetic_set(400, 64, "train");
    for (std::size_t i = 0; i < set.size(); ++i) {
        double s = 0.0;
        for (int p = 0; p < 40; ++p) s += set.images.at({i, (std::size_t)p});
        set.labels[i] = std::min(9, static_cast<int>(s / 4.0));
    }
    MnistSet val = subset(set, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}, "val");

    RunConfig cfg;
    cfg.seed = 7;
    cfg.clf.epochs = 30;
    cfg.clf.batch = 64;
    cfg.clf.lr = 0.003;
    Classifier clf = Classifier::init(cfg.seed);
    ClfTrainResult r = train_classifier(clf, set, val, set, cfg, tmp("clf_syn_log.csv"));
    CHECK(r.test_accuracy > 0.5);

    // confusion matrix counts every test case exactly once
    int total = 0;
    for (const auto& row : r.confusion)
        for (int c : row) total += c;
    CHECK(total == static_cast<int>(set.size()));
}

TEST_CASE("gan smoke run: alternation keeps each side frozen during the other's step") {
    Rng rng(65, "codes");
    std::vector<double> cd(200 * 32);
    for (double& v : cd) v = rng.normal();
    Tensor codes = Tensor::from_data({200, 32}, std::move(cd));

    RunConfig cfg;
    cfg.seed = 8;
    cfg.gan.steps = 6;
    cfg.gan.batch = 10;
    cfg.gan.ckpt_interval = 1000;
    cfg.gan.log_interval = 1;

    Generator gen = Generator::init(cfg.seed, cfg.gan.z_dim, cfg.gan.channels);
    Discriminator disc = Discriminator::init(cfg.seed, cfg.gan.channels);
    const std::string gpath = tmp("gan_gen.ckpt"), dpath = tmp("gan_disc.ckpt");
    GanTrainResult r = train_lgan(gen, disc, codes, cfg, tmp("gan_log.csv"), gpath, dpath);
    CHECK(std::isfinite(r.final_d_loss));
    CHECK(std::isfinite(r.final_g_loss));
    CHECK(fs::exists(gpath));
    CHECK(fs::exists(dpath));

    // determinism: a second identical run lands on identical parameters
    Generator gen2 = Generator::init(cfg.seed, cfg.gan.z_dim, cfg.gan.channels);
    Discriminator disc2 = Discriminator::init(cfg.seed, cfg.gan.channels);
    train_lgan(gen2, disc2, codes, cfg, tmp("gan_log2.csv"), gpath, dpath);
    CHECK(gen.params.value_hash() == gen2.params.value_hash());
    CHECK(disc.params.value_hash() == disc2.params.value_hash());
}

TEST_CASE("gan alternation: each side is frozen during the other's update") {
    Rng rng(66, "codes");
    std::vector<double> cd(50 * 32);
    for (double& v : cd) v = rng.normal();
    Tensor real = Tensor::from_data({50, 32}, std::move(cd));
    std::vector<double> zd(50 * 5);
    for (double& v : zd) v = 2.0 * rng.uniform() - 1.0;
    Tensor z = Tensor::from_data({50, 5}, std::move(zd));

    Generator gen = Generator::init(9);
    Discriminator disc = Discriminator::init(9);
    AdamState g_opt(gen.params, {.lr = 5e-5}), d_opt(disc.params, {.lr = 5e-5});

    // discriminator step: fake batch pre-computed tape-less, generator frozen
    Tensor fake = gen.forward(z, true);
    const auto gen_hash = gen.params.value_hash();
    {
        Tape tape;
        Tensor loss = hinge_d_loss(disc.score(real, true), disc.score(fake, true));
        tape.backward(loss);
        d_opt.step(disc.params);
    }
    CHECK(gen.params.value_hash() == gen_hash);
    for (const auto& e : gen.params.entries()) {
        CHECK_FALSE(e.tensor.has_grad());
    }

    // generator step: discriminator receives gradients but is not stepped
    const auto disc_hash = disc.params.value_hash();
    {
        Tape tape;
        Tensor loss = hinge_g_loss(disc.score(gen.forward(z, true), true));
        tape.backward(loss);
        g_opt.step(gen.params);
        disc.params.zero_grads();
    }
    CHECK(disc.params.value_hash() == disc_hash);
    CHECK(gen.params.value_hash() != gen_hash);
}
