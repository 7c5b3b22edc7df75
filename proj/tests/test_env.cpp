#include <cmath>

#include "doctest.h"
#include "lsrl/env.hpp"
#include "lsrl/errors.hpp"
#include "lsrl/ops.hpp"
#include "test_helpers.hpp"

using namespace lsrl;
using namespace lsrl::testing;

namespace {

struct EnvFixture {
    AutoEncoder ae = AutoEncoder::init(11);
    Classifier clf = Classifier::init(12);
    Generator gen = Generator::init(13);
    Discriminator disc = Discriminator::init(14);
    MnistSet source = synthetic_set(40, 15);

    TranslateEnv make(std::uint64_t seed = 1, RewardWeights w = {}, bool reenc = false) {
        return TranslateEnv(ae, clf, gen, disc, source, w, reenc, seed, "env/test");
    }
};

}  // namespace

TEST_CASE("target digit wraps modulo 10") {
    EnvFixture fx;
    auto env = fx.make();

    // labels cycle 0..9 in the synthetic set: index 5 has label 5
    EnvObservation obs = env.reset_with(5, 2);
    CHECK(env.current_label() == 5);
    CHECK(env.current_target() == 7);

    env.reset_with(8, 5);  // label 8, task 5 -> 3
    CHECK(env.current_target() == 3);

    env.reset_with(4, 0);  // task 0 is the identity translation
    CHECK(env.current_target() == 4);

    // the observation is code ++ one-hot(task), exactly one hot component
    CHECK(obs.state.size() == 42);
    int ones = 0;
    for (std::size_t i = 32; i < 42; ++i) {
        CHECK((obs.state[i] == 0.0 || obs.state[i] == 1.0));
        ones += obs.state[i] == 1.0;
    }
    CHECK(ones == 1);
    CHECK(obs.state[32 + 2] == 1.0);
    for (std::size_t i = 0; i < 32; ++i) CHECK(obs.state[i] == obs.code[i]);
}

TEST_CASE("episodes are single-step and closed after step") {
    EnvFixture fx;
    auto env = fx.make();
    env.reset_with(0, 1);
    std::vector<double> action(5, 0.25);
    auto [reward, outcome] = env.step(action);
    (void)reward;
    CHECK_FALSE(env.episode_open());
    CHECK_THROWS_AS(env.step(action), StateError);

    env.reset_with(0, 1);
    CHECK_THROWS_AS(env.step(std::vector<double>(4, 0.0)), StateError);
    env.reset_with(0, 1);
    CHECK_THROWS_AS(env.step(std::vector<double>{0, 0, 0, 0, 1.5}), StateError);
}

TEST_CASE("fixed action and checkpoints give bitwise-identical outcomes") {
    EnvFixture fx;
    auto env = fx.make();
    std::vector<double> action = {0.1, -0.5, 0.9, 0.0, -1.0};

    env.reset_with(7, 3);
    auto [r1, o1] = env.step(action);
    env.reset_with(7, 3);
    auto [r2, o2] = env.step(action);
    CHECK(r1 == r2);
    CHECK(o1.generated_code == o2.generated_code);
    CHECK(o1.decoded_image == o2.decoded_image);
    CHECK(o1.p_target == o2.p_target);
    CHECK(o1.d_value == o2.d_value);
}

TEST_CASE("step equals the manual generate-decode-classify chain") {
    EnvFixture fx;
    auto env = fx.make();
    env.reset_with(9, 4);
    const int target = env.current_target();
    std::vector<double> action = {-0.3, 0.8, 0.2, -0.9, 0.5};
    auto [reward, outcome] = env.step(action);

    Tensor z = Tensor::from_data({1, 5}, action);
    Tensor code = fx.gen.forward(z);
    Tensor img = fx.ae.decode(code);
    Tensor probs = fx.clf.probs(img);
    const double p = probs.at({0, static_cast<std::size_t>(target)});
    const double d = fx.disc.score(code).at({0, 0});
    const double expected = 30.0 * p + std::min(0.0, -1.0 + d);

    CHECK(outcome.generated_code == code.data());
    CHECK(outcome.decoded_image == img.data());
    CHECK(outcome.p_target == doctest::Approx(p).epsilon(1e-15));
    CHECK(outcome.d_value == doctest::Approx(d).epsilon(1e-15));
    CHECK(reward == doctest::Approx(expected).epsilon(1e-12));
    CHECK(outcome.predicted_digit == static_cast<int>(argmax_last(fx.clf.logits(img))[0]));
}

TEST_CASE("reward formula on pinned classifier and discriminator outputs") {
    EnvFixture fx;
    MnistSet source = synthetic_set(10, 6);

    // p_target = 1 (dominant logit), D = 1.2: both terms saturated
    {
        std::vector<double> bias(10, 0.0);
        bias[3] = 200.0;  // task 3 on label 0 -> target 3
        Classifier clf = constant_classifier(bias);
        Discriminator disc = constant_discriminator(1.2);
        TranslateEnv env(fx.ae, clf, fx.gen, disc, source, {}, false, 1, "env/pin");
        env.reset_with(0, 3);
        auto [reward, outcome] = env.step(std::vector<double>(5, 0.0));
        CHECK(reward == doctest::Approx(30.0).epsilon(1e-9));
        CHECK(outcome.p_target == doctest::Approx(1.0).epsilon(1e-12));
    }
    // p = 0.9, D = 0.71 -> 27 + min(0, -0.29) = 26.71
    {
        std::vector<double> bias(10, 0.0);
        bias[3] = std::log(81.0);  // e^b / (e^b + 9) = 0.9
        Classifier clf = constant_classifier(bias);
        Discriminator disc = constant_discriminator(0.71);
        TranslateEnv env(fx.ae, clf, fx.gen, disc, source, {}, false, 1, "env/pin");
        env.reset_with(0, 3);
        auto [reward, outcome] = env.step(std::vector<double>(5, 0.0));
        CHECK(outcome.p_target == doctest::Approx(0.9).epsilon(1e-12));
        CHECK(reward == doctest::Approx(26.71).epsilon(1e-9));
    }
    // p = 0, D = -2 -> -3
    {
        std::vector<double> bias(10, 0.0);
        bias[1] = 200.0;  // all mass on a non-target digit
        Classifier clf = constant_classifier(bias);
        Discriminator disc = constant_discriminator(-2.0);
        TranslateEnv env(fx.ae, clf, fx.gen, disc, source, {}, false, 1, "env/pin");
        env.reset_with(0, 3);
        auto [reward, outcome] = env.step(std::vector<double>(5, 0.0));
        CHECK(outcome.p_target == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(reward == doctest::Approx(-3.0).epsilon(1e-9));
    }
}

TEST_CASE("reward bounds and monotonicity") {
    EnvFixture fx;
    MnistSet source = synthetic_set(4, 7);

    auto reward_for = [&](double p_bias, double d_score) {
        std::vector<double> bias(10, 0.0);
        bias[3] = p_bias;
        Classifier clf = constant_classifier(bias);
        Discriminator disc = constant_discriminator(d_score);
        TranslateEnv env(fx.ae, clf, fx.gen, disc, source, {}, false, 1, "env/mono");
        env.reset_with(0, 3);
        return env.step(std::vector<double>(5, 0.0)).first;
    };

    // upper bound lambda_cl = 30
    CHECK(reward_for(500.0, 50.0) <= 30.0 + 1e-12);
    // increasing in p with D fixed
    CHECK(reward_for(1.0, 0.5) < reward_for(2.0, 0.5));
    // non-decreasing in D with p fixed; flat once the margin is satisfied
    CHECK(reward_for(1.0, -2.0) < reward_for(1.0, 0.5));
    CHECK(reward_for(1.0, 1.5) == doctest::Approx(reward_for(1.0, 2.5)).epsilon(1e-12));
}

TEST_CASE("discriminator sees codes by default, re-encoded pixels behind the flag") {
    EnvFixture fx;
    MnistSet source = synthetic_set(4, 8);
    std::vector<double> action = {0.4, -0.2, 0.0, 0.7, -0.6};

    auto env_code = fx.make();
    env_code.reset_with(1, 2);
    auto [r_code, o_code] = env_code.step(action);

    TranslateEnv env_px(fx.ae, fx.clf, fx.gen, fx.disc, fx.source, {}, true, 1, "env/test");
    env_px.reset_with(1, 2);
    auto [r_px, o_px] = env_px.step(action);

    Tensor gcode = Tensor::from_data({1, 32}, o_code.generated_code);
    const double d_direct = fx.disc.score(gcode).at({0, 0});
    Tensor reenc = fx.ae.encode(Tensor::from_data({1, 784}, o_px.decoded_image));
    const double d_reenc = fx.disc.score(reenc).at({0, 0});

    CHECK(o_code.d_value == doctest::Approx(d_direct).epsilon(1e-15));
    CHECK(o_px.d_value == doctest::Approx(d_reenc).epsilon(1e-15));
    CHECK(o_code.d_value != o_px.d_value);
}

TEST_CASE("task draws cover 0..9 uniformly over many resets") {
    EnvFixture fx;
    MnistSet tiny = synthetic_set(6, 9);
    TranslateEnv env(fx.ae, fx.clf, fx.gen, fx.disc, tiny, {}, false, 123, "env/tasks");
    const int n = 10000;
    std::vector<int> counts(10, 0);
    for (int i = 0; i < n; ++i) {
        ++counts[env.reset().task];
    }
    for (int t = 0; t < 10; ++t) {
        const double freq = static_cast<double>(counts[t]) / n;
        CHECK(std::abs(freq - 0.1) < 0.01);
    }
}
