#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lsrl/mnist.hpp"
#include "lsrl/models.hpp"

namespace lsrl {

struct RewardWeights {
    double lambda_cl = 30.0;
    double lambda_d = 1.0;
};

struct EnvObservation {
    std::vector<double> state;  // 42 = 32-dim code ++ 10-dim one-hot task
    std::vector<double> code;
    int task = 0;
};

struct EpisodeOutcome {
    std::vector<double> action;
    std::vector<double> generated_code;
    std::vector<double> decoded_image;
    double reward = 0.0;
    double p_target = 0.0;
    double d_value = 0.0;
    int target_digit = 0;
    int predicted_digit = 0;
};

// Single-step digit-translation episodes: reset() samples an image and a
// task t in 0..9, the target digit is (label + t) mod 10, and the action is
// the generator seed. The reward blends the classifier's confidence in the
// target digit with the discriminator's realism margin:
//
//   reward = lambda_cl * p_target + lambda_d * min(0, -1 + D(G(a)))
//
// The discriminator scores the generated 32-dim code, the domain it was
// trained on; with d_on_reencoded the decoded image is re-encoded first and
// D scores E(E^-1(G(a))) instead (the literal pixel-path reading).
class TranslateEnv {
public:
    TranslateEnv(const AutoEncoder& ae, const Classifier& clf, const Generator& gen,
                 const Discriminator& disc, const MnistSet& source, RewardWeights weights,
                 bool d_on_reencoded, std::uint64_t seed, const std::string& rng_label);

    EnvObservation reset();
    EnvObservation reset_with(std::size_t image_index, int task);

    // Closes the episode; calling step twice without reset is an error.
    std::pair<double, EpisodeOutcome> step(std::span<const double> action);

    double compute_reward(const Tensor& decoded_image, const Tensor& generated_code,
                          int target_digit, double* p_out = nullptr, double* d_out = nullptr) const;

    bool episode_open() const { return open_; }
    int current_label() const { return label_; }
    int current_task() const { return task_; }
    int current_target() const { return target_; }
    const RewardWeights& weights() const { return weights_; }
    const MnistSet& source() const { return source_; }

private:
    const AutoEncoder& ae_;
    const Classifier& clf_;
    const Generator& gen_;
    const Discriminator& disc_;
    const MnistSet& source_;
    RewardWeights weights_;
    bool d_on_reencoded_;
    Rng rng_;

    bool open_ = false;
    std::vector<double> code_;
    int label_ = 0, task_ = 0, target_ = 0;
};

}  // namespace lsrl
