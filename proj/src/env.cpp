#include "lsrl/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "lsrl/errors.hpp"
#include "lsrl/ops.hpp"

namespace lsrl {

TranslateEnv::TranslateEnv(const AutoEncoder& ae, const Classifier& clf, const Generator& gen,
                           const Discriminator& disc, const MnistSet& source,
                           RewardWeights weights, bool d_on_reencoded, std::uint64_t seed,
                           const std::string& rng_label)
    : ae_(ae),
      clf_(clf),
      gen_(gen),
      disc_(disc),
      source_(source),
      weights_(weights),
      d_on_reencoded_(d_on_reencoded),
      rng_(seed, rng_label) {}

EnvObservation TranslateEnv::reset() {
    const std::size_t index = rng_.choice(source_.size());
    const int task = static_cast<int>(rng_.choice(10));
    return reset_with(index, task);
}

EnvObservation TranslateEnv::reset_with(std::size_t image_index, int task) {
    if (image_index >= source_.size()) throw StateError("image index out of range");
    if (task < 0 || task > 9) throw StateError("task must be in 0..9");

    const std::size_t pixels = source_.images.shape()[1];
    std::vector<double> img(pixels);
    std::memcpy(img.data(), source_.images.data().data() + image_index * pixels,
                pixels * sizeof(double));
    Tensor code = ae_.encode(Tensor::from_data({1, pixels}, std::move(img)));

    label_ = source_.labels[image_index];
    task_ = task;
    target_ = (label_ + task_) % 10;
    code_ = code.data();
    open_ = true;

    EnvObservation obs;
    obs.code = code_;
    obs.task = task_;
    obs.state = code_;
    obs.state.resize(Actor::kStateDim, 0.0);
    obs.state[AutoEncoder::kCodeDim + static_cast<std::size_t>(task_)] = 1.0;
    return obs;
}

double TranslateEnv::compute_reward(const Tensor& decoded_image, const Tensor& generated_code,
                                    int target_digit, double* p_out, double* d_out) const {
    const Tensor probs = clf_.probs(decoded_image);
    const double p = probs.at({0, static_cast<std::size_t>(target_digit)});
    Tensor d_input = d_on_reencoded_ ? ae_.encode(decoded_image) : generated_code;
    const double d = disc_.score(d_input).at({0, 0});
    if (p_out) *p_out = p;
    if (d_out) *d_out = d;
    return weights_.lambda_cl * p + weights_.lambda_d * std::min(0.0, -1.0 + d);
}

std::pair<double, EpisodeOutcome> TranslateEnv::step(std::span<const double> action) {
    if (!open_) throw StateError("step called on a closed episode; reset first");
    if (action.size() != Actor::kActionDim) {
        throw StateError("action must have " + std::to_string(Actor::kActionDim) + " components");
    }
    for (double a : action) {
        if (!(std::abs(a) <= 1.0 + 1e-12)) {
            throw StateError("action component " + std::to_string(a) + " outside [-1, 1]");
        }
    }
    open_ = false;

    Tensor z = Tensor::from_data({1, Actor::kActionDim},
                                 std::vector<double>(action.begin(), action.end()));
    Tensor generated_code = gen_.forward(z);
    Tensor decoded = ae_.decode(generated_code);

    EpisodeOutcome out;
    out.action.assign(action.begin(), action.end());
    out.generated_code = generated_code.data();
    out.decoded_image = decoded.data();
    out.target_digit = target_;
    out.reward = compute_reward(decoded, generated_code, target_, &out.p_target, &out.d_value);
    out.predicted_digit = static_cast<int>(argmax_last(clf_.logits(decoded))[0]);
    return {out.reward, std::move(out)};
}

}  // namespace lsrl
