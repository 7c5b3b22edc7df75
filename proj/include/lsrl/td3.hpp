#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lsrl/adam.hpp"
#include "lsrl/config.hpp"
#include "lsrl/env.hpp"
#include "lsrl/models.hpp"
#include "lsrl/rng.hpp"

namespace lsrl {

struct Td3Config {
    std::uint64_t steps = 500000;
    std::uint64_t batch = 50;
    std::uint64_t actor_batch = 50;
    std::uint64_t warmup = 50;
    std::uint64_t eval_interval = 10000;
    std::uint64_t policy_delay = 2;
    std::uint64_t buffer_capacity = 1000000;
    std::uint64_t eval_subset = 2000;  // 0 = full validation set
    double lr = 5e-4;
    double gamma = 0.99;
    double tau = 0.005;
    double policy_noise = 0.2;
    double noise_clip = 0.5;
    double expl_noise = 0.1;

    // Applies the run's scale factor to the step count and resolves the
    // actor batch default.
    static Td3Config from(const RunConfig& cfg);
};

struct Transition {
    std::vector<double> state;
    std::vector<double> action;
    double reward = 0.0;
    std::vector<double> next_state;
    bool done = true;
};

// Ring buffer, uniform sampling with replacement over current contents.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::uint64_t insertions() const { return insertions_; }
    const Transition& at(std::size_t i) const { return items_[i]; }

    struct Batch {
        Tensor states;       // [B x 42]
        Tensor actions;      // [B x 5]
        Tensor rewards;      // [B x 1]
        Tensor next_states;  // [B x 42]
        std::vector<char> done;
    };
    Batch sample(std::size_t n, Rng& rng) const;

private:
    std::vector<Transition> items_;
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::uint64_t insertions_ = 0;
};

// a = pi(s), plus N(0, expl_noise) per dimension when exploring, clamped to
// [-1, 1] either way.
std::vector<double> select_action(const Actor& actor, std::span<const double> state, bool explore,
                                  double expl_noise, Rng& rng);

// a~ = clamp(pi'(s') + clip(N(0, sigma), -c, c), -1, 1), one eps draw per
// action component in row-major order.
Tensor smooth_target_actions(const Actor& actor_target, const Tensor& next_states,
                             double policy_noise, double noise_clip, Rng& rng);

// y_i = r_i + gamma * min(Q1'(s', a~), Q2'(s', a~)) with the smoothed target
// action a~; terminal transitions bootstrap nothing (y = r). Computed
// tape-less.
Tensor td3_target(const Critic& q1_target, const Critic& q2_target, const Actor& actor_target,
                  const ReplayBuffer::Batch& batch, double gamma, double policy_noise,
                  double noise_clip, Rng& rng);

// One Adam step on each critic toward the shared target y; returns the
// summed per-critic mean squared errors.
double critic_update(Critic& q1, Critic& q2, const ReplayBuffer::Batch& batch, const Tensor& y,
                     AdamState& opt1, AdamState& opt2);

// Gradient ascent on mean q1(s, pi(s)) (descent on its negation); returns
// the objective value. The critic's parameters are left untouched.
double actor_update(Actor& actor,
                    const std::function<Tensor(const Tensor& states, const Tensor& actions)>& q1_fn,
                    const Tensor& states, AdamState& opt);
double actor_update(Actor& actor, Critic& q1, const Tensor& states, AdamState& opt);

struct Td3Agent {
    Actor actor, actor_target;
    Critic q1, q2, q1_target, q2_target;
    AdamState actor_opt, q1_opt, q2_opt;
    std::uint64_t critic_updates = 0;

    static Td3Agent init(std::uint64_t seed, double lr);
};

struct RlLogRow {
    std::uint64_t step = 0;
    double train_reward_mean = 0.0;
    double eval_reward_mean = 0.0;
    double actor_loss = 0.0;
    double critic_loss = 0.0;
};

struct RlTrainResult {
    std::vector<RlLogRow> rows;
    double warmup_reward_mean = 0.0;
};

// Full training loop: one environment interaction per step (uniform random
// during warmup), then one critic update on a sampled batch; actor and
// target updates every policy_delay critic updates; deterministic
// evaluation on the eval environment every eval_interval steps.
RlTrainResult train_td3(TranslateEnv& env, TranslateEnv& eval_env, Td3Agent& agent,
                        const Td3Config& cfg, std::uint64_t seed, const std::string& log_path);

// Mean deterministic-policy reward over a fixed, seeded subset of the eval
// environment's source set (subset = 0 takes every image), with one fixed
// task per image.
double evaluate_policy(TranslateEnv& eval_env, const Actor& actor, std::size_t subset,
                       std::uint64_t seed);

}  // namespace lsrl
