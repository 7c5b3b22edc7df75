#include "lsrl/td3.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "lsrl/csv.hpp"
#include "lsrl/errors.hpp"
#include "lsrl/nn.hpp"
#include "lsrl/ops.hpp"
#include "lsrl/tape.hpp"

namespace lsrl {

Td3Config Td3Config::from(const RunConfig& cfg) {
    Td3Config c;
    c.steps = cfg.scaled(cfg.rl.steps);
    c.batch = cfg.rl.batch;
    c.actor_batch = cfg.rl.actor_batch == 0 ? cfg.rl.batch : cfg.rl.actor_batch;
    c.warmup = cfg.rl.warmup;
    c.eval_interval = cfg.rl.eval_interval;
    c.policy_delay = cfg.rl.policy_delay;
    c.buffer_capacity = cfg.rl.buffer_capacity;
    c.eval_subset = cfg.rl.eval_subset;
    c.lr = cfg.rl.lr;
    c.gamma = cfg.rl.gamma;
    c.tau = cfg.rl.tau;
    c.policy_noise = cfg.rl.policy_noise;
    c.noise_clip = cfg.rl.noise_clip;
    c.expl_noise = cfg.rl.expl_noise;
    return c;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw StateError("replay buffer capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
    } else {
        items_[head_] = std::move(t);
        head_ = (head_ + 1) % capacity_;
    }
    ++insertions_;
}

ReplayBuffer::Batch ReplayBuffer::sample(std::size_t n, Rng& rng) const {
    if (items_.empty()) throw StateError("sampling from an empty replay buffer");
    const std::size_t sd = items_[0].state.size();
    const std::size_t ad = items_[0].action.size();
    std::vector<double> states(n * sd), actions(n * ad), rewards(n), next_states(n * sd);
    Batch b;
    b.done.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Transition& t = items_[rng.choice(items_.size())];
        std::memcpy(states.data() + i * sd, t.state.data(), sd * sizeof(double));
        std::memcpy(actions.data() + i * ad, t.action.data(), ad * sizeof(double));
        std::memcpy(next_states.data() + i * sd, t.next_state.data(), sd * sizeof(double));
        rewards[i] = t.reward;
        b.done[i] = t.done ? 1 : 0;
    }
    b.states = Tensor::from_data({n, sd}, std::move(states));
    b.actions = Tensor::from_data({n, ad}, std::move(actions));
    b.rewards = Tensor::from_data({n, 1}, std::move(rewards));
    b.next_states = Tensor::from_data({n, sd}, std::move(next_states));
    return b;
}

std::vector<double> select_action(const Actor& actor, std::span<const double> state, bool explore,
                                  double expl_noise, Rng& rng) {
    Tensor s = Tensor::from_data({1, state.size()}, {state.begin(), state.end()});
    std::vector<double> a = actor.forward(s).data();
    if (explore) {
        for (double& v : a) v += rng.normal(0.0, expl_noise);
    }
    for (double& v : a) v = std::clamp(v, -1.0, 1.0);
    return a;
}

Tensor smooth_target_actions(const Actor& actor_target, const Tensor& next_states,
                             double policy_noise, double noise_clip, Rng& rng) {
    std::vector<double> smoothed = actor_target.forward(next_states).data();
    for (double& v : smoothed) {
        const double eps = std::clamp(rng.normal(0.0, policy_noise), -noise_clip, noise_clip);
        v = std::clamp(v + eps, -1.0, 1.0);
    }
    return Tensor::from_data({next_states.shape()[0], Actor::kActionDim}, std::move(smoothed));
}

Tensor td3_target(const Critic& q1_target, const Critic& q2_target, const Actor& actor_target,
                  const ReplayBuffer::Batch& batch, double gamma, double policy_noise,
                  double noise_clip, Rng& rng) {
    const std::size_t n = batch.next_states.shape()[0];
    Tensor next_actions =
        smooth_target_actions(actor_target, batch.next_states, policy_noise, noise_clip, rng);

    const auto q1v = q1_target.q(batch.next_states, next_actions).data();
    const auto q2v = q2_target.q(batch.next_states, next_actions).data();

    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double bootstrap = batch.done[i] ? 0.0 : gamma * std::min(q1v[i], q2v[i]);
        y[i] = batch.rewards.data()[i] + bootstrap;
    }
    return Tensor::from_data({n, 1}, std::move(y));
}

double critic_update(Critic& q1, Critic& q2, const ReplayBuffer::Batch& batch, const Tensor& y,
                     AdamState& opt1, AdamState& opt2) {
    Tape tape;
    Tensor d1 = sub(y, q1.q(batch.states, batch.actions));
    Tensor d2 = sub(y, q2.q(batch.states, batch.actions));
    Tensor loss = add(mean(mul(d1, d1)), mean(mul(d2, d2)));
    tape.backward(loss);
    opt1.step(q1.params);
    opt2.step(q2.params);
    return loss.value();
}

double actor_update(Actor& actor,
                    const std::function<Tensor(const Tensor&, const Tensor&)>& q1_fn,
                    const Tensor& states, AdamState& opt) {
    Tape tape;
    Tensor actions = actor.forward(states);
    Tensor objective = mean(q1_fn(states, actions));
    tape.backward(neg(objective));
    opt.step(actor.params);
    return objective.value();
}

double actor_update(Actor& actor, Critic& q1, const Tensor& states, AdamState& opt) {
    const double objective = actor_update(
        actor, [&](const Tensor& s, const Tensor& a) { return q1.q(s, a); }, states, opt);
    // the backward pass deposited gradients on the critic as well; it was
    // not stepped, so drop them before its own next update
    q1.params.zero_grads();
    return objective;
}

Td3Agent Td3Agent::init(std::uint64_t seed, double lr) {
    Actor actor = Actor::init(seed, "init/actor");
    Actor actor_target = Actor::init(seed, "init/actor");
    Critic q1 = Critic::init(seed, "init/critic1");
    Critic q2 = Critic::init(seed, "init/critic2");
    Critic q1_target = Critic::init(seed, "init/critic1");
    Critic q2_target = Critic::init(seed, "init/critic2");
    copy_values(actor.params, actor_target.params);
    copy_values(q1.params, q1_target.params);
    copy_values(q2.params, q2_target.params);
    AdamState actor_opt(actor.params, {.lr = lr});
    AdamState q1_opt(q1.params, {.lr = lr});
    AdamState q2_opt(q2.params, {.lr = lr});
    return {std::move(actor), std::move(actor_target), std::move(q1), std::move(q2),
            std::move(q1_target), std::move(q2_target), std::move(actor_opt), std::move(q1_opt),
            std::move(q2_opt), 0};
}

double evaluate_policy(TranslateEnv& eval_env, const Actor& actor, std::size_t subset,
                       std::uint64_t seed) {
    const std::size_t total = eval_env.source().size();
    Rng subset_rng(seed, "rl-eval/subset");
    std::vector<std::size_t> indices = subset_rng.shuffled_indices(total);
    const std::size_t n = (subset == 0 || subset > total) ? total : subset;
    indices.resize(n);

    Rng dummy(0, "rl-eval/unused");
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        Rng task_rng(seed, "rl-eval/task/" + std::to_string(i));
        const int task = static_cast<int>(task_rng.choice(10));
        EnvObservation obs = eval_env.reset_with(indices[i], task);
        const auto action = select_action(actor, obs.state, false, 0.0, dummy);
        sum += eval_env.step(action).first;
    }
    return sum / static_cast<double>(n);
}

RlTrainResult train_td3(TranslateEnv& env, TranslateEnv& eval_env, Td3Agent& agent,
                        const Td3Config& cfg, std::uint64_t seed, const std::string& log_path) {
    Rng rng_warmup(seed, "rl/warmup");
    Rng rng_expl(seed, "rl/explore");
    Rng rng_batch(seed, "rl/batch");
    Rng rng_smooth(seed, "rl/target-noise");

    ReplayBuffer buffer(cfg.buffer_capacity);
    CsvWriter log(log_path,
                  {"step", "train_reward_mean", "eval_reward_mean", "actor_loss", "critic_loss"});

    RlTrainResult result;
    double reward_sum = 0.0;
    std::uint64_t reward_n = 0;
    double actor_loss_sum = 0.0, critic_loss_sum = 0.0;
    std::uint64_t actor_n = 0, critic_n = 0;

    auto emit_row = [&](std::uint64_t step) {
        RlLogRow row;
        row.step = step;
        row.train_reward_mean = reward_n ? reward_sum / static_cast<double>(reward_n) : 0.0;
        row.eval_reward_mean = evaluate_policy(eval_env, agent.actor, cfg.eval_subset, seed);
        row.actor_loss = actor_n ? actor_loss_sum / static_cast<double>(actor_n) : 0.0;
        row.critic_loss = critic_n ? critic_loss_sum / static_cast<double>(critic_n) : 0.0;
        log.row({CsvWriter::num(row.step), CsvWriter::num(row.train_reward_mean),
                 CsvWriter::num(row.eval_reward_mean), CsvWriter::num(row.actor_loss),
                 CsvWriter::num(row.critic_loss)});
        result.rows.push_back(row);
        reward_sum = 0.0;
        reward_n = 0;
        actor_loss_sum = critic_loss_sum = 0.0;
        actor_n = critic_n = 0;
    };

    for (std::uint64_t step = 1; step <= cfg.steps; ++step) {
        EnvObservation obs = env.reset();
        std::vector<double> action;
        if (step <= cfg.warmup) {
            action.resize(Actor::kActionDim);
            for (double& a : action) a = 2.0 * rng_warmup.uniform() - 1.0;
        } else {
            action = select_action(agent.actor, obs.state, true, cfg.expl_noise, rng_expl);
        }
        const double reward = env.step(action).first;
        if (!std::isfinite(reward)) {
            throw DivergenceError("non-finite reward at step " + std::to_string(step));
        }
        buffer.push({obs.state, action, reward, obs.state, true});
        reward_sum += reward;
        ++reward_n;

        if (step == cfg.warmup) {
            result.warmup_reward_mean = reward_sum / static_cast<double>(reward_n);
            emit_row(step);
        }

        if (step > cfg.warmup) {
            auto batch = buffer.sample(cfg.batch, rng_batch);
            Tensor y = td3_target(agent.q1_target, agent.q2_target, agent.actor_target, batch,
                                  cfg.gamma, cfg.policy_noise, cfg.noise_clip, rng_smooth);
            // every episode here is single-step: the target must reduce to
            // the immediate reward
            for (std::size_t i = 0; i < batch.done.size(); ++i) {
                if (batch.done[i] && y.data()[i] != batch.rewards.data()[i]) {
                    throw StateError("terminal target differs from reward");
                }
            }
            const double closs =
                critic_update(agent.q1, agent.q2, batch, y, agent.q1_opt, agent.q2_opt);
            if (!std::isfinite(closs)) {
                throw DivergenceError("non-finite critic loss at step " + std::to_string(step));
            }
            critic_loss_sum += closs;
            ++critic_n;
            ++agent.critic_updates;

            if (agent.critic_updates % cfg.policy_delay == 0) {
                Tensor actor_states = batch.states;
                if (cfg.actor_batch != cfg.batch) {
                    actor_states = buffer.sample(cfg.actor_batch, rng_batch).states;
                }
                const double aloss =
                    actor_update(agent.actor, agent.q1, actor_states, agent.actor_opt);
                actor_loss_sum += aloss;
                ++actor_n;
                soft_update(agent.q1.params, agent.q1_target.params, cfg.tau);
                soft_update(agent.q2.params, agent.q2_target.params, cfg.tau);
                soft_update(agent.actor.params, agent.actor_target.params, cfg.tau);
            }
        }

        if (step % cfg.eval_interval == 0) emit_row(step);
    }
    return result;
}

}  // namespace lsrl
