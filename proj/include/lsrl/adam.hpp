#pragma once

#include <cstdint>
#include <vector>

#include "lsrl/param_store.hpp"

namespace lsrl {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Standard Adam with bias correction. One state per network; moments are
// kept in the store's insertion order. step() requires every trainable
// parameter to carry a gradient, applies the update, and zeroes the grads.
class AdamState {
public:
    AdamState(const ParamStore& params, AdamConfig cfg);

    void step(ParamStore& params);

    std::uint64_t step_count() const { return step_count_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    std::uint64_t step_count_ = 0;
    std::vector<std::vector<double>> m_, v_;  // trainable entries only
};

}  // namespace lsrl
