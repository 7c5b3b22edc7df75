#include "lsrl/adam.hpp"

#include <cmath>

#include "lsrl/errors.hpp"

namespace lsrl {

AdamState::AdamState(const ParamStore& params, AdamConfig cfg) : cfg_(cfg) {
    for (const auto& e : params.entries()) {
        if (!e.trainable) continue;
        m_.emplace_back(e.tensor.size(), 0.0);
        v_.emplace_back(e.tensor.size(), 0.0);
    }
}

void AdamState::step(ParamStore& params) {
    ++step_count_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));

    std::size_t slot = 0;
    for (auto& e : params.entries()) {
        if (!e.trainable) continue;
        if (!e.tensor.has_grad()) {
            throw StateError("adam: missing gradient for parameter '" + e.name + "'");
        }
        auto& w = e.tensor.mutable_data();
        const auto& g = e.tensor.grad();
        auto& m = m_[slot];
        auto& v = v_[slot];
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            w[i] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
        }
        e.tensor.zero_grad();
        ++slot;
    }
}

}  // namespace lsrl
