#include "lsrl/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "lsrl/errors.hpp"
#include "lsrl/tape.hpp"

namespace lsrl {

GradCheckReport grad_check(const std::function<Tensor()>& loss_fn, ParamStore& params, double h,
                           std::size_t max_coords_per_tensor, Rng* coord_rng) {
    if (Tape::current() != nullptr) {
        throw StateError("grad_check must run outside any active tape");
    }

    params.zero_grads();
    std::vector<std::vector<double>> analytic;
    {
        Tape tape;
        Tensor loss = loss_fn();
        tape.backward(loss);
    }
    for (const auto& e : params.entries()) {
        if (!e.trainable) continue;
        analytic.push_back(e.tensor.has_grad() ? e.tensor.grad()
                                               : std::vector<double>(e.tensor.size(), 0.0));
    }
    params.zero_grads();

    GradCheckReport report;
    std::size_t slot = 0;
    for (auto& e : params.entries()) {
        if (!e.trainable) continue;
        auto& w = e.tensor.mutable_data();
        const auto& ga = analytic[slot];

        std::vector<std::size_t> coords;
        if (max_coords_per_tensor == 0 || w.size() <= max_coords_per_tensor) {
            coords.resize(w.size());
            for (std::size_t i = 0; i < w.size(); ++i) coords[i] = i;
        } else {
            coords.reserve(max_coords_per_tensor);
            for (std::size_t i = 0; i < max_coords_per_tensor; ++i) {
                coords.push_back(coord_rng ? static_cast<std::size_t>(coord_rng->choice(w.size()))
                                           : i * w.size() / max_coords_per_tensor);
            }
        }

        for (std::size_t c : coords) {
            const double saved = w[c];
            w[c] = saved + h;
            const double f_plus = loss_fn().value();
            w[c] = saved - h;
            const double f_minus = loss_fn().value();
            w[c] = saved;

            const double numeric = (f_plus - f_minus) / (2.0 * h);
            const double a = ga[c];
            const double rel =
                std::abs(a - numeric) / std::max({1e-3, std::abs(a), std::abs(numeric)});
            ++report.coords_checked;
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.worst_param = e.name + "[" + std::to_string(c) + "]";
            }
        }
        ++slot;
    }
    return report;
}

}  // namespace lsrl
