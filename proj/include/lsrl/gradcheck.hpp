#pragma once

#include <functional>
#include <string>

#include "lsrl/param_store.hpp"
#include "lsrl/rng.hpp"
#include "lsrl/tensor.hpp"

namespace lsrl {

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::string worst_param;
    std::size_t coords_checked = 0;
    bool pass(double tol = 1e-4) const { return max_rel_err < tol; }
};

// Compares analytic gradients against central finite differences
// (f(w+h) - f(w-h)) / 2h. The error metric per coordinate is
// |analytic - numeric| / max(1e-3, |analytic|, |numeric|), i.e. relative
// error with an absolute floor for near-zero gradients.
//
// loss_fn must re-run the forward pass from the store's current values and
// return a scalar. It is evaluated under a fresh tape once for the analytic
// pass and tape-less for the probes, so it must not depend on an outer tape.
// When max_coords_per_tensor is nonzero, that many coordinates per tensor
// are sampled with coord_rng instead of sweeping all of them.
GradCheckReport grad_check(const std::function<Tensor()>& loss_fn, ParamStore& params,
                           double h = 1e-5, std::size_t max_coords_per_tensor = 0,
                           Rng* coord_rng = nullptr);

}  // namespace lsrl
