#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "lgsum/tape.hpp"

namespace lgsum::numerics {

struct AdamState {
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.998;
    double epsilon = 1e-8;
    std::vector<DenseMatrix> m; // aligned with ParameterStore order
    std::vector<DenseMatrix> v;
};

// Standard bias-corrected Adam over every parameter in the store, reading
// Parameter::grad. Moment buffers are created lazily on the first call.
// Throws "gradient overflow" on non-finite gradients.
void adam_step(ParameterStore& params, AdamState& state, double lr);

struct LrSchedule {
    double base_lr = 1e-3;
    long warmup_steps = 8000;
    std::vector<std::pair<long, double>> decay_milestones; // (step, factor)
};

// Linear ramp 0 -> base_lr over warmup_steps, then base_lr scaled by the
// product of the factors of every milestone whose step has passed.
double lr_at_step(const LrSchedule& schedule, long step);

// Max over parameter scalars of |g_tape - g_fd| / max(1, |g_fd|), central
// differences with step h. build_loss must construct the same scalar loss
// (1x1 node) from the current parameter values every time it is called.
double finite_diff_check(ParameterStore& params, const std::function<int(Tape&)>& build_loss,
                         double h);

} // namespace lgsum::numerics
