#include "lgsum/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "lgsum/kernels.hpp"

namespace lgsum::numerics {

void adam_step(ParameterStore& params, AdamState& state, double lr) {
    const auto& all = params.all();
    if (state.m.empty()) {
        for (const auto& p : all) {
            state.m.emplace_back(p->value.rows, p->value.cols);
            state.v.emplace_back(p->value.rows, p->value.cols);
        }
    }
    if (state.m.size() != all.size()) throw std::invalid_argument("adam state/parameter mismatch");
    if (!params.grads_finite()) throw std::runtime_error("gradient overflow");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < all.size(); ++i) {
        Parameter& p = *all[i];
        if (!state.m[i].same_shape(p.value)) throw std::invalid_argument("adam moment shape mismatch");
        kernels::adam_update(p.value.data.data(), state.m[i].data.data(), state.v[i].data.data(),
                             p.grad.data.data(), p.value.size(), lr, state.beta1, state.beta2,
                             state.epsilon, bc1, bc2);
    }
}

double lr_at_step(const LrSchedule& schedule, long step) {
    if (step < 0) throw std::invalid_argument("lr_at_step: negative step");
    if (schedule.warmup_steps > 0 && step <= schedule.warmup_steps)
        return schedule.base_lr * static_cast<double>(step) / static_cast<double>(schedule.warmup_steps);
    double lr = schedule.base_lr;
    for (const auto& [mstep, factor] : schedule.decay_milestones)
        if (mstep <= step) lr *= factor;
    return lr;
}

double finite_diff_check(ParameterStore& params, const std::function<int(Tape&)>& build_loss,
                         double h) {
    if (h <= 0.0) throw std::invalid_argument("finite_diff_check: h must be positive");
    params.zero_grads();
    {
        Tape t;
        const int loss = build_loss(t);
        t.backward(loss);
    }
    auto eval = [&]() {
        Tape t;
        const int loss = build_loss(t);
        return t.value(loss).at(0, 0);
    };
    double worst = 0.0;
    for (const auto& p : params.all()) {
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double saved = p->value.data[i];
            p->value.data[i] = saved + h;
            const double up = eval();
            p->value.data[i] = saved - h;
            const double down = eval();
            p->value.data[i] = saved;
            const double fd = (up - down) / (2.0 * h);
            const double tape = p->grad.data[i];
            const double rel = std::fabs(tape - fd) / std::max(1.0, std::fabs(fd));
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

} // namespace lgsum::numerics
