#ifndef BBREACH_SIMULATE_HPP
#define BBREACH_SIMULATE_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "bbreach/expr.hpp"
#include "bbreach/policy.hpp"

namespace bbreach {

inline std::vector<double> eval_dynamics_point(const Dynamics& dyn, std::span<const double> s,
                                               std::span<const double> act)
{
    std::vector<double> out(dyn.state_dim);
    for (std::size_t i = 0; i < dyn.state_dim; ++i)
        out[i] = dyn.rhs[i].eval<double>(s, act);
    return out;
}

// Classic fourth-order Runge-Kutta step under a constant action.
inline void rk4_step(const Dynamics& dyn, std::vector<double>& s, std::span<const double> act,
                     double h)
{
    const std::size_t n = s.size();
    const auto k1 = eval_dynamics_point(dyn, s, act);
    std::vector<double> tmp(n);
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = s[i] + 0.5 * h * k1[i];
    const auto k2 = eval_dynamics_point(dyn, tmp, act);
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = s[i] + 0.5 * h * k2[i];
    const auto k3 = eval_dynamics_point(dyn, tmp, act);
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = s[i] + h * k3[i];
    const auto k4 = eval_dynamics_point(dyn, tmp, act);
    for (std::size_t i = 0; i < n; ++i)
        s[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

// Integrate one control step of length delta with micro_steps RK4 stages,
// invoking the callback after every stage (for tube containment checks).
template <class Callback>
void integrate_control_step(const Dynamics& dyn, std::vector<double>& s,
                            std::span<const double> act, double delta, int micro_steps,
                            Callback&& cb)
{
    const double h = delta / micro_steps;
    for (int i = 0; i < micro_steps; ++i) {
        rk4_step(dyn, s, act, h);
        cb(s);
    }
}

inline void integrate_control_step(const Dynamics& dyn, std::vector<double>& s,
                                   std::span<const double> act, double delta, int micro_steps)
{
    integrate_control_step(dyn, s, act, delta, micro_steps,
                           [](const std::vector<double>&) {});
}

// Closed-loop RK4 trajectory: the policy action is re-queried at every
// control-step boundary and held constant in between. Returns the states at
// the control-step boundaries, s0 first.
inline std::vector<std::vector<double>> simulate_trajectory(
    const Dynamics& dyn, const Policy& policy, std::vector<double> s0, double delta,
    int steps, int micro_steps)
{
    std::vector<std::vector<double>> trace;
    trace.reserve(static_cast<std::size_t>(steps) + 1);
    trace.push_back(s0);
    std::vector<double> s = std::move(s0);
    for (int t = 0; t < steps; ++t) {
        const auto act = policy.action(s);
        integrate_control_step(dyn, s, act, delta, micro_steps);
        trace.push_back(s);
    }
    return trace;
}

}  // namespace bbreach

#endif
