#ifndef BBREACH_FLOWPOST_HPP
#define BBREACH_FLOWPOST_HPP

#include <cassert>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bbreach/expr.hpp"
#include "bbreach/interval.hpp"
#include "bbreach/taylor.hpp"

namespace bbreach {

class EnclosureFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StepFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolverParams {
    int taylor_order = 5;
    int max_enclosure_attempts = 30;
    int max_substeps = 64;
    double min_step_divisor = 1024.0;
};

// One accepted Taylor sub-step: solution coefficients from the sub-step's
// initial box (coeffs[i][0]), a remainder valid for every tau in [0, t],
// and the a priori enclosure the remainder came from.
struct TaylorStep {
    int order = 0;
    std::vector<std::vector<Interval>> coeffs;
    std::vector<Interval> remainder;
    double t = 0.0;
    IntervalBox apriori;

    IntervalBox initial_box() const
    {
        std::vector<Interval> dims;
        dims.reserve(coeffs.size());
        for (const auto& c : coeffs)
            dims.push_back(c[0]);
        return IntervalBox(std::move(dims));
    }
};

struct PostResult {
    IntervalBox end_box;   // encloses the states at time delta
    IntervalBox tube_box;  // encloses the states over the whole [0, delta]
    std::vector<TaylorStep> substeps;
};

inline std::vector<Interval> eval_dynamics_box(const Dynamics& dyn, const IntervalBox& box,
                                               std::span<const double> act)
{
    std::vector<Interval> out;
    out.reserve(dyn.state_dim);
    for (const auto& ast : dyn.rhs)
        out.push_back(eval_box(ast, box, act));
    return out;
}

// The Picard condition box + [0,t]*f(B) subset-of B, checked mechanically.
inline bool picard_holds(const IntervalBox& box, std::span<const double> act,
                         const Dynamics& dyn, double t, const IntervalBox& enclosure)
{
    const auto f = eval_dynamics_box(dyn, enclosure, act);
    const Interval span(0.0, t);
    for (std::size_t i = 0; i < box.dim(); ++i) {
        const Interval image = box[i] + span * f[i];
        if (!enclosure[i].contains(image))
            return false;
    }
    return true;
}

inline IntervalBox inflate_each(const IntervalBox& box, std::span<const double> eps)
{
    std::vector<Interval> dims;
    dims.reserve(box.dim());
    for (std::size_t i = 0; i < box.dim(); ++i)
        dims.push_back(inflate(box[i], eps[i]));
    return IntervalBox(std::move(dims));
}

// Search for a box satisfying the Picard condition over [0, t]: seed with the
// box inflated by t*|f(box)|, then widen by 1.5x per failed attempt.
inline IntervalBox apriori_enclosure(const IntervalBox& box, std::span<const double> act,
                                     const Dynamics& dyn, double t,
                                     const SolverParams& params = {})
{
    if (!(t > 0.0))
        throw DomainError("enclosure step must be positive");
    const auto f0 = eval_dynamics_box(dyn, box, act);
    std::vector<double> eps(box.dim());
    for (std::size_t i = 0; i < box.dim(); ++i)
        eps[i] = t * f0[i].mag();

    IntervalBox enclosure = inflate_each(box, eps);
    const Interval span(0.0, t);
    for (int attempt = 0; attempt < params.max_enclosure_attempts; ++attempt) {
        try {
            const auto f = eval_dynamics_box(dyn, enclosure, act);
            std::vector<Interval> image;
            image.reserve(box.dim());
            bool ok = true;
            for (std::size_t i = 0; i < box.dim(); ++i) {
                image.push_back(box[i] + span * f[i]);
                ok = ok && enclosure[i].contains(image.back());
            }
            if (ok) {
                if (!picard_holds(box, act, dyn, t, enclosure))
                    throw EnclosureFailure("accepted enclosure failed the Picard re-check");
                return enclosure;
            }
            for (std::size_t i = 0; i < box.dim(); ++i)
                eps[i] *= 1.5;
            enclosure = inflate_each(hull(enclosure, IntervalBox(std::move(image))), eps);
        } catch (const DomainError&) {
            // widening drove the box out of the dynamics' domain or overflowed
            throw EnclosureFailure("enclosure search diverged while widening");
        }
    }
    throw EnclosureFailure("no a priori enclosure after " +
                           std::to_string(params.max_enclosure_attempts) +
                           " attempts (step too large)");
}

// Interval range of the step polynomial plus remainder at a time value;
// tau may be a scalar or the whole [0, t] range.
inline IntervalBox evaluate_step_over(const TaylorStep& step, const Interval& tau)
{
    std::vector<Interval> dims;
    dims.reserve(step.coeffs.size());
    for (std::size_t i = 0; i < step.coeffs.size(); ++i) {
        const auto& c = step.coeffs[i];
        Interval acc = c.back();
        for (std::size_t j = c.size() - 1; j-- > 0;)
            acc = acc * tau + c[j];
        dims.push_back(acc + step.remainder[i]);
    }
    return IntervalBox(std::move(dims));
}

inline IntervalBox evaluate_step(const TaylorStep& step, double tau)
{
    if (tau < 0.0 || tau > step.t)
        throw DomainError("evaluation time outside [0, step length]");
    return evaluate_step_over(step, Interval(tau));
}

// Sound enclosure of the time-delta successor set and of the whole tube
// Reach^[0,delta], as interval Taylor sub-steps with Picard enclosures.
inline PostResult post(const IntervalBox& box, std::span<const double> act,
                       const Dynamics& dyn, double delta, const SolverParams& params = {})
{
    if (!(delta > 0.0))
        throw DomainError("post needs delta > 0");
    const int k = params.taylor_order;
    const double min_step = delta / params.min_step_divisor;

    PostResult result;
    IntervalBox current = box;
    std::optional<IntervalBox> tube;
    double remaining = delta;

    while (remaining > 0.0) {
        double t_try = remaining;
        IntervalBox enclosure;
        for (;;) {
            try {
                enclosure = apriori_enclosure(current, act, dyn, t_try, params);
                break;
            } catch (const EnclosureFailure&) {
                t_try *= 0.5;
                if (t_try < min_step)
                    throw StepFailure("no valid enclosure above the minimum sub-step (" +
                                      std::to_string(min_step) + "s)");
            }
        }

        TaylorStep step;
        step.order = k;
        step.t = t_try;
        step.apriori = enclosure;
        step.coeffs = taylor_coeffs(dyn, current, act, k);
        const auto wide = taylor_coeffs(dyn, enclosure, act, k + 1);
        const Interval tau_pow = pow_int(Interval(0.0, t_try), k + 1);
        step.remainder.reserve(box.dim());
        for (std::size_t i = 0; i < box.dim(); ++i)
            step.remainder.push_back(inflate(wide[i][static_cast<std::size_t>(k) + 1] * tau_pow, 0.0));

        const IntervalBox end = evaluate_step(step, t_try);
        const IntervalBox range = evaluate_step_over(step, Interval(0.0, t_try));
        assert(range.contains(end));
        tube = tube ? hull(*tube, range) : range;
        result.substeps.push_back(std::move(step));
        current = end;
        remaining -= t_try;

        if (remaining > 0.0 && static_cast<int>(result.substeps.size()) >= params.max_substeps)
            throw StepFailure("exceeded " + std::to_string(params.max_substeps) +
                              " sub-steps within one delta");
    }

    result.end_box = std::move(current);
    result.tube_box = std::move(*tube);
    return result;
}

}  // namespace bbreach

#endif
