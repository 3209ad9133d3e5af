#ifndef BBREACH_SYNTH_HPP
#define BBREACH_SYNTH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "bbreach/pipeline.hpp"
#include "bbreach/policy.hpp"
#include "bbreach/simulate.hpp"

namespace bbreach {

struct RewardWeights {
    double distance = 1.0;
    double goal_bonus = 100.0;
    double unsafe_penalty = 500.0;
};

struct SynthConfig {
    SystemSpec spec;
    std::vector<double> action_lower;  // per action dimension
    std::vector<double> action_upper;
    int episodes_per_candidate = 16;
    int iterations = 60;
    int population = 64;
    double elite_fraction = 0.125;
    double mutation_scale = 0.5;
    std::uint64_t seed = 0;
    RewardWeights weights;
    int micro_steps = 10;  // RK4 stages per control step in episodes

    void validate() const
    {
        spec.validate();
        if (iterations < 1)
            throw SpecError("synth: iterations must be >= 1");
        if (population < 2)
            throw SpecError("synth: population must be >= 2");
        if (!(elite_fraction > 0.0 && elite_fraction <= 1.0))
            throw SpecError("synth: elite fraction must be in (0, 1]");
        if (action_lower.size() != spec.action_dim ||
            action_upper.size() != spec.action_dim)
            throw SpecError("synth: action bounds need one entry per action dimension");
        for (std::size_t i = 0; i < action_lower.size(); ++i)
            if (!(action_lower[i] < action_upper[i]))
                throw SpecError("synth: action bounds must satisfy lower < upper");
    }
};

struct EpisodeResult {
    std::vector<std::vector<double>> trace;  // control-step boundary states
    double reward = 0.0;
    bool reached_goal = false;
    bool hit_unsafe = false;
};

namespace detail {

inline bool in_any(const std::vector<IntervalBox>& regions, std::span<const double> s)
{
    for (const auto& r : regions)
        if (r.contains(s))
            return true;
    return false;
}

inline double goal_distance(const SystemSpec& spec, std::span<const double> s)
{
    double sq = 0.0;
    for (std::size_t i = 0; i < spec.state_dim; ++i) {
        const double d = s[i] - spec.goal[i].mid();
        sq += d * d;
    }
    return std::sqrt(sq);
}

// Halton low-discrepancy sequence; gives the fixed episode start points.
inline double halton(std::uint64_t index, std::uint64_t base)
{
    double f = 1.0;
    double r = 0.0;
    while (index > 0) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

inline std::vector<std::vector<double>> episode_starts(const SystemSpec& spec, int count)
{
    static constexpr std::uint64_t primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
    std::vector<std::vector<double>> starts;
    starts.reserve(static_cast<std::size_t>(count));
    for (int e = 0; e < count; ++e) {
        std::vector<double> s(spec.state_dim);
        for (std::size_t i = 0; i < spec.state_dim; ++i) {
            const double u = halton(static_cast<std::uint64_t>(e) + 1,
                                    primes[i % std::size(primes)]);
            s[i] = spec.initial[i].lo + u * spec.initial[i].width();
        }
        starts.push_back(std::move(s));
    }
    return starts;
}

}  // namespace detail

// One closed-loop rollout: RK4 with a fixed micro-step, the action re-queried
// every delta. Reward is -distance-to-goal-center per step, a goal bonus on
// entry, an unsafe penalty on contact; the episode stops at goal entry,
// unsafe contact, or the horizon.
inline EpisodeResult simulate_episode(const SystemSpec& spec, const Policy& policy,
                                      std::vector<double> s0, const RewardWeights& weights,
                                      int micro_steps)
{
    EpisodeResult ep;
    ep.trace.push_back(s0);
    std::vector<double> s = std::move(s0);

    if (detail::in_any(spec.unsafe, s)) {
        ep.reward -= weights.unsafe_penalty;
        ep.hit_unsafe = true;
        return ep;
    }
    if (spec.goal.contains(s)) {
        ep.reward += weights.goal_bonus;
        ep.reached_goal = true;
        return ep;
    }

    for (int t = 1; t <= spec.horizon; ++t) {
        const auto act = policy.action(s);
        bool contact = false;
        integrate_control_step(spec.dynamics, s, act, spec.delta, micro_steps,
                               [&](const std::vector<double>& state) {
                                   contact = contact || detail::in_any(spec.unsafe, state);
                               });
        ep.trace.push_back(s);
        if (contact) {
            ep.reward -= weights.unsafe_penalty;
            ep.hit_unsafe = true;
            return ep;
        }
        if (spec.goal.contains(s)) {
            ep.reward += weights.goal_bonus;
            ep.reached_goal = true;
            return ep;
        }
        ep.reward -= weights.distance * detail::goal_distance(spec, s);
    }
    return ep;
}

struct SynthCurvePoint {
    int iteration = 0;
    double mean_reward = 0.0;
    double elite_mean = 0.0;
    double best_reward = 0.0;
};

struct SynthResult {
    TablePolicy policy;
    std::vector<SynthCurvePoint> curve;
    bool reached_goal = false;  // warning flag is the negation
    double best_reward = 0.0;
};

namespace detail {

// Dense candidate: one action vector per grid cell, flattened row-major.
struct CemState {
    std::vector<std::int64_t> cells;  // per-dimension cell counts
    std::size_t total_cells = 0;
    std::size_t action_dim = 0;

    std::size_t flat(const CellId& id) const
    {
        std::size_t f = 0;
        for (std::size_t i = 0; i < id.index.size(); ++i)
            f = f * static_cast<std::size_t>(cells[i]) + static_cast<std::size_t>(id.index[i]);
        return f;
    }
};

inline TablePolicy table_from_flat(const AbstractionGrid& grid,
                                   const std::vector<double>& flat, std::size_t action_dim,
                                   const std::vector<double>& default_action)
{
    TablePolicy table;
    table.grid = grid;
    table.default_action = default_action;
    std::vector<std::int64_t> idx(grid.dim(), 0);
    const std::size_t total = flat.size() / action_dim;
    for (std::size_t f = 0; f < total; ++f) {
        CellId id;
        id.index = idx;
        std::vector<double> a(action_dim);
        for (std::size_t j = 0; j < action_dim; ++j)
            a[j] = flat[f * action_dim + j];
        table.actions.emplace(std::move(id), std::move(a));
        for (std::size_t i = grid.dim(); i-- > 0;) {
            if (++idx[i] < grid.cells(i))
                break;
            idx[i] = 0;
        }
    }
    return table;
}

}  // namespace detail

// Cross-entropy search over per-cell action tables: Gaussian perturbation of
// a mean table, elite refit, keep-best. Unvisited cells are finally filled
// from the nearest cell the best policy's rollouts visited, so the verified
// flowpipe does not wander into noise actions just outside the corridor.
inline SynthResult synthesize(const SynthConfig& config)
{
    config.validate();
    const AbstractionGrid grid = config.spec.grid();
    const std::size_t n_dim = grid.dim();
    const std::size_t m = config.spec.action_dim;

    detail::CemState cem;
    cem.cells.resize(n_dim);
    cem.total_cells = 1;
    for (std::size_t i = 0; i < n_dim; ++i) {
        cem.cells[i] = grid.cells(i);
        cem.total_cells *= static_cast<std::size_t>(grid.cells(i));
    }
    cem.action_dim = m;
    const std::size_t params = cem.total_cells * m;

    std::vector<double> mid_action(m);
    for (std::size_t j = 0; j < m; ++j)
        mid_action[j] = 0.5 * (config.action_lower[j] + config.action_upper[j]);

    std::vector<double> mean(params);
    for (std::size_t f = 0; f < cem.total_cells; ++f)
        for (std::size_t j = 0; j < m; ++j)
            mean[f * m + j] = mid_action[j];
    std::vector<double> sigma(params, config.mutation_scale);

    const auto starts = detail::episode_starts(config.spec, config.episodes_per_candidate);
    const auto clamp_actions = [&](std::vector<double>& flat) {
        for (std::size_t f = 0; f < cem.total_cells; ++f)
            for (std::size_t j = 0; j < m; ++j) {
                double& v = flat[f * m + j];
                v = std::clamp(v, config.action_lower[j], config.action_upper[j]);
            }
    };

    const auto evaluate = [&](const std::vector<double>& flat) {
        const Policy policy(detail::table_from_flat(grid, flat, m, mid_action));
        double total = 0.0;
        bool all_goal = true;
        for (const auto& s0 : starts) {
            const auto ep = simulate_episode(config.spec, policy, s0, config.weights,
                                             config.micro_steps);
            total += ep.reward;
            all_goal = all_goal && ep.reached_goal;
        }
        return std::pair<double, bool>(total / static_cast<double>(starts.size()), all_goal);
    };

    SynthResult result;
    std::vector<double> best = mean;
    double best_reward = -std::numeric_limits<double>::infinity();
    bool best_all_goal = false;

    const int elites = std::max(1, static_cast<int>(std::ceil(
                                       config.elite_fraction * config.population)));

    for (int iter = 0; iter < config.iterations; ++iter) {
        std::vector<std::vector<double>> candidates;
        std::vector<double> rewards(static_cast<std::size_t>(config.population));
        candidates.reserve(static_cast<std::size_t>(config.population));

        for (int c = 0; c < config.population; ++c) {
            // per-candidate RNG stream derived from the seed by counter, so
            // results are independent of evaluation order
            std::mt19937_64 rng(config.seed ^
                                (0x9e3779b97f4a7c15ULL *
                                 (static_cast<std::uint64_t>(iter) * config.population +
                                  static_cast<std::uint64_t>(c) + 1)));
            std::normal_distribution<double> gauss(0.0, 1.0);
            std::vector<double> cand = mean;
            if (c > 0) {  // candidate 0 evaluates the current mean
                for (std::size_t p = 0; p < params; ++p)
                    cand[p] += sigma[p] * gauss(rng);
            }
            clamp_actions(cand);
            candidates.push_back(std::move(cand));
        }

        double mean_reward = 0.0;
        for (int c = 0; c < config.population; ++c) {
            const auto [reward, all_goal] = evaluate(candidates[static_cast<std::size_t>(c)]);
            rewards[static_cast<std::size_t>(c)] = reward;
            mean_reward += reward;
            if (reward > best_reward) {
                best_reward = reward;
                best = candidates[static_cast<std::size_t>(c)];
                best_all_goal = all_goal;
            }
        }
        mean_reward /= config.population;

        std::vector<int> order(static_cast<std::size_t>(config.population));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return rewards[static_cast<std::size_t>(a)] > rewards[static_cast<std::size_t>(b)];
        });

        double elite_mean = 0.0;
        for (int e = 0; e < elites; ++e)
            elite_mean += rewards[static_cast<std::size_t>(order[static_cast<std::size_t>(e)])];
        elite_mean /= elites;

        for (std::size_t p = 0; p < params; ++p) {
            double mu = 0.0;
            for (int e = 0; e < elites; ++e)
                mu += candidates[static_cast<std::size_t>(order[static_cast<std::size_t>(e)])][p];
            mu /= elites;
            double var = 0.0;
            for (int e = 0; e < elites; ++e) {
                const double d =
                    candidates[static_cast<std::size_t>(order[static_cast<std::size_t>(e)])][p] - mu;
                var += d * d;
            }
            mean[p] = mu;
            sigma[p] = std::max(std::sqrt(var / elites), 0.02);
        }

        result.curve.push_back({iter, mean_reward, elite_mean, best_reward});
    }

    // mark the cells the winning policy actually visits, then fill the rest
    // from the nearest visited cell
    const Policy best_policy(detail::table_from_flat(grid, best, m, mid_action));
    std::set<std::size_t> visited;
    for (const auto& s0 : starts) {
        const auto ep = simulate_episode(config.spec, best_policy, s0, config.weights,
                                         config.micro_steps);
        for (const auto& state : ep.trace)
            visited.insert(cem.flat(grid.cell_of(state)));
    }

    std::vector<std::vector<std::int64_t>> visited_ids;
    for (std::size_t f : visited) {
        std::vector<std::int64_t> idx(n_dim);
        std::size_t rest = f;
        for (std::size_t i = n_dim; i-- > 0;) {
            idx[i] = static_cast<std::int64_t>(rest % static_cast<std::size_t>(cem.cells[i]));
            rest /= static_cast<std::size_t>(cem.cells[i]);
        }
        visited_ids.push_back(std::move(idx));
    }

    std::vector<double> filled = best;
    std::vector<std::int64_t> idx(n_dim, 0);
    for (std::size_t f = 0; f < cem.total_cells; ++f) {
        if (!visited.count(f) && !visited_ids.empty()) {
            std::size_t nearest = 0;
            std::int64_t nearest_d2 = std::numeric_limits<std::int64_t>::max();
            for (std::size_t v = 0; v < visited_ids.size(); ++v) {
                std::int64_t d2 = 0;
                for (std::size_t i = 0; i < n_dim; ++i) {
                    const std::int64_t d = visited_ids[v][i] - idx[i];
                    d2 += d * d;
                }
                if (d2 < nearest_d2) {
                    nearest_d2 = d2;
                    nearest = v;
                }
            }
            std::size_t src = 0;
            for (std::size_t i = 0; i < n_dim; ++i)
                src = src * static_cast<std::size_t>(cem.cells[i]) +
                      static_cast<std::size_t>(visited_ids[nearest][i]);
            for (std::size_t j = 0; j < m; ++j)
                filled[f * m + j] = best[src * m + j];
        }
        for (std::size_t i = n_dim; i-- > 0;) {
            if (++idx[i] < cem.cells[i])
                break;
            idx[i] = 0;
        }
    }

    result.policy = detail::table_from_flat(grid, filled, m, mid_action);
    result.reached_goal = best_all_goal;
    result.best_reward = best_reward;
    return result;
}

}  // namespace bbreach

#endif
