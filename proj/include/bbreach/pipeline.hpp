#ifndef BBREACH_PIPELINE_HPP
#define BBREACH_PIPELINE_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bbreach/aggregate.hpp"
#include "bbreach/expr.hpp"
#include "bbreach/flowpost.hpp"
#include "bbreach/grid.hpp"
#include "bbreach/interval.hpp"
#include "bbreach/policy.hpp"

namespace bbreach {

class SpecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Everything needed to pose one reach-avoid problem: dynamics, control step,
// horizon, abstraction grid, regions, aggregation threshold, solver knobs.
struct SystemSpec {
    std::string name;
    std::size_t state_dim = 0;
    std::size_t action_dim = 0;
    Dynamics dynamics;
    double delta = 0.0;
    int horizon = 0;
    std::vector<double> domain_lower;
    std::vector<double> domain_upper;
    std::vector<double> granularity;
    IntervalBox initial;
    IntervalBox goal;
    std::vector<IntervalBox> unsafe;
    std::vector<double> aggregation;  // distance threshold h
    SolverParams solver;
    int partitions = 1;
    bool strict_domain = false;

    AbstractionGrid grid() const
    {
        return AbstractionGrid(domain_lower, domain_upper, granularity);
    }

    void validate() const
    {
        if (state_dim == 0)
            throw SpecError("spec: state dimension must be >= 1");
        if (!(delta > 0.0))
            throw SpecError("spec: field 'delta' must be positive");
        if (horizon < 0)
            throw SpecError("spec: field 'horizon' must be >= 0");
        if (partitions < 1)
            throw SpecError("spec: field 'partitions' must be >= 1");
        if (aggregation.size() != state_dim)
            throw SpecError("spec: field 'aggregation' needs one threshold per dimension");
        for (double h : aggregation)
            if (h < 0.0)
                throw SpecError("spec: aggregation thresholds must be >= 0");
        const AbstractionGrid g = grid();
        if (!g.in_domain(initial))
            throw SpecError("spec: initial region must lie inside the domain");
        initial.require_dim(state_dim);
        goal.require_dim(state_dim);
        for (const auto& u : unsafe)
            u.require_dim(state_dim);
    }
};

struct FlowPipeMeta {
    std::string spec_digest;
    std::string policy_digest;
    double wall_ms = 0.0;
    long out_of_domain = 0;
    bool aggregated = true;
};

// Per-step reachable-set over-approximations. steps[t] holds X_t; tubes[t]
// encloses the continuous flow from X_t to X_{t+1} (time [t*delta,
// (t+1)*delta]), recorded per segmented piece before aggregation.
struct FlowPipe {
    std::vector<std::vector<IntervalBox>> steps;
    std::vector<std::vector<IntervalBox>> tubes;
    FlowPipeMeta meta;
};

enum class VerdictKind { Verified, UnsafeIntersection, GoalNotReached, Inconclusive };

struct Verdict {
    VerdictKind kind = VerdictKind::Inconclusive;
    int goal_step = -1;    // first step with every box inside the goal
    int unsafe_step = -1;  // earliest step whose tube touches an unsafe region
    std::optional<IntervalBox> unsafe_box;
    std::string reason;
};

inline const char* to_string(VerdictKind k)
{
    switch (k) {
    case VerdictKind::Verified: return "verified";
    case VerdictKind::UnsafeIntersection: return "unsafe_intersection";
    case VerdictKind::GoalNotReached: return "goal_not_reached";
    case VerdictKind::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

using PostObserver = std::function<void(const IntervalBox& piece,
                                        const std::vector<double>& action,
                                        const PostResult& result)>;

struct ReachOptions {
    bool aggregate = true;
    PostObserver observer;
};

namespace detail {

inline void sort_dedup(std::vector<IntervalBox>& boxes)
{
    std::sort(boxes.begin(), boxes.end(), lex_less);
    boxes.erase(std::unique(boxes.begin(), boxes.end()), boxes.end());
}

inline bool all_inside(const std::vector<IntervalBox>& boxes, const IntervalBox& region)
{
    for (const auto& b : boxes)
        if (!region.contains(b))
            return false;
    return !boxes.empty();
}

}  // namespace detail

// The per-step loop: segment each box along the grid, query one action per
// piece, apply the validated post, then aggregate the successors. Successor
// collection is a set, so bit-identical boxes (e.g. full-cell pieces reached
// from several parents) appear once. Terminates early once every box of X_t
// lies inside the goal.
inline FlowPipe reach(const SystemSpec& spec, const Policy& policy,
                      const ReachOptions& options = {})
{
    spec.validate();
    const AbstractionGrid grid = spec.grid();
    if (!(policy.grid() == grid)) {
        if (policy.grid().granularity() != grid.granularity())
            throw SpecError("policy/spec granularity mismatch");
        throw SpecError("policy/spec domain bounds mismatch");
    }

    FlowPipe pipe;
    pipe.meta.aggregated = options.aggregate;
    pipe.steps.push_back({spec.initial});

    for (int t = 1; t <= spec.horizon; ++t) {
        std::vector<IntervalBox> successors;
        std::vector<IntervalBox> tube;
        for (const IntervalBox& box : pipe.steps.back()) {
            if (!grid.in_domain(box)) {
                if (spec.strict_domain)
                    throw StepFailure("step " + std::to_string(t) +
                                      ": box left the trained domain (strict mode)");
                ++pipe.meta.out_of_domain;
            }
            for (const IntervalBox& piece : grid.segment(box)) {
                const auto action = policy.action_for_cell(piece);
                PostResult pr;
                try {
                    pr = post(piece, action, spec.dynamics, spec.delta, spec.solver);
                } catch (const StepFailure& e) {
                    throw StepFailure("step " + std::to_string(t) + ": " + e.what());
                }
                if (options.observer)
                    options.observer(piece, action, pr);
                successors.push_back(std::move(pr.end_box));
                tube.push_back(std::move(pr.tube_box));
            }
        }
        detail::sort_dedup(successors);
        detail::sort_dedup(tube);
        pipe.tubes.push_back(std::move(tube));
        if (options.aggregate)
            successors = aggregate(std::move(successors), spec.aggregation);
        pipe.steps.push_back(std::move(successors));
        if (detail::all_inside(pipe.steps.back(), spec.goal))
            break;
    }
    return pipe;
}

// Reach-avoid verdict: unsafe checking walks the continuous tubes, goal
// checking the step sets X_t.
inline Verdict check_reach_avoid(const FlowPipe& pipe, const SystemSpec& spec)
{
    Verdict verdict;
    for (std::size_t t = 0; t < pipe.steps.size(); ++t) {
        if (detail::all_inside(pipe.steps[t], spec.goal)) {
            verdict.goal_step = static_cast<int>(t);
            break;
        }
    }

    const std::size_t tube_limit =
        verdict.goal_step < 0 ? pipe.tubes.size()
                              : std::min(pipe.tubes.size(),
                                         static_cast<std::size_t>(verdict.goal_step));
    for (const auto& region : spec.unsafe) {
        for (const auto& box : pipe.steps[0]) {
            if (boxes_intersect(box, region)) {
                verdict.kind = VerdictKind::UnsafeIntersection;
                verdict.unsafe_step = 0;
                verdict.unsafe_box = box;
                verdict.reason = "initial set intersects an unsafe region";
                return verdict;
            }
        }
    }
    for (std::size_t t = 0; t < tube_limit; ++t) {
        for (const auto& box : pipe.tubes[t]) {
            for (const auto& region : spec.unsafe) {
                if (boxes_intersect(box, region)) {
                    verdict.kind = VerdictKind::UnsafeIntersection;
                    verdict.unsafe_step = static_cast<int>(t) + 1;
                    verdict.unsafe_box = box;
                    verdict.reason = "tube intersects an unsafe region at step " +
                                     std::to_string(t + 1);
                    return verdict;
                }
            }
        }
    }

    if (verdict.goal_step >= 0) {
        verdict.kind = VerdictKind::Verified;
        verdict.reason = "all boxes inside the goal at step " +
                         std::to_string(verdict.goal_step);
    } else {
        verdict.kind = VerdictKind::GoalNotReached;
        verdict.reason = "goal not reached within the horizon";
    }
    return verdict;
}

// Split a region into k sub-boxes by recursive proportional bisection of the
// widest dimension; pieces have equal volume and a deterministic order.
inline std::vector<IntervalBox> partition_initial(const IntervalBox& region, int k)
{
    if (k < 1)
        throw DomainError("partition count must be >= 1");
    std::vector<IntervalBox> out;
    struct Item {
        IntervalBox box;
        int count;
    };
    std::vector<Item> stack{{region, k}};
    while (!stack.empty()) {
        Item item = std::move(stack.back());
        stack.pop_back();
        if (item.count == 1) {
            out.push_back(std::move(item.box));
            continue;
        }
        std::size_t widest = 0;
        for (std::size_t i = 1; i < item.box.dim(); ++i)
            if (item.box[i].width() > item.box[widest].width())
                widest = i;
        const int left = (item.count + 1) / 2;
        const int right = item.count - left;
        const Interval& w = item.box[widest];
        const double cut =
            w.lo + w.width() * (static_cast<double>(left) / static_cast<double>(item.count));
        IntervalBox lo_box = item.box;
        IntervalBox hi_box = item.box;
        lo_box[widest] = Interval(w.lo, cut);
        hi_box[widest] = Interval(cut, w.hi);
        // depth-first, left first: push right before left
        stack.push_back({std::move(hi_box), right});
        stack.push_back({std::move(lo_box), left});
    }
    return out;
}

struct PartitionResult {
    IntervalBox region;
    FlowPipe pipe;
    Verdict verdict;
};

struct ParallelResult {
    std::vector<PartitionResult> partitions;
    Verdict combined;
};

inline int worker_count(int partitions)
{
    int threads = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("BBREACH_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1)
            threads = cap;
    }
    return std::max(1, std::min(threads, partitions));
}

// Partition-level parallelism: each worker owns one partition's pipeline;
// results are collected by partition index so the output is independent of
// scheduling.
inline ParallelResult reach_parallel(const SystemSpec& spec, const Policy& policy,
                                     const ReachOptions& options = {})
{
    spec.validate();
    const auto parts = partition_initial(spec.initial, spec.partitions);
    const std::size_t k = parts.size();

    std::vector<PartitionResult> results(k);
    std::vector<std::exception_ptr> errors(k);
    std::atomic<std::size_t> next{0};

    const auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= k)
                return;
            try {
                SystemSpec sub = spec;
                sub.initial = parts[i];
                sub.partitions = 1;
                ReachOptions sub_options = options;
                results[i].region = parts[i];
                results[i].pipe = reach(sub, policy, sub_options);
                results[i].verdict = check_reach_avoid(results[i].pipe, sub);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    const int threads = worker_count(static_cast<int>(k));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int i = 0; i < threads; ++i)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }

    for (std::size_t i = 0; i < k; ++i) {
        if (errors[i]) {
            try {
                std::rethrow_exception(errors[i]);
            } catch (const std::exception& e) {
                throw StepFailure("partition " + std::to_string(i) + ": " + e.what());
            }
        }
    }

    ParallelResult out;
    out.combined.kind = VerdictKind::Verified;
    out.combined.goal_step = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const Verdict& v = results[i].verdict;
        if (out.combined.kind == VerdictKind::Verified &&
            v.kind != VerdictKind::Verified) {
            out.combined = v;
            out.combined.reason = "partition " + std::to_string(i) + ": " + v.reason;
        }
        if (out.combined.kind == VerdictKind::Verified)
            out.combined.goal_step = std::max(out.combined.goal_step, v.goal_step);
    }
    if (out.combined.kind == VerdictKind::Verified && k > 0)
        out.combined.reason = "all partitions verified";
    out.partitions = std::move(results);
    return out;
}

}  // namespace bbreach

#endif
