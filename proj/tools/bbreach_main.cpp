// bbreach: reachability analysis of grid-abstracted neural-network-controlled
// systems. Subcommands: verify, simulate, synth.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bbreach/io.hpp"
#include "bbreach/pipeline.hpp"
#include "bbreach/simulate.hpp"
#include "bbreach/synth.hpp"

namespace fs = std::filesystem;
using namespace bbreach;

namespace {

constexpr int kExitVerified = 0;
constexpr int kExitUnsafe = 1;
constexpr int kExitNotReached = 2;
constexpr int kExitUsage = 3;

int verdict_exit_code(VerdictKind kind)
{
    switch (kind) {
    case VerdictKind::Verified: return kExitVerified;
    case VerdictKind::UnsafeIntersection: return kExitUnsafe;
    case VerdictKind::GoalNotReached:
    case VerdictKind::Inconclusive: return kExitNotReached;
    }
    return kExitUsage;
}

struct VerifyArgs {
    std::string spec_path;
    std::string policy_path;
    std::string out_dir = ".";
    int partitions = 0;  // 0 = take from the spec
    bool no_aggregate = false;
    bool svg = false;
    std::vector<std::size_t> proj{1, 2};
};

int run_verify(const VerifyArgs& args)
{
    SystemSpec spec = io::load_spec(args.spec_path);
    const Policy policy = io::load_policy(args.policy_path);
    if (args.partitions > 0)
        spec.partitions = args.partitions;

    ReachOptions options;
    options.aggregate = !args.no_aggregate;

    fs::create_directories(args.out_dir);

    const auto t0 = std::chrono::steady_clock::now();
    ParallelResult result;
    bool inconclusive = false;
    std::string failure;
    try {
        result = reach_parallel(spec, policy, options);
    } catch (const StepFailure& e) {
        inconclusive = true;
        failure = e.what();
    }
    const double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();

    if (inconclusive) {
        result.combined.kind = VerdictKind::Inconclusive;
        result.combined.reason = failure;
    }

    const std::string spec_dig = io::spec_digest(spec);
    const std::string policy_dig = io::policy_digest(policy);
    for (std::size_t i = 0; i < result.partitions.size(); ++i) {
        auto& pipe = result.partitions[i].pipe;
        pipe.meta.spec_digest = spec_dig;
        pipe.meta.policy_digest = policy_dig;
        io::write_text_file(args.out_dir + "/flowpipe_p" + std::to_string(i) + ".csv",
                            io::flowpipe_csv(pipe, spec.state_dim));
    }
    io::write_text_file(args.out_dir + "/summary.json",
                        io::summary_to_json(result, wall_ms).dump(2) + "\n");

    if (args.svg && !result.partitions.empty()) {
        if (args.proj.size() != 2 || args.proj[0] < 1 || args.proj[1] < 1 ||
            args.proj[0] > spec.state_dim || args.proj[1] > spec.state_dim) {
            std::cerr << "error: --proj needs two 1-based dimension indices <= "
                      << spec.state_dim << "\n";
            return kExitUsage;
        }
        std::vector<const FlowPipe*> pipes;
        for (const auto& p : result.partitions)
            pipes.push_back(&p.pipe);
        io::write_text_file(args.out_dir + "/flowpipe.svg",
                            io::flowpipe_svg(pipes, spec, args.proj[0] - 1, args.proj[1] - 1));
    }

    std::cout << "verdict: " << to_string(result.combined.kind);
    if (result.combined.kind == VerdictKind::Verified)
        std::cout << " (goal reached at step " << result.combined.goal_step << ")";
    if (!result.combined.reason.empty())
        std::cout << " - " << result.combined.reason;
    std::cout << "\n";
    return verdict_exit_code(result.combined.kind);
}

struct SimulateArgs {
    std::string spec_path;
    std::string policy_path;
    std::string out_dir = ".";
    int samples = 100;
    std::uint64_t seed = 0;
};

int run_simulate(const SimulateArgs& args)
{
    const SystemSpec spec = io::load_spec(args.spec_path);
    const Policy policy = io::load_policy(args.policy_path);

    std::mt19937_64 rng(args.seed);
    std::vector<std::vector<std::vector<double>>> trajectories;
    trajectories.reserve(static_cast<std::size_t>(args.samples));
    for (int i = 0; i < args.samples; ++i) {
        std::vector<double> s0(spec.state_dim);
        for (std::size_t d = 0; d < spec.state_dim; ++d) {
            std::uniform_real_distribution<double> dist(spec.initial[d].lo,
                                                        spec.initial[d].hi);
            s0[d] = dist(rng);
        }
        trajectories.push_back(
            simulate_trajectory(spec.dynamics, policy, std::move(s0), spec.delta,
                                spec.horizon, 100));
    }

    fs::create_directories(args.out_dir);
    io::write_text_file(args.out_dir + "/trajectories.csv",
                        io::trajectories_csv(trajectories, spec.state_dim));
    std::cout << "wrote " << args.samples << " trajectories\n";
    return kExitVerified;
}

struct SynthArgs {
    std::string spec_path;
    std::string out_path;
    int iterations = 60;
    std::uint64_t seed = 0;
    int population = 64;
    double elite_fraction = 0.125;
    double mutation_scale = 0.5;
    std::vector<double> action_lower;
    std::vector<double> action_upper;
};

int run_synth(const SynthArgs& args)
{
    SynthConfig config;
    config.spec = io::load_spec(args.spec_path);
    config.iterations = args.iterations;
    config.seed = args.seed;
    config.population = args.population;
    config.elite_fraction = args.elite_fraction;
    config.mutation_scale = args.mutation_scale;
    config.action_lower = args.action_lower.empty()
                              ? std::vector<double>(config.spec.action_dim, -1.0)
                              : args.action_lower;
    config.action_upper = args.action_upper.empty()
                              ? std::vector<double>(config.spec.action_dim, 1.0)
                              : args.action_upper;

    const SynthResult result = synthesize(config);
    io::save_policy(args.out_path, Policy(result.policy));

    std::string curve_path = args.out_path;
    if (curve_path.size() > 5 && curve_path.ends_with(".json"))
        curve_path.resize(curve_path.size() - 5);
    curve_path += "_curve.csv";
    io::write_text_file(curve_path, io::curve_csv(result.curve));

    std::cout << "best mean reward: " << result.best_reward << "\n";
    if (!result.reached_goal)
        std::cout << "warning: no candidate reached the goal from every sampled start; "
                     "wrote best-so-far policy\n";
    return kExitVerified;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"black-box reachability analysis for grid-abstracted "
                 "DNN-controlled systems"};
    app.require_subcommand(1);

    VerifyArgs verify_args;
    auto* verify = app.add_subcommand("verify", "compute the flowpipe and check reach-avoid");
    verify->add_option("--spec", verify_args.spec_path, "system spec JSON")->required();
    verify->add_option("--policy", verify_args.policy_path, "policy JSON")->required();
    verify->add_option("--out", verify_args.out_dir, "output directory");
    verify->add_option("--partitions", verify_args.partitions,
                       "initial-set partition count (overrides the spec)");
    verify->add_flag("--no-aggregate", verify_args.no_aggregate,
                     "disable adjacent interval aggregation");
    verify->add_flag("--svg", verify_args.svg, "write an SVG projection");
    verify->add_option("--proj", verify_args.proj, "projection dimensions (two 1-based)")
        ->expected(2);

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "record closed-loop RK4 trajectories");
    simulate->add_option("--spec", sim_args.spec_path, "system spec JSON")->required();
    simulate->add_option("--policy", sim_args.policy_path, "policy JSON")->required();
    simulate->add_option("--samples", sim_args.samples, "number of trajectories")->required();
    simulate->add_option("--seed", sim_args.seed, "RNG seed")->required();
    simulate->add_option("--out", sim_args.out_dir, "output directory");

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "synthesize a table policy (cross-entropy)");
    synth->add_option("--spec", synth_args.spec_path, "system spec JSON")->required();
    synth->add_option("--iters", synth_args.iterations, "iterations")->required();
    synth->add_option("--seed", synth_args.seed, "RNG seed")->required();
    synth->add_option("--out", synth_args.out_path, "output policy path")->required();
    synth->add_option("--pop", synth_args.population, "population size");
    synth->add_option("--elite", synth_args.elite_fraction, "elite fraction");
    synth->add_option("--sigma", synth_args.mutation_scale, "initial mutation scale");
    synth->add_option("--action-lower", synth_args.action_lower,
                      "per-dimension action lower bounds");
    synth->add_option("--action-upper", synth_args.action_upper,
                      "per-dimension action upper bounds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitVerified : kExitUsage;
    }

    try {
        if (verify->parsed())
            return run_verify(verify_args);
        if (simulate->parsed())
            return run_simulate(sim_args);
        if (synth->parsed())
            return run_synth(synth_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
