#ifndef BBREACH_IO_HPP
#define BBREACH_IO_HPP

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bbreach/pipeline.hpp"
#include "bbreach/policy.hpp"
#include "bbreach/synth.hpp"

namespace bbreach::io {

using nlohmann::json;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline json load_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw IoError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

inline void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write file: " + path);
    out << text;
}

inline std::string fnv1a_hex(const std::string& data)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline const json& require(const json& j, const std::string& field, const std::string& ctx)
{
    if (!j.contains(field) || j.at(field).is_null())
        throw SpecError(ctx + ": missing field '" + field + "'");
    return j.at(field);
}

inline std::vector<double> double_list(const json& j, const std::string& field,
                                       const std::string& ctx)
{
    const json& arr = require(j, field, ctx);
    if (!arr.is_array() || arr.empty())
        throw SpecError(ctx + ": field '" + field + "' must be a non-empty array");
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_number())
            throw SpecError(ctx + ": field '" + field + "' must contain numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace detail

inline json box_to_json(const IntervalBox& box)
{
    json lower = json::array();
    json upper = json::array();
    for (std::size_t i = 0; i < box.dim(); ++i) {
        lower.push_back(box[i].lo);
        upper.push_back(box[i].hi);
    }
    return json{{"lower", lower}, {"upper", upper}};
}

inline IntervalBox box_from_json(const json& j, const std::string& ctx)
{
    const auto lower = detail::double_list(j, "lower", ctx);
    const auto upper = detail::double_list(j, "upper", ctx);
    if (lower.size() != upper.size())
        throw SpecError(ctx + ": lower/upper size mismatch");
    return IntervalBox(lower, upper);
}

inline AbstractionGrid grid_from_json(const json& j, const std::string& ctx)
{
    return AbstractionGrid(detail::double_list(j, "lower", ctx),
                           detail::double_list(j, "upper", ctx),
                           detail::double_list(j, "granularity", ctx));
}

inline json grid_to_json(const AbstractionGrid& grid)
{
    return json{{"lower", grid.lower()},
                {"upper", grid.upper()},
                {"granularity", grid.granularity()}};
}

// System spec document: dynamics as expression strings, all regions as
// {lower, upper} boxes, plain decimal numbers throughout.
inline SystemSpec spec_from_json(const json& j)
{
    const std::string ctx = "spec";
    SystemSpec spec;
    spec.name = j.value("name", "unnamed");

    const json& domain = detail::require(j, "domain", ctx);
    spec.domain_lower = detail::double_list(domain, "lower", ctx + ".domain");
    spec.domain_upper = detail::double_list(domain, "upper", ctx + ".domain");
    spec.state_dim = spec.domain_lower.size();
    spec.granularity = detail::double_list(j, "granularity", ctx);

    const json& adim = detail::require(j, "action_dim", ctx);
    if (!adim.is_number_unsigned() || adim.get<std::size_t>() == 0)
        throw SpecError("spec: field 'action_dim' must be a positive integer");
    spec.action_dim = adim.get<std::size_t>();

    const json& dyn = detail::require(j, "dynamics", ctx);
    if (!dyn.is_array() || dyn.size() != spec.state_dim)
        throw SpecError("spec: field 'dynamics' needs one expression per state dimension");
    std::vector<std::string> exprs;
    for (const auto& e : dyn) {
        if (!e.is_string())
            throw SpecError("spec: field 'dynamics' must contain expression strings "
                            "(fill in the placeholder before running)");
        exprs.push_back(e.get<std::string>());
    }
    try {
        spec.dynamics = Dynamics::parse(exprs, spec.state_dim, spec.action_dim);
    } catch (const ParseError& e) {
        throw SpecError("spec: field 'dynamics': " + std::string(e.what()));
    }

    const json& delta = detail::require(j, "delta", ctx);
    if (!delta.is_number())
        throw SpecError("spec: field 'delta' must be a number");
    spec.delta = delta.get<double>();

    const json& horizon = detail::require(j, "horizon", ctx);
    if (!horizon.is_number_integer())
        throw SpecError("spec: field 'horizon' must be an integer");
    spec.horizon = horizon.get<int>();

    spec.initial = box_from_json(detail::require(j, "initial", ctx), ctx + ".initial");
    spec.goal = box_from_json(detail::require(j, "goal", ctx), ctx + ".goal");
    if (j.contains("unsafe")) {
        for (const auto& u : j.at("unsafe"))
            spec.unsafe.push_back(box_from_json(u, ctx + ".unsafe"));
    }
    spec.aggregation = detail::double_list(j, "aggregation", ctx);
    spec.partitions = j.value("partitions", 1);
    spec.strict_domain = j.value("strict_domain", false);

    if (j.contains("solver")) {
        const json& solver = j.at("solver");
        spec.solver.taylor_order = solver.value("taylor_order", spec.solver.taylor_order);
        spec.solver.max_enclosure_attempts =
            solver.value("max_enclosure_attempts", spec.solver.max_enclosure_attempts);
        spec.solver.max_substeps = solver.value("max_substeps", spec.solver.max_substeps);
        spec.solver.min_step_divisor =
            solver.value("min_step_divisor", spec.solver.min_step_divisor);
    }

    spec.validate();
    return spec;
}

inline json spec_to_json(const SystemSpec& spec)
{
    json dyn = json::array();
    for (const auto& ast : spec.dynamics.rhs)
        dyn.push_back(ast.to_string());
    json unsafe = json::array();
    for (const auto& u : spec.unsafe)
        unsafe.push_back(box_to_json(u));
    return json{{"name", spec.name},
                {"action_dim", spec.action_dim},
                {"dynamics", dyn},
                {"delta", spec.delta},
                {"horizon", spec.horizon},
                {"domain", json{{"lower", spec.domain_lower}, {"upper", spec.domain_upper}}},
                {"granularity", spec.granularity},
                {"initial", box_to_json(spec.initial)},
                {"goal", box_to_json(spec.goal)},
                {"unsafe", unsafe},
                {"aggregation", spec.aggregation},
                {"partitions", spec.partitions},
                {"strict_domain", spec.strict_domain},
                {"solver", json{{"taylor_order", spec.solver.taylor_order},
                                {"max_enclosure_attempts", spec.solver.max_enclosure_attempts},
                                {"max_substeps", spec.solver.max_substeps},
                                {"min_step_divisor", spec.solver.min_step_divisor}}}};
}

inline SystemSpec load_spec(const std::string& path)
{
    return spec_from_json(load_json_file(path));
}

// Policy document; the grid embedded in the file is the authoritative grid.
inline Policy policy_from_json(const json& j)
{
    const std::string ctx = "policy";
    const std::string type = detail::require(j, "type", ctx).get<std::string>();
    AbstractionGrid grid = grid_from_json(detail::require(j, "grid", ctx), ctx + ".grid");

    if (type == "table") {
        TablePolicy table;
        table.grid = std::move(grid);
        table.default_action = detail::double_list(j, "default_action", ctx);
        const json& actions = detail::require(j, "actions", ctx);
        if (!actions.is_object())
            throw SpecError("policy: field 'actions' must map cell ids to action arrays");
        for (const auto& [key, value] : actions.items()) {
            CellId id;
            std::size_t pos = 0;
            while (pos <= key.size()) {
                const std::size_t comma = key.find(',', pos);
                const std::string part =
                    key.substr(pos, comma == std::string::npos ? comma : comma - pos);
                try {
                    id.index.push_back(std::stoll(part));
                } catch (const std::exception&) {
                    throw SpecError("policy: bad cell id key '" + key + "'");
                }
                if (comma == std::string::npos)
                    break;
                pos = comma + 1;
            }
            if (!value.is_array())
                throw SpecError("policy: action for cell '" + key + "' must be an array");
            std::vector<double> a;
            for (const auto& v : value)
                a.push_back(v.get<double>());
            table.actions.emplace(std::move(id), std::move(a));
        }
        return Policy(std::move(table));
    }

    if (type == "ann") {
        AnnPolicy ann;
        ann.grid = std::move(grid);
        const std::string act = detail::require(j, "activation", ctx).get<std::string>();
        if (act == "tanh")
            ann.activation = Activation::Tanh;
        else if (act == "relu")
            ann.activation = Activation::Relu;
        else
            throw SpecError("policy: unknown activation '" + act + "'");
        const std::string out =
            detail::require(j, "output_activation", ctx).get<std::string>();
        if (out == "tanh")
            ann.output_activation = OutputActivation::Tanh;
        else if (out == "identity")
            ann.output_activation = OutputActivation::Identity;
        else
            throw SpecError("policy: unknown output_activation '" + out + "'");
        ann.action_scale = detail::double_list(j, "action_scale", ctx);
        const json& layers = detail::require(j, "layers", ctx);
        if (!layers.is_array() || layers.empty())
            throw SpecError("policy: field 'layers' must be a non-empty array");
        for (const auto& lj : layers) {
            DenseLayer layer;
            const json& w = detail::require(lj, "weights", ctx + ".layers");
            for (const auto& row : w) {
                std::vector<double> r;
                for (const auto& v : row)
                    r.push_back(v.get<double>());
                layer.weights.push_back(std::move(r));
            }
            layer.bias = detail::double_list(lj, "bias", ctx + ".layers");
            ann.layers.push_back(std::move(layer));
        }
        return Policy(std::move(ann));
    }

    throw SpecError("policy: unknown type '" + type + "' (expected \"ann\" or \"table\")");
}

inline json policy_to_json(const Policy& policy)
{
    if (policy.is_table()) {
        const TablePolicy& table = policy.table();
        json actions = json::object();
        for (const auto& [id, a] : table.actions)
            actions[id.key()] = a;
        return json{{"type", "table"},
                    {"grid", grid_to_json(table.grid)},
                    {"actions", actions},
                    {"default_action", table.default_action}};
    }
    const AnnPolicy& ann = policy.ann();
    json layers = json::array();
    for (const auto& layer : ann.layers)
        layers.push_back(json{{"weights", layer.weights}, {"bias", layer.bias}});
    return json{{"type", "ann"},
                {"grid", grid_to_json(ann.grid)},
                {"layers", layers},
                {"activation", ann.activation == Activation::Tanh ? "tanh" : "relu"},
                {"output_activation",
                 ann.output_activation == OutputActivation::Tanh ? "tanh" : "identity"},
                {"action_scale", ann.action_scale}};
}

inline Policy load_policy(const std::string& path)
{
    return policy_from_json(load_json_file(path));
}

inline std::string policy_text(const Policy& policy)
{
    return policy_to_json(policy).dump(2) + "\n";
}

inline void save_policy(const std::string& path, const Policy& policy)
{
    write_text_file(path, policy_text(policy));
}

inline std::string spec_digest(const SystemSpec& spec)
{
    return fnv1a_hex(spec_to_json(spec).dump());
}

inline std::string policy_digest(const Policy& policy)
{
    return fnv1a_hex(policy_to_json(policy).dump());
}

// Flowpipe CSV: step,kind,box_index,l1,u1,...,ln,un. Step rows carry X_t;
// tube rows carry the enclosure of the flow into step t (time [(t-1)d, t*d]).
inline std::string flowpipe_csv(const FlowPipe& pipe, std::size_t dim)
{
    std::ostringstream out;
    out << "step,kind,box_index";
    for (std::size_t i = 1; i <= dim; ++i)
        out << ",l" << i << ",u" << i;
    out << "\n";
    const auto row = [&](std::size_t step, const char* kind, std::size_t index,
                         const IntervalBox& box) {
        out << step << ',' << kind << ',' << index;
        for (std::size_t i = 0; i < box.dim(); ++i)
            out << ',' << format_double(box[i].lo) << ',' << format_double(box[i].hi);
        out << "\n";
    };
    for (std::size_t t = 0; t < pipe.steps.size(); ++t)
        for (std::size_t b = 0; b < pipe.steps[t].size(); ++b)
            row(t, "step", b, pipe.steps[t][b]);
    for (std::size_t t = 0; t < pipe.tubes.size(); ++t)
        for (std::size_t b = 0; b < pipe.tubes[t].size(); ++b)
            row(t + 1, "tube", b, pipe.tubes[t][b]);
    return out.str();
}

inline std::string trajectories_csv(
    const std::vector<std::vector<std::vector<double>>>& trajectories, std::size_t dim)
{
    std::ostringstream out;
    out << "traj_id,step";
    for (std::size_t i = 1; i <= dim; ++i)
        out << ",x" << i;
    out << "\n";
    for (std::size_t id = 0; id < trajectories.size(); ++id) {
        for (std::size_t t = 0; t < trajectories[id].size(); ++t) {
            out << id << ',' << t;
            for (double v : trajectories[id][t])
                out << ',' << format_double(v);
            out << "\n";
        }
    }
    return out.str();
}

inline std::string curve_csv(const std::vector<SynthCurvePoint>& curve)
{
    std::ostringstream out;
    out << "iteration,mean_reward,elite_mean,best_reward\n";
    for (const auto& p : curve)
        out << p.iteration << ',' << format_double(p.mean_reward) << ','
            << format_double(p.elite_mean) << ',' << format_double(p.best_reward) << "\n";
    return out.str();
}

inline json verdict_to_json(const Verdict& v)
{
    json j{{"verdict", to_string(v.kind)},
           {"goal_step", v.goal_step},
           {"unsafe_step", v.unsafe_step},
           {"reason", v.reason}};
    if (v.unsafe_box)
        j["unsafe_box"] = box_to_json(*v.unsafe_box);
    return j;
}

inline json summary_to_json(const ParallelResult& result, double wall_ms)
{
    json parts = json::array();
    for (const auto& p : result.partitions) {
        json boxes_per_step = json::array();
        for (const auto& step : p.pipe.steps)
            boxes_per_step.push_back(step.size());
        parts.push_back(json{{"initial", box_to_json(p.region)},
                             {"verdict", verdict_to_json(p.verdict)},
                             {"boxes_per_step", boxes_per_step},
                             {"out_of_domain_boxes", p.pipe.meta.out_of_domain}});
    }
    json combined = verdict_to_json(result.combined);
    combined["wall_time_ms"] = wall_ms;
    json boxes_per_step = json::array();
    if (!result.partitions.empty()) {
        std::size_t max_len = 0;
        for (const auto& p : result.partitions)
            max_len = std::max(max_len, p.pipe.steps.size());
        for (std::size_t t = 0; t < max_len; ++t) {
            std::size_t total = 0;
            for (const auto& p : result.partitions)
                if (t < p.pipe.steps.size())
                    total += p.pipe.steps[t].size();
            boxes_per_step.push_back(total);
        }
    }
    combined["boxes_per_step"] = boxes_per_step;
    combined["partitions"] = parts;
    return combined;
}

// SVG projection of the flowpipe onto dimensions (px, py), 0-based. One rect
// per flowpipe CSV row plus one per goal/unsafe region; colors follow the
// usual encoding (red reachable sets, blue goal, purple unsafe).
inline std::string flowpipe_svg(const std::vector<const FlowPipe*>& pipes,
                                const SystemSpec& spec, std::size_t px, std::size_t py)
{
    double min_x = spec.domain_lower[px], max_x = spec.domain_upper[px];
    double min_y = spec.domain_lower[py], max_y = spec.domain_upper[py];
    const auto widen_bounds = [&](const IntervalBox& box) {
        min_x = std::min(min_x, box[px].lo);
        max_x = std::max(max_x, box[px].hi);
        min_y = std::min(min_y, box[py].lo);
        max_y = std::max(max_y, box[py].hi);
    };
    for (const FlowPipe* pipe : pipes) {
        for (const auto& step : pipe->steps)
            for (const auto& box : step)
                widen_bounds(box);
        for (const auto& tube : pipe->tubes)
            for (const auto& box : tube)
                widen_bounds(box);
    }

    const double span_x = max_x - min_x;
    const double span_y = max_y - min_y;
    const double scale = 720.0 / std::max(span_x, span_y);
    const double pad = 40.0;
    const auto sx = [&](double x) { return pad + (x - min_x) * scale; };
    const auto sy = [&](double y) { return pad + (max_y - y) * scale; };

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
        << format_double(2 * pad + span_x * scale) << "\" height=\""
        << format_double(2 * pad + span_y * scale) << "\">\n";

    const auto rect = [&](const IntervalBox& box, const char* fill, const char* stroke,
                          double opacity) {
        out << "  <rect x=\"" << format_double(sx(box[px].lo)) << "\" y=\""
            << format_double(sy(box[py].hi)) << "\" width=\""
            << format_double(box[px].width() * scale) << "\" height=\""
            << format_double(box[py].width() * scale) << "\" fill=\"" << fill
            << "\" fill-opacity=\"" << format_double(opacity) << "\" stroke=\"" << stroke
            << "\" stroke-width=\"1\"/>\n";
    };

    rect(spec.goal, "#1f4fd8", "#1f4fd8", 0.25);
    for (const auto& u : spec.unsafe)
        rect(u, "#800080", "#800080", 0.35);
    for (const FlowPipe* pipe : pipes) {
        for (const auto& tube : pipe->tubes)
            for (const auto& box : tube)
                rect(box, "#ff9999", "#ff9999", 0.10);
        for (const auto& step : pipe->steps)
            for (const auto& box : step)
                rect(box, "#d82f2f", "#d82f2f", 0.20);
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace bbreach::io

#endif
