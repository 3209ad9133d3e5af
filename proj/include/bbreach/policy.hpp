#ifndef BBREACH_POLICY_HPP
#define BBREACH_POLICY_HPP

#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bbreach/grid.hpp"
#include "bbreach/interval.hpp"

namespace bbreach {

class PolicyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Activation { Tanh, Relu };
enum class OutputActivation { Tanh, Identity };

struct DenseLayer {
    std::vector<std::vector<double>> weights;  // row-major, rows = outputs
    std::vector<double> bias;
};

// Plain MLP forward pass in 64-bit arithmetic; hidden activation on every
// layer but the last, output activation plus per-dimension scale on the last.
inline std::vector<double> dense_forward(const std::vector<DenseLayer>& layers,
                                         std::vector<double> input, Activation hidden,
                                         OutputActivation output,
                                         std::span<const double> scale)
{
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const DenseLayer& layer = layers[l];
        std::vector<double> next(layer.weights.size());
        for (std::size_t r = 0; r < layer.weights.size(); ++r) {
            double acc = 0.0;
            const auto& row = layer.weights[r];
            for (std::size_t c = 0; c < row.size(); ++c)
                acc += row[c] * input[c];
            next[r] = acc + layer.bias[r];
        }
        if (l + 1 < layers.size()) {
            for (double& v : next)
                v = hidden == Activation::Tanh ? std::tanh(v) : std::max(v, 0.0);
        } else {
            for (std::size_t r = 0; r < next.size(); ++r) {
                if (output == OutputActivation::Tanh)
                    next[r] = std::tanh(next[r]);
                next[r] *= scale[r];
            }
        }
        input = std::move(next);
    }
    return input;
}

// MLP preceded by the interval abstraction: the network sees the cell bounds
// (l1,u1,...,ln,un) of the input state, so it is constant on every cell. The
// abstraction layer is evaluated functionally rather than as frozen
// floor-activation edges; the outputs are identical.
struct AnnPolicy {
    AbstractionGrid grid;
    std::vector<DenseLayer> layers;
    Activation activation = Activation::Tanh;
    OutputActivation output_activation = OutputActivation::Tanh;
    std::vector<double> action_scale;

    void validate() const
    {
        if (layers.empty())
            throw PolicyError("ann policy needs at least one layer");
        std::size_t width = 2 * grid.dim();
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const auto& layer = layers[l];
            if (layer.weights.empty())
                throw PolicyError("layer " + std::to_string(l) + " has no rows");
            for (const auto& row : layer.weights)
                if (row.size() != width)
                    throw PolicyError("layer " + std::to_string(l) +
                                      " weight row width mismatch: expected " +
                                      std::to_string(width) + ", got " +
                                      std::to_string(row.size()));
            if (layer.bias.size() != layer.weights.size())
                throw PolicyError("layer " + std::to_string(l) + " bias size mismatch");
            width = layer.weights.size();
        }
        if (action_scale.size() != width)
            throw PolicyError("action_scale size mismatch with last layer");
    }

    std::vector<double> action(std::span<const double> s) const
    {
        std::vector<double> abstracted(2 * grid.dim());
        for (std::size_t i = 0; i < grid.dim(); ++i) {
            abstracted[2 * i] = grid.phi_lower(i, s[i]);
            abstracted[2 * i + 1] = grid.phi_upper(i, s[i]);
        }
        return dense_forward(layers, std::move(abstracted), activation, output_activation,
                             action_scale);
    }

    std::size_t action_dim() const { return action_scale.size(); }
};

struct TablePolicy {
    AbstractionGrid grid;
    std::map<CellId, std::vector<double>> actions;
    std::vector<double> default_action;

    void validate() const
    {
        if (default_action.empty())
            throw PolicyError("table policy needs a default_action");
        for (const auto& [id, a] : actions) {
            if (id.index.size() != grid.dim())
                throw PolicyError("table cell id dimension mismatch");
            if (a.size() != default_action.size())
                throw PolicyError("table action dimension mismatch at cell " + id.key());
        }
    }

    std::vector<double> action(std::span<const double> s) const
    {
        const auto it = actions.find(grid.cell_of(s));
        return it != actions.end() ? it->second : default_action;
    }

    std::size_t action_dim() const { return default_action.size(); }
};

// Black-box action oracle; both representations are constant per grid cell.
class Policy {
public:
    Policy() = default;
    explicit Policy(AnnPolicy ann) : impl_(std::move(ann))
    {
        std::get<AnnPolicy>(impl_).validate();
    }
    explicit Policy(TablePolicy table) : impl_(std::move(table))
    {
        std::get<TablePolicy>(impl_).validate();
    }

    bool is_table() const { return std::holds_alternative<TablePolicy>(impl_); }
    const AnnPolicy& ann() const { return std::get<AnnPolicy>(impl_); }
    const TablePolicy& table() const { return std::get<TablePolicy>(impl_); }

    const AbstractionGrid& grid() const
    {
        return is_table() ? table().grid : ann().grid;
    }

    std::size_t action_dim() const
    {
        return is_table() ? table().action_dim() : ann().action_dim();
    }

    std::vector<double> action(std::span<const double> s) const
    {
        return is_table() ? table().action(s) : ann().action(s);
    }

    // Action for a segmented piece, queried at its midpoint; by per-cell
    // constancy this is the action of every interior state of the piece.
    std::vector<double> action_for_cell(const IntervalBox& piece) const
    {
        return action(piece.midpoint());
    }

private:
    std::variant<AnnPolicy, TablePolicy> impl_;
};

}  // namespace bbreach

#endif
