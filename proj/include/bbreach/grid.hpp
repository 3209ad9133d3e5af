#ifndef BBREACH_GRID_HPP
#define BBREACH_GRID_HPP

#include <cmath>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bbreach/interval.hpp"

namespace bbreach {

// Per-dimension cell ordinals; the canonical key for table policies.
struct CellId {
    std::vector<std::int64_t> index;

    auto operator<=>(const CellId&) const = default;

    std::string key() const
    {
        std::string s;
        for (std::size_t i = 0; i < index.size(); ++i) {
            if (i)
                s += ',';
            s += std::to_string(index[i]);
        }
        return s;
    }
};

// Uniform grid over [L, U] with per-dimension cell widths gamma. Cells are
// half-open [l, u) except that U itself belongs to the last cell; out-of-range
// coordinates clamp to the nearest boundary cell.
class AbstractionGrid {
public:
    // Cell assignment snaps (x-L)/d to the grid so decimal multiples of the
    // granularity land deterministically.
    static constexpr double kSnap = 1e-12;

    AbstractionGrid() = default;
    AbstractionGrid(std::vector<double> lower, std::vector<double> upper,
                    std::vector<double> granularity)
        : lower_(std::move(lower)), upper_(std::move(upper)), gran_(std::move(granularity))
    {
        if (lower_.empty() || lower_.size() != upper_.size() || lower_.size() != gran_.size())
            throw DimensionMismatch("grid bounds/granularity size mismatch");
        cells_.resize(lower_.size());
        even_.resize(lower_.size());
        for (std::size_t i = 0; i < lower_.size(); ++i) {
            if (!(lower_[i] < upper_[i]))
                throw DomainError("grid requires lower < upper in every dimension");
            if (!(gran_[i] > 0.0))
                throw DomainError("grid granularity must be positive");
            const double span = upper_[i] - lower_[i];
            const auto full = static_cast<std::int64_t>(std::floor(span / gran_[i] + kSnap));
            const double rem = span - static_cast<double>(full) * gran_[i];
            even_[i] = rem <= kSnap * (1.0 + span);
            cells_[i] = even_[i] ? std::max<std::int64_t>(full, 1) : full + 1;
        }
    }

    std::size_t dim() const { return lower_.size(); }
    const std::vector<double>& lower() const { return lower_; }
    const std::vector<double>& upper() const { return upper_; }
    const std::vector<double>& granularity() const { return gran_; }
    std::int64_t cells(std::size_t i) const { return cells_[i]; }

    bool operator==(const AbstractionGrid& o) const
    {
        return lower_ == o.lower_ && upper_ == o.upper_ && gran_ == o.gran_;
    }

    std::int64_t cell_index(std::size_t i, double x) const
    {
        const auto raw =
            static_cast<std::int64_t>(std::floor((x - lower_[i]) / gran_[i] + kSnap));
        return std::clamp<std::int64_t>(raw, 0, cells_[i] - 1);
    }

    // Grid line j in dimension i (j = 0..cells). When the domain divides
    // evenly, interpolating against U keeps boundaries on the decimal lattice
    // (L + j*d can land one ulp off values like 0.3); otherwise fall back to
    // the direct formula with the last cell truncated at U.
    double boundary(std::size_t i, std::int64_t j) const
    {
        if (j <= 0)
            return lower_[i];
        if (j >= cells_[i])
            return upper_[i];
        if (even_[i])
            return lower_[i] + ((upper_[i] - lower_[i]) * static_cast<double>(j)) /
                                   static_cast<double>(cells_[i]);
        return lower_[i] + static_cast<double>(j) * gran_[i];
    }

    double phi_lower(std::size_t i, double x) const { return boundary(i, cell_index(i, x)); }
    double phi_upper(std::size_t i, double x) const { return boundary(i, cell_index(i, x) + 1); }

    CellId cell_of(std::span<const double> s) const
    {
        require_dim(s.size());
        CellId id;
        id.index.resize(dim());
        for (std::size_t i = 0; i < dim(); ++i)
            id.index[i] = cell_index(i, s[i]);
        return id;
    }

    IntervalBox cell_box(const CellId& id) const
    {
        require_dim(id.index.size());
        std::vector<Interval> dims;
        dims.reserve(dim());
        for (std::size_t i = 0; i < dim(); ++i)
            dims.emplace_back(boundary(i, id.index[i]), boundary(i, id.index[i] + 1));
        return IntervalBox(std::move(dims));
    }

    // The unique cell containing s under the half-open convention.
    IntervalBox abstract_state(std::span<const double> s) const
    {
        return cell_box(cell_of(s));
    }

    bool in_domain(std::span<const double> s) const
    {
        require_dim(s.size());
        for (std::size_t i = 0; i < dim(); ++i)
            if (s[i] < lower_[i] || s[i] > upper_[i])
                return false;
        return true;
    }

    bool in_domain(const IntervalBox& box) const
    {
        require_dim(box.dim());
        for (std::size_t i = 0; i < dim(); ++i)
            if (box[i].lo < lower_[i] || box[i].hi > upper_[i])
                return false;
        return true;
    }

    // Split box along grid lines so each piece carries one cell's action.
    // Geometry is preserved even when the box leaves [L, U]: only the cell
    // assignment clamps, so overhang stays attached to the boundary cells.
    // Sliver pieces thinner than kSliver are dropped unless the input itself
    // is that thin in the dimension. Pieces come out in lexicographic
    // cell-id order.
    static constexpr double kSliver = 1e-12;

    std::vector<IntervalBox> segment(const IntervalBox& box) const
    {
        require_dim(box.dim());
        std::vector<std::vector<Interval>> slices(dim());
        for (std::size_t i = 0; i < dim(); ++i) {
            const double lo = box[i].lo;
            const double hi = box[i].hi;
            std::vector<double> edges;
            edges.push_back(lo);
            // cut at every grid line strictly inside (lo, hi); the candidate
            // range is bounded without the assignment snap so the cut set
            // depends only on the grid, not on how close an endpoint sits to
            // a line (keeps pieces of nested boxes nested)
            const auto raw_index = [&](double x) {
                return std::clamp<std::int64_t>(
                    static_cast<std::int64_t>(std::floor((x - lower_[i]) / gran_[i])), 0,
                    cells_[i] - 1);
            };
            const std::int64_t jlo = raw_index(lo);
            const std::int64_t jhi = raw_index(hi);
            for (std::int64_t j = std::max<std::int64_t>(jlo, 1);
                 j <= std::min<std::int64_t>(jhi + 1, cells_[i] - 1); ++j) {
                const double c = boundary(i, j);
                if (c > lo && c < hi)
                    edges.push_back(c);
            }
            edges.push_back(hi);
            auto& out = slices[i];
            for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
                const double w = edges[e + 1] - edges[e];
                if (w < kSliver && box[i].width() >= kSliver)
                    continue;
                out.emplace_back(edges[e], edges[e + 1]);
            }
            if (out.empty())
                out.emplace_back(lo, hi);
        }

        std::vector<IntervalBox> pieces;
        std::vector<std::size_t> cursor(dim(), 0);
        for (;;) {
            std::vector<Interval> dims;
            dims.reserve(dim());
            for (std::size_t i = 0; i < dim(); ++i)
                dims.push_back(slices[i][cursor[i]]);
            pieces.emplace_back(std::move(dims));
            std::size_t i = dim();
            while (i > 0) {
                --i;
                if (++cursor[i] < slices[i].size())
                    break;
                cursor[i] = 0;
                if (i == 0)
                    return pieces;
            }
        }
    }

private:
    void require_dim(std::size_t n) const
    {
        if (n != dim())
            throw DimensionMismatch("grid dimension mismatch");
    }

    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<double> gran_;
    std::vector<std::int64_t> cells_;
    std::vector<bool> even_;
};

}  // namespace bbreach

#endif
