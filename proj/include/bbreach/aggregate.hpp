#ifndef BBREACH_AGGREGATE_HPP
#define BBREACH_AGGREGATE_HPP

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <deque>
#include <numeric>
#include <span>
#include <vector>

#include "bbreach/interval.hpp"

namespace bbreach {

enum class AdjacencyRelation { Inclusion, Intersection, Separation, NotAdjacent };

namespace detail {

// Comparisons carry a small slack so decimal thresholds behave as printed
// (|0.3 - 0.32| must count as <= 0.02). Extra slack only merges more, which
// is sound.
constexpr double kAdjacencySlack = 1e-9;

inline bool leq(double a, double b) { return a <= b + kAdjacencySlack; }

inline bool aligned(const Interval& a, const Interval& b, double h)
{
    return leq(std::fabs(a.lo - b.lo), h) && leq(std::fabs(a.hi - b.hi), h);
}

inline bool interleaved(const Interval& a, const Interval& b)
{
    return (leq(b.lo, a.lo) && leq(a.lo, b.hi) && leq(b.hi, a.hi)) ||
           (leq(a.lo, b.lo) && leq(b.lo, a.hi) && leq(a.hi, b.hi));
}

// True gap of bounded size between the boxes in this dimension.
inline bool gapped(const Interval& a, const Interval& b, double h)
{
    const double g1 = a.lo - b.hi;
    const double g2 = b.lo - a.hi;
    return (g1 >= -kAdjacencySlack && leq(g1, h)) || (g2 >= -kAdjacencySlack && leq(g2, h));
}

inline bool contained(const IntervalBox& inner, const IntervalBox& outer)
{
    for (std::size_t i = 0; i < inner.dim(); ++i)
        if (!(leq(outer[i].lo, inner[i].lo) && leq(inner[i].hi, outer[i].hi)))
            return false;
    return true;
}

}  // namespace detail

// Adjacency of two boxes under the distance threshold h. A witness dimension
// d satisfying the interleaving order (Intersection) or a bounded gap
// (Separation) must come with every other dimension aligned within h.
inline AdjacencyRelation classify(const IntervalBox& a, const IntervalBox& b,
                                  std::span<const double> h)
{
    a.require_dim(b.dim());
    if (h.size() != a.dim())
        throw DimensionMismatch("adjacency threshold dimension mismatch");

    if (detail::contained(a, b) || detail::contained(b, a))
        return AdjacencyRelation::Inclusion;

    const auto others_aligned = [&](std::size_t d) {
        for (std::size_t i = 0; i < a.dim(); ++i)
            if (i != d && !detail::aligned(a[i], b[i], h[i]))
                return false;
        return true;
    };

    for (std::size_t d = 0; d < a.dim(); ++d)
        if (detail::interleaved(a[d], b[d]) && others_aligned(d))
            return AdjacencyRelation::Intersection;

    for (std::size_t d = 0; d < a.dim(); ++d)
        if (detail::gapped(a[d], b[d], h[d]) && others_aligned(d))
            return AdjacencyRelation::Separation;

    return AdjacencyRelation::NotAdjacent;
}

// Replace every connected group of adjacent boxes by its interval hull,
// breadth-first from each unvisited box. Input order does not matter: boxes
// are sorted first, and the output comes out sorted by lower corner.
inline std::vector<IntervalBox> aggregate(std::vector<IntervalBox> boxes,
                                          std::span<const double> h)
{
    if (boxes.size() <= 1)
        return boxes;
    std::sort(boxes.begin(), boxes.end(), lex_less);

    const std::size_t n = boxes.size();
    std::vector<std::vector<std::uint32_t>> adjacent(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (classify(boxes[i], boxes[j], h) != AdjacencyRelation::NotAdjacent) {
                adjacent[i].push_back(static_cast<std::uint32_t>(j));
                adjacent[j].push_back(static_cast<std::uint32_t>(i));
            }

    std::vector<bool> visited(n, false);
    std::vector<IntervalBox> out;
    for (std::size_t p = 0; p < n; ++p) {
        if (visited[p])
            continue;
        visited[p] = true;
        IntervalBox acc = boxes[p];
        std::deque<std::size_t> queue{p};
        while (!queue.empty()) {
            const std::size_t i = queue.front();
            queue.pop_front();
            for (const std::uint32_t j : adjacent[i]) {
                acc = hull(acc, boxes[j]);
                if (!visited[j]) {
                    visited[j] = true;
                    queue.push_back(j);
                }
            }
        }
        out.push_back(std::move(acc));
    }
    std::sort(out.begin(), out.end(), lex_less);

#ifndef NDEBUG
    for (const auto& box : boxes) {
        bool covered = false;
        for (const auto& agg : out)
            covered = covered || agg.contains(box);
        assert(covered && "aggregation lost an input box");
    }
#endif
    return out;
}

}  // namespace bbreach

#endif
