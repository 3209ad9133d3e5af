#ifndef BBREACH_INTERVAL_HPP
#define BBREACH_INTERVAL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bbreach {

class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline double next_down(double x)
{
    return std::nextafter(x, -std::numeric_limits<double>::infinity());
}

inline double next_up(double x)
{
    return std::nextafter(x, std::numeric_limits<double>::infinity());
}

// Closed interval [lo, hi] with finite endpoints. Arithmetic emulates
// outward rounding by widening each result endpoint by one ulp.
struct Interval {
    double lo;
    double hi;

    Interval() : lo(0), hi(0) {}
    explicit Interval(double v) : Interval(v, v) {}
    Interval(double l, double h) : lo(l), hi(h)
    {
        if (!(std::isfinite(lo) && std::isfinite(hi)))
            throw DomainError("interval endpoint not finite");
        if (lo > hi)
            throw DomainError("interval lower bound exceeds upper bound");
    }

    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    double mag() const { return std::max(std::fabs(lo), std::fabs(hi)); }

    bool contains(double x) const { return lo <= x && x <= hi; }
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
    bool contains_zero() const { return lo <= 0.0 && 0.0 <= hi; }

    bool operator==(const Interval& o) const = default;
};

// One-ulp outward widening applied to every rounded arithmetic result.
inline Interval outward(double lo, double hi)
{
    return Interval(next_down(lo), next_up(hi));
}

inline Interval operator-(const Interval& a)
{
    return Interval(-a.hi, -a.lo);  // exact
}

inline Interval operator+(const Interval& a, const Interval& b)
{
    return outward(a.lo + b.lo, a.hi + b.hi);
}

inline Interval operator-(const Interval& a, const Interval& b)
{
    return outward(a.lo - b.hi, a.hi - b.lo);
}

inline Interval operator*(const Interval& a, const Interval& b)
{
    const double p1 = a.lo * b.lo;
    const double p2 = a.lo * b.hi;
    const double p3 = a.hi * b.lo;
    const double p4 = a.hi * b.hi;
    return outward(std::min(std::min(p1, p2), std::min(p3, p4)),
                   std::max(std::max(p1, p2), std::max(p3, p4)));
}

inline Interval operator/(const Interval& a, const Interval& b)
{
    if (b.contains_zero())
        throw DomainError("interval division by interval containing zero");
    const double q1 = a.lo / b.lo;
    const double q2 = a.lo / b.hi;
    const double q3 = a.hi / b.lo;
    const double q4 = a.hi / b.hi;
    return outward(std::min(std::min(q1, q2), std::min(q3, q4)),
                   std::max(std::max(q1, q2), std::max(q3, q4)));
}

inline Interval operator+(const Interval& a, double b) { return a + Interval(b); }
inline Interval operator+(double a, const Interval& b) { return Interval(a) + b; }
inline Interval operator-(const Interval& a, double b) { return a - Interval(b); }
inline Interval operator-(double a, const Interval& b) { return Interval(a) - b; }
inline Interval operator*(const Interval& a, double b) { return a * Interval(b); }
inline Interval operator*(double a, const Interval& b) { return Interval(a) * b; }
inline Interval operator/(const Interval& a, double b) { return a / Interval(b); }

inline Interval hull(const Interval& a, const Interval& b)
{
    return Interval(std::min(a.lo, b.lo), std::max(a.hi, b.hi));  // exact
}

inline std::optional<Interval> intersect(const Interval& a, const Interval& b)
{
    const double lo = std::max(a.lo, b.lo);
    const double hi = std::min(a.hi, b.hi);
    if (lo > hi)
        return std::nullopt;
    return Interval(lo, hi);  // exact
}

// x^2 with the sign tightening (never negative).
inline Interval sqr(const Interval& x)
{
    const double m = x.mag();
    double lo = 0.0;
    if (!x.contains_zero()) {
        const double s = std::min(std::fabs(x.lo), std::fabs(x.hi));
        lo = next_down(s * s);
        if (lo < 0.0)
            lo = 0.0;
    }
    return Interval(lo, next_up(m * m));
}

// Non-negative integer power, evaluated from the endpoint monotonicity of
// x^n (odd) and |x|^n (even).
inline Interval pow_int(const Interval& x, int n)
{
    if (n < 0)
        throw DomainError("negative integer exponent");
    if (n == 0)
        return Interval(1.0);
    if (n == 1)
        return x;
    if (n == 2)
        return sqr(x);
    if (n % 2 != 0)
        return outward(std::pow(x.lo, n), std::pow(x.hi, n));
    const double big = std::pow(x.mag(), n);
    if (x.contains_zero())
        return Interval(0.0, next_up(big));
    const double small = std::pow(std::min(std::fabs(x.lo), std::fabs(x.hi)), n);
    return Interval(std::max(0.0, next_down(small)), next_up(big));
}

inline Interval exp(const Interval& x)
{
    const double lo = next_down(std::exp(x.lo));
    const double hi = next_up(std::exp(x.hi));
    if (!std::isfinite(hi))
        throw DomainError("interval exp overflow");
    return Interval(std::max(lo, 0.0), hi);
}

inline Interval sqrt(const Interval& x)
{
    if (x.lo < 0.0)
        throw DomainError("interval sqrt of negative range");
    return Interval(std::max(0.0, next_down(std::sqrt(x.lo))), next_up(std::sqrt(x.hi)));
}

inline Interval tanh(const Interval& x)
{
    return Interval(std::max(-1.0, next_down(std::tanh(x.lo))),
                    std::min(1.0, next_up(std::tanh(x.hi))));
}

namespace detail {

// Does [lo, hi] contain c + 2*pi*k for some integer k? Errs toward
// containment so trig ranges stay sound near period boundaries.
inline bool contains_period_point(double lo, double hi, double c)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double slack = 1e-9 * (1.0 + std::fabs(lo) + std::fabs(hi));
    const double k = std::floor((lo - c) / two_pi);
    for (int j = 0; j <= 2; ++j) {
        const double p = c + (k + j) * two_pi;
        if (p >= lo - slack && p <= hi + slack)
            return true;
    }
    return false;
}

}  // namespace detail

inline Interval sin(const Interval& x)
{
    constexpr double pi = std::numbers::pi;
    if (x.width() >= 2.0 * pi)
        return Interval(-1.0, 1.0);
    const double sa = std::sin(x.lo);
    const double sb = std::sin(x.hi);
    double lo = next_down(std::min(sa, sb));
    double hi = next_up(std::max(sa, sb));
    if (detail::contains_period_point(x.lo, x.hi, pi / 2.0))
        hi = 1.0;
    if (detail::contains_period_point(x.lo, x.hi, -pi / 2.0))
        lo = -1.0;
    return Interval(std::max(lo, -1.0), std::min(hi, 1.0));
}

inline Interval cos(const Interval& x)
{
    constexpr double pi = std::numbers::pi;
    if (x.width() >= 2.0 * pi)
        return Interval(-1.0, 1.0);
    const double ca = std::cos(x.lo);
    const double cb = std::cos(x.hi);
    double lo = next_down(std::min(ca, cb));
    double hi = next_up(std::max(ca, cb));
    if (detail::contains_period_point(x.lo, x.hi, 0.0))
        hi = 1.0;
    if (detail::contains_period_point(x.lo, x.hi, pi))
        lo = -1.0;
    return Interval(std::max(lo, -1.0), std::min(hi, 1.0));
}

// Axis-aligned box: one interval per state dimension.
class IntervalBox {
public:
    IntervalBox() = default;
    explicit IntervalBox(std::vector<Interval> dims) : dims_(std::move(dims))
    {
        if (dims_.empty())
            throw DimensionMismatch("interval box needs at least one dimension");
    }
    IntervalBox(std::span<const double> lower, std::span<const double> upper)
    {
        if (lower.size() != upper.size() || lower.empty())
            throw DimensionMismatch("interval box bounds size mismatch");
        dims_.reserve(lower.size());
        for (std::size_t i = 0; i < lower.size(); ++i)
            dims_.emplace_back(lower[i], upper[i]);
    }

    std::size_t dim() const { return dims_.size(); }
    const Interval& operator[](std::size_t i) const { return dims_[i]; }
    Interval& operator[](std::size_t i) { return dims_[i]; }
    const std::vector<Interval>& dims() const { return dims_; }

    std::vector<double> midpoint() const
    {
        std::vector<double> m(dims_.size());
        for (std::size_t i = 0; i < dims_.size(); ++i)
            m[i] = dims_[i].mid();
        return m;
    }

    double volume() const
    {
        double v = 1.0;
        for (const auto& d : dims_)
            v *= d.width();
        return v;
    }

    bool contains(std::span<const double> point) const
    {
        require_dim(point.size());
        for (std::size_t i = 0; i < dims_.size(); ++i)
            if (!dims_[i].contains(point[i]))
                return false;
        return true;
    }

    bool contains(const IntervalBox& o) const
    {
        require_dim(o.dim());
        for (std::size_t i = 0; i < dims_.size(); ++i)
            if (!dims_[i].contains(o.dims_[i]))
                return false;
        return true;
    }

    bool operator==(const IntervalBox& o) const = default;

    void require_dim(std::size_t n) const
    {
        if (dims_.size() != n)
            throw DimensionMismatch("dimension mismatch: expected " +
                                    std::to_string(dims_.size()) + ", got " +
                                    std::to_string(n));
    }

private:
    std::vector<Interval> dims_;
};

inline IntervalBox hull(const IntervalBox& a, const IntervalBox& b)
{
    a.require_dim(b.dim());
    std::vector<Interval> out;
    out.reserve(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i)
        out.push_back(hull(a[i], b[i]));
    return IntervalBox(std::move(out));
}

inline std::optional<IntervalBox> intersect(const IntervalBox& a, const IntervalBox& b)
{
    a.require_dim(b.dim());
    std::vector<Interval> out;
    out.reserve(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) {
        auto iv = intersect(a[i], b[i]);
        if (!iv)
            return std::nullopt;
        out.push_back(*iv);
    }
    return IntervalBox(std::move(out));
}

inline bool boxes_intersect(const IntervalBox& a, const IntervalBox& b)
{
    a.require_dim(b.dim());
    for (std::size_t i = 0; i < a.dim(); ++i)
        if (std::max(a[i].lo, b[i].lo) > std::min(a[i].hi, b[i].hi))
            return false;
    return true;
}

// Each endpoint moved outward by eps plus one ulp.
inline Interval inflate(const Interval& x, double eps)
{
    if (eps < 0.0)
        throw DomainError("inflate needs eps >= 0");
    return Interval(next_down(x.lo - eps), next_up(x.hi + eps));
}

inline IntervalBox inflate(const IntervalBox& box, double eps)
{
    std::vector<Interval> out;
    out.reserve(box.dim());
    for (std::size_t i = 0; i < box.dim(); ++i)
        out.push_back(inflate(box[i], eps));
    return IntervalBox(std::move(out));
}

// Lexicographic order on (lower corner, upper corner); the canonical
// deterministic ordering for box lists.
inline bool lex_less(const IntervalBox& a, const IntervalBox& b)
{
    a.require_dim(b.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) {
        if (a[i].lo != b[i].lo)
            return a[i].lo < b[i].lo;
    }
    for (std::size_t i = 0; i < a.dim(); ++i) {
        if (a[i].hi != b[i].hi)
            return a[i].hi < b[i].hi;
    }
    return false;
}

}  // namespace bbreach

#endif
