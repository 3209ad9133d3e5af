#ifndef BBREACH_TAYLOR_HPP
#define BBREACH_TAYLOR_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "bbreach/expr.hpp"
#include "bbreach/interval.hpp"

namespace bbreach {

// Truncated time series with interval coefficients. Operations keep
// max(len_a, len_b) coefficients; coefficient i of a product/quotient only
// depends on coefficients <= i, so truncation commutes with arithmetic.
// Series of different lengths may only be mixed when the shorter one is an
// exact constant (all dropped coefficients truly zero) -- the evaluator
// builds constants as length-1 series.
class TaylorSeries {
public:
    TaylorSeries() : c_(1, Interval(0.0)) {}
    explicit TaylorSeries(double v) : c_(1, Interval(v)) {}
    explicit TaylorSeries(std::vector<Interval> coeffs) : c_(std::move(coeffs))
    {
        if (c_.empty())
            c_.emplace_back(0.0);
    }

    std::size_t size() const { return c_.size(); }
    const Interval& operator[](std::size_t i) const { return c_[i]; }

    Interval coeff(std::size_t i) const
    {
        return i < c_.size() ? c_[i] : Interval(0.0);
    }

    const std::vector<Interval>& coeffs() const { return c_; }

private:
    std::vector<Interval> c_;
};

inline TaylorSeries operator-(const TaylorSeries& a)
{
    std::vector<Interval> out;
    out.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out.push_back(-a[i]);
    return TaylorSeries(std::move(out));
}

inline TaylorSeries operator+(const TaylorSeries& a, const TaylorSeries& b)
{
    const std::size_t n = std::max(a.size(), b.size());
    std::vector<Interval> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(a.coeff(i) + b.coeff(i));
    return TaylorSeries(std::move(out));
}

inline TaylorSeries operator-(const TaylorSeries& a, const TaylorSeries& b)
{
    const std::size_t n = std::max(a.size(), b.size());
    std::vector<Interval> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(a.coeff(i) - b.coeff(i));
    return TaylorSeries(std::move(out));
}

inline TaylorSeries operator*(const TaylorSeries& a, const TaylorSeries& b)
{
    const std::size_t n = std::max(a.size(), b.size());
    std::vector<Interval> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Interval acc(0.0);
        for (std::size_t p = 0; p <= i; ++p)
            acc = acc + a.coeff(p) * b.coeff(i - p);
        out.push_back(acc);
    }
    return TaylorSeries(std::move(out));
}

inline TaylorSeries checked_div(const TaylorSeries& a, const TaylorSeries& b)
{
    if (b.coeff(0).contains_zero())
        throw DomainError("series division by interval containing zero");
    const std::size_t n = std::max(a.size(), b.size());
    std::vector<Interval> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Interval acc = a.coeff(i);
        for (std::size_t p = 0; p < i; ++p)
            acc = acc - out[p] * b.coeff(i - p);
        out.push_back(acc / b.coeff(0));
    }
    return TaylorSeries(std::move(out));
}

inline TaylorSeries operator/(const TaylorSeries& a, const TaylorSeries& b)
{
    return checked_div(a, b);
}

inline TaylorSeries pow_int(const TaylorSeries& x, int n)
{
    if (n < 0)
        throw DomainError("negative integer exponent");
    if (n == 0)
        return TaylorSeries(1.0);
    TaylorSeries result = x;
    TaylorSeries base = x;
    int e = n - 1;
    while (e > 0) {
        if (e & 1)
            result = result * base;
        base = base * base;
        e >>= 1;
    }
    return result;
}

namespace detail {

// d/dt(g(u)) = g'(u) u' gives the standard recurrences; `rate` holds the
// series whose coefficients multiply i*u_i in the sum.
inline Interval chain_sum(const TaylorSeries& u, const std::vector<Interval>& rate,
                          std::size_t j)
{
    Interval acc(0.0);
    for (std::size_t i = 1; i <= j; ++i)
        acc = acc + static_cast<double>(i) * u.coeff(i) * rate[j - i];
    return acc / static_cast<double>(j);
}

}  // namespace detail

inline TaylorSeries exp(const TaylorSeries& u)
{
    std::vector<Interval> e;
    e.reserve(u.size());
    e.push_back(exp(u.coeff(0)));
    for (std::size_t j = 1; j < u.size(); ++j)
        e.push_back(detail::chain_sum(u, e, j));
    return TaylorSeries(std::move(e));
}

inline TaylorSeries sin(const TaylorSeries& u)
{
    std::vector<Interval> s, c;
    s.reserve(u.size());
    c.reserve(u.size());
    s.push_back(sin(u.coeff(0)));
    c.push_back(cos(u.coeff(0)));
    for (std::size_t j = 1; j < u.size(); ++j) {
        s.push_back(detail::chain_sum(u, c, j));
        c.push_back(-detail::chain_sum(u, s, j));
    }
    return TaylorSeries(std::move(s));
}

inline TaylorSeries cos(const TaylorSeries& u)
{
    std::vector<Interval> s, c;
    s.reserve(u.size());
    c.reserve(u.size());
    s.push_back(sin(u.coeff(0)));
    c.push_back(cos(u.coeff(0)));
    for (std::size_t j = 1; j < u.size(); ++j) {
        s.push_back(detail::chain_sum(u, c, j));
        c.push_back(-detail::chain_sum(u, s, j));
    }
    return TaylorSeries(std::move(c));
}

inline TaylorSeries tanh(const TaylorSeries& u)
{
    // g = 1 - tanh(u)^2 drives the recurrence.
    std::vector<Interval> t, g;
    t.reserve(u.size());
    g.reserve(u.size());
    t.push_back(tanh(u.coeff(0)));
    g.push_back(Interval(1.0) - sqr(t[0]));
    for (std::size_t j = 1; j < u.size(); ++j) {
        t.push_back(detail::chain_sum(u, g, j));
        Interval sq(0.0);
        for (std::size_t i = 0; i <= j; ++i)
            sq = sq + t[i] * t[j - i];
        g.push_back(-sq);
    }
    return TaylorSeries(std::move(t));
}

inline TaylorSeries sqrt(const TaylorSeries& u)
{
    std::vector<Interval> r;
    r.reserve(u.size());
    r.push_back(sqrt(u.coeff(0)));
    if (u.size() > 1 && r[0].contains_zero())
        throw DomainError("series sqrt at a range touching zero");
    for (std::size_t j = 1; j < u.size(); ++j) {
        Interval acc = u.coeff(j);
        for (std::size_t i = 1; i < j; ++i)
            acc = acc - r[i] * r[j - i];
        r.push_back(acc / (2.0 * r[0]));
    }
    return TaylorSeries(std::move(r));
}

// Coefficients c_0..c_k of the time expansion x(t) = sum c_j t^j of the ODE
// solution through x0 under a constant action, via the standard recurrence
// c_{j+1} = (f(x))_j / (j+1) evaluated in interval series arithmetic.
inline std::vector<std::vector<Interval>> taylor_coeffs(const Dynamics& dyn,
                                                        const IntervalBox& x0,
                                                        std::span<const double> act, int order)
{
    if (order < 1)
        throw DomainError("taylor order must be >= 1");
    x0.require_dim(dyn.state_dim);
    if (act.size() != dyn.action_dim)
        throw DimensionMismatch("action dimension mismatch");

    const std::size_t n = dyn.state_dim;
    std::vector<std::vector<Interval>> coeff(n);
    for (std::size_t i = 0; i < n; ++i)
        coeff[i].push_back(x0[i]);

    std::vector<TaylorSeries> action;
    action.reserve(act.size());
    for (double a : act)
        action.emplace_back(a);

    for (int j = 0; j < order; ++j) {
        std::vector<TaylorSeries> state;
        state.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            state.emplace_back(coeff[i]);
        for (std::size_t i = 0; i < n; ++i) {
            const TaylorSeries f = dyn.rhs[i].eval<TaylorSeries>(state, action);
            coeff[i].push_back(f.coeff(static_cast<std::size_t>(j)) /
                               static_cast<double>(j + 1));
        }
    }
    return coeff;
}

// Point-input convenience used by tests and the synthesizer.
inline std::vector<std::vector<Interval>> taylor_coeffs(const Dynamics& dyn,
                                                        std::span<const double> x0,
                                                        std::span<const double> act, int order)
{
    std::vector<Interval> dims;
    dims.reserve(x0.size());
    for (double v : x0)
        dims.emplace_back(v);
    return taylor_coeffs(dyn, IntervalBox(std::move(dims)), act, order);
}

}  // namespace bbreach

#endif
