#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "bbreach/interval.hpp"

using namespace bbreach;

namespace {

IntervalBox make_box(std::initializer_list<double> lo, std::initializer_list<double> hi)
{
    return IntervalBox(std::vector<double>(lo), std::vector<double>(hi));
}

Interval random_interval(std::mt19937_64& rng, double lo = -4.0, double hi = 4.0)
{
    std::uniform_real_distribution<double> dist(lo, hi);
    double a = dist(rng);
    double b = dist(rng);
    if (a > b)
        std::swap(a, b);
    return Interval(a, b);
}

// Random interval nested inside x.
Interval random_sub(std::mt19937_64& rng, const Interval& x)
{
    std::uniform_real_distribution<double> dist(x.lo, x.hi);
    double a = dist(rng);
    double b = dist(rng);
    if (a > b)
        std::swap(a, b);
    return Interval(a, b);
}

double random_point(std::mt19937_64& rng, const Interval& x)
{
    std::uniform_real_distribution<double> dist(x.lo, x.hi);
    return dist(rng);
}

}  // namespace

TEST_CASE("interval invariants are enforced")
{
    CHECK_THROWS_AS(Interval(1.0, 0.0), DomainError);
    CHECK_THROWS_AS(Interval(std::nan(""), 1.0), DomainError);
    CHECK_THROWS_AS(Interval(0.0, std::numeric_limits<double>::infinity()), DomainError);
    CHECK_THROWS_AS(make_box({0.0, 0.0}, {1.0}), DimensionMismatch);
}

TEST_CASE("hull of boxes")
{
    const auto a = make_box({0.08, 0.3}, {0.16, 0.4});
    const auto b = make_box({0.17, 0.32}, {0.25, 0.42});

    SECTION("idempotence") { CHECK(hull(a, a) == a); }

    SECTION("worked pair")
    {
        const auto h = hull(a, b);
        CHECK(h == make_box({0.08, 0.3}, {0.25, 0.42}));
        CHECK(h.contains(a));
        CHECK(h.contains(b));
    }

    SECTION("five random sub-boxes against an endpoint scan")
    {
        std::mt19937_64 rng(7);
        const Interval unit(0.0, 1.0);
        for (int round = 0; round < 200; ++round) {
            std::vector<IntervalBox> boxes;
            for (int k = 0; k < 5; ++k)
                boxes.push_back(IntervalBox({random_sub(rng, unit), random_sub(rng, unit)}));
            IntervalBox acc = boxes[0];
            for (std::size_t k = 1; k < boxes.size(); ++k)
                acc = hull(acc, boxes[k]);
            for (std::size_t d = 0; d < 2; ++d) {
                double lo = boxes[0][d].lo, hi = boxes[0][d].hi;
                for (const auto& box : boxes) {
                    lo = std::min(lo, box[d].lo);
                    hi = std::max(hi, box[d].hi);
                }
                CHECK(acc[d].lo == lo);
                CHECK(acc[d].hi == hi);
            }
        }
    }

    SECTION("commutative, associative")
    {
        std::mt19937_64 rng(11);
        for (int round = 0; round < 200; ++round) {
            const IntervalBox x({random_interval(rng), random_interval(rng)});
            const IntervalBox y({random_interval(rng), random_interval(rng)});
            const IntervalBox z({random_interval(rng), random_interval(rng)});
            CHECK(hull(x, y) == hull(y, x));
            CHECK(hull(hull(x, y), z) == hull(x, hull(y, z)));
        }
    }

    SECTION("dimension mismatch")
    {
        CHECK_THROWS_AS(hull(a, IntervalBox({Interval(0.0, 1.0)})), DimensionMismatch);
    }
}

TEST_CASE("intersection of boxes")
{
    const auto a = make_box({0.15, 0.15}, {0.25, 0.3});

    SECTION("self") { CHECK(intersect(a, a) == a); }

    SECTION("with a grid cell")
    {
        const auto cell = make_box({0.1, 0.1}, {0.2, 0.2});
        const auto r = intersect(a, cell);
        REQUIRE(r.has_value());
        CHECK(*r == make_box({0.15, 0.15}, {0.2, 0.2}));
    }

    SECTION("disjoint")
    {
        CHECK_FALSE(intersect(a, make_box({1.0, 1.0}, {2.0, 2.0})).has_value());
        CHECK_FALSE(boxes_intersect(a, make_box({1.0, 1.0}, {2.0, 2.0})));
    }

    SECTION("result contained in both operands")
    {
        std::mt19937_64 rng(13);
        for (int round = 0; round < 500; ++round) {
            const IntervalBox x({random_interval(rng), random_interval(rng)});
            const IntervalBox y({random_interval(rng), random_interval(rng)});
            const auto r = intersect(x, y);
            CHECK(r.has_value() == boxes_intersect(x, y));
            if (r) {
                CHECK(x.contains(*r));
                CHECK(y.contains(*r));
            }
        }
    }
}

TEST_CASE("point containment")
{
    const auto box = make_box({0.3, 0.2}, {0.4, 0.3});
    CHECK(box.contains(box.midpoint()));
    CHECK(box.contains(std::vector<double>{0.35, 0.25}));
    CHECK_FALSE(box.contains(std::vector<double>{0.4 + 1e-9, 0.25}));
    CHECK_THROWS_AS(box.contains(std::vector<double>{0.35}), DimensionMismatch);
}

TEST_CASE("inflate")
{
    const auto box = make_box({0.0, -1.0}, {1.0, 2.0});

    SECTION("zero eps still contains the box")
    {
        const auto r = inflate(box, 0.0);
        CHECK(r.contains(box));
        CHECK(r[0].lo < 0.0);
        CHECK(r[0].hi > 1.0);
        CHECK(r[0].lo > -1e-12);
    }

    SECTION("unit interval by 0.01")
    {
        const auto r = inflate(make_box({0.0}, {1.0}), 0.01);
        CHECK_THAT(r[0].lo, Catch::Matchers::WithinAbs(-0.01, 1e-15));
        CHECK_THAT(r[0].hi, Catch::Matchers::WithinAbs(1.01, 1e-15));
    }

    SECTION("width grows by 2*eps per dimension")
    {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> eps_dist(0.0, 0.5);
        for (int round = 0; round < 500; ++round) {
            const Interval x = random_interval(rng);
            const double eps = eps_dist(rng);
            const Interval r = inflate(x, eps);
            CHECK_THAT(r.width(), Catch::Matchers::WithinAbs(x.width() + 2 * eps, 1e-12));
        }
    }

    SECTION("negative eps rejected") { CHECK_THROWS_AS(inflate(box, -0.1), DomainError); }
}

TEST_CASE("arithmetic encloses sampled point results")
{
    std::mt19937_64 rng(23);
    for (int round = 0; round < 10000; ++round) {
        const Interval x = random_interval(rng);
        Interval y = random_interval(rng);
        const Interval sum = x + y;
        const Interval diff = x - y;
        const Interval prod = x * y;
        const double xv = random_point(rng, x);
        const double yv = random_point(rng, y);
        CHECK(sum.contains(xv + yv));
        CHECK(diff.contains(xv - yv));
        CHECK(prod.contains(xv * yv));
        if (!y.contains_zero()) {
            CHECK((x / y).contains(xv / yv));
        }
        CHECK(sqr(x).contains(xv * xv));
        CHECK(pow_int(x, 3).contains(xv * xv * xv));
        CHECK(sin(x).contains(std::sin(xv)));
        CHECK(cos(x).contains(std::cos(xv)));
        CHECK(exp(x).contains(std::exp(xv)));
        CHECK(tanh(x).contains(std::tanh(xv)));
        if (x.lo >= 0.0)
            CHECK(sqrt(x).contains(std::sqrt(xv)));
    }
}

TEST_CASE("arithmetic is inclusion isotone on nested intervals")
{
    std::mt19937_64 rng(29);
    for (int round = 0; round < 5000; ++round) {
        const Interval outer_x = random_interval(rng);
        const Interval outer_y = random_interval(rng);
        const Interval inner_x = random_sub(rng, outer_x);
        const Interval inner_y = random_sub(rng, outer_y);
        CHECK((outer_x + outer_y).contains(inner_x + inner_y));
        CHECK((outer_x - outer_y).contains(inner_x - inner_y));
        CHECK((outer_x * outer_y).contains(inner_x * inner_y));
        if (!outer_y.contains_zero())
            CHECK((outer_x / outer_y).contains(inner_x / inner_y));
        CHECK(pow_int(outer_x, 4).contains(pow_int(inner_x, 4)));
        CHECK(sin(outer_x).contains(sin(inner_x)));
        CHECK(cos(outer_x).contains(cos(inner_x)));
        CHECK(exp(outer_x).contains(exp(inner_x)));
        CHECK(tanh(outer_x).contains(tanh(inner_x)));
        if (outer_x.lo >= 0.0)
            CHECK(sqrt(outer_x).contains(sqrt(inner_x)));
    }
}

TEST_CASE("division by an interval containing zero fails loudly")
{
    CHECK_THROWS_AS(Interval(1.0, 2.0) / Interval(-1.0, 1.0), DomainError);
    CHECK_THROWS_AS(Interval(1.0, 2.0) / Interval(0.0, 1.0), DomainError);
}

TEST_CASE("even powers never go negative")
{
    const Interval x(-2.0, 1.0);
    CHECK(sqr(x).lo == 0.0);
    CHECK(pow_int(x, 4).lo == 0.0);
    CHECK(pow_int(x, 2).contains(4.0));
    const Interval y(-3.0, -2.0);
    CHECK(pow_int(y, 2).lo > 0.0);
    CHECK(pow_int(y, 3).contains(-27.0));
    CHECK(pow_int(y, 3).hi <= -8.0 + 1e-12);
}

TEST_CASE("trig ranges include extrema")
{
    const Interval around_peak(1.0, 2.0);  // contains pi/2
    CHECK(sin(around_peak).hi == 1.0);
    const Interval around_trough(4.0, 5.0);  // contains 3*pi/2
    CHECK(sin(around_trough).lo == -1.0);
    const Interval wide(0.0, 10.0);
    CHECK(sin(wide) == Interval(-1.0, 1.0));
    CHECK(cos(Interval(-0.5, 0.5)).hi == 1.0);
    CHECK(cos(Interval(3.0, 3.5)).lo == -1.0);
}
