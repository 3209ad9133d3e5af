#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "bbreach/simulate.hpp"
#include "bbreach/taylor.hpp"

using namespace bbreach;

namespace {

// High-accuracy reference solution via RK4 with tiny steps; supports
// negative horizons for central differences.
std::vector<double> rk4_reference(const Dynamics& dyn, std::vector<double> s,
                                  const std::vector<double>& act, double t)
{
    const int steps = 2000;
    const double h = t / steps;
    for (int i = 0; i < steps; ++i)
        rk4_step(dyn, s, act, h);
    return s;
}

}  // namespace

TEST_CASE("constant dynamics expand exactly")
{
    const auto dyn = Dynamics::parse({"0.5"}, 1, 0);
    const auto coeffs = taylor_coeffs(dyn, std::vector<double>{0.2}, {}, 4);
    REQUIRE(coeffs[0].size() == 5);
    CHECK(coeffs[0][0] == Interval(0.2));
    CHECK_THAT(coeffs[0][1].mid(), Catch::Matchers::WithinAbs(0.5, 1e-15));
    for (int j = 2; j <= 4; ++j) {
        CHECK_THAT(coeffs[0][static_cast<std::size_t>(j)].mid(),
                   Catch::Matchers::WithinAbs(0.0, 1e-15));
        CHECK(coeffs[0][static_cast<std::size_t>(j)].width() < 1e-15);
    }
}

TEST_CASE("exponential series")
{
    const auto dyn = Dynamics::parse({"x1"}, 1, 0);
    const auto coeffs = taylor_coeffs(dyn, std::vector<double>{1.0}, {}, 4);
    const double expected[] = {1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0};
    for (int j = 0; j <= 4; ++j) {
        CHECK_THAT(coeffs[0][static_cast<std::size_t>(j)].mid(),
                   Catch::Matchers::WithinAbs(expected[j], 1e-14));
        CHECK(coeffs[0][static_cast<std::size_t>(j)].width() < 1e-13);
    }
}

TEST_CASE("polynomial dynamics match the symbolic expansion")
{
    // x' = x^2 through x(0)=1 solves to 1/(1-t): every coefficient is 1
    const auto dyn = Dynamics::parse({"x1^2"}, 1, 0);
    const auto coeffs = taylor_coeffs(dyn, std::vector<double>{1.0}, {}, 5);
    for (int j = 0; j <= 5; ++j)
        CHECK_THAT(coeffs[0][static_cast<std::size_t>(j)].mid(),
                   Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("worked cubic example against finite differences")
{
    const auto dyn = Dynamics::parse({"x2 - x1^3", "a1"}, 2, 1);
    const std::vector<double> x0{0.2, 0.3};
    const std::vector<double> act{0.5};
    const auto coeffs = taylor_coeffs(dyn, x0, act, 3);

    CHECK_THAT(coeffs[0][1].mid(), Catch::Matchers::WithinAbs(0.292, 1e-13));
    // c2 = (a - 3 x1^2 (x2 - x1^3)) / 2
    const double c2 = (0.5 - 3.0 * 0.04 * 0.292) / 2.0;
    CHECK_THAT(coeffs[0][2].mid(), Catch::Matchers::WithinAbs(c2, 1e-13));

    // central differences of a high-accuracy reference solution
    const double h = 1e-3;
    const auto fwd = rk4_reference(dyn, x0, act, h);
    const auto bwd = rk4_reference(dyn, x0, act, -h);
    const double c1_fd = (fwd[0] - bwd[0]) / (2.0 * h);
    const double c2_fd = (fwd[0] - 2.0 * x0[0] + bwd[0]) / (2.0 * h * h);
    CHECK_THAT(coeffs[0][1].mid(), Catch::Matchers::WithinAbs(c1_fd, 1e-6));
    CHECK_THAT(coeffs[0][2].mid(), Catch::Matchers::WithinAbs(c2_fd, 1e-6));

    CHECK_THAT(coeffs[1][1].mid(), Catch::Matchers::WithinAbs(0.5, 1e-15));
    CHECK(coeffs[1][2].mag() < 1e-14);
}

TEST_CASE("elementary function series")
{
    SECTION("sin")
    {
        const auto dyn = Dynamics::parse({"sin(x1)"}, 1, 0);
        const auto coeffs = taylor_coeffs(dyn, std::vector<double>{1.0}, {}, 2);
        CHECK_THAT(coeffs[0][1].mid(), Catch::Matchers::WithinAbs(std::sin(1.0), 1e-14));
        CHECK_THAT(coeffs[0][2].mid(),
                   Catch::Matchers::WithinAbs(std::cos(1.0) * std::sin(1.0) / 2.0, 1e-14));
    }

    SECTION("cos")
    {
        const auto dyn = Dynamics::parse({"cos(x1)"}, 1, 0);
        const auto coeffs = taylor_coeffs(dyn, std::vector<double>{0.7}, {}, 2);
        CHECK_THAT(coeffs[0][1].mid(), Catch::Matchers::WithinAbs(std::cos(0.7), 1e-14));
        CHECK_THAT(coeffs[0][2].mid(),
                   Catch::Matchers::WithinAbs(-std::sin(0.7) * std::cos(0.7) / 2.0, 1e-14));
    }

    SECTION("tanh")
    {
        const auto dyn = Dynamics::parse({"tanh(x1)"}, 1, 0);
        const auto coeffs = taylor_coeffs(dyn, std::vector<double>{0.5}, {}, 2);
        const double th = std::tanh(0.5);
        CHECK_THAT(coeffs[0][1].mid(), Catch::Matchers::WithinAbs(th, 1e-14));
        CHECK_THAT(coeffs[0][2].mid(),
                   Catch::Matchers::WithinAbs((1.0 - th * th) * th / 2.0, 1e-14));
    }

    SECTION("sqrt")
    {
        const auto dyn = Dynamics::parse({"sqrt(x1)"}, 1, 0);
        const auto coeffs = taylor_coeffs(dyn, std::vector<double>{4.0}, {}, 2);
        CHECK_THAT(coeffs[0][1].mid(), Catch::Matchers::WithinAbs(2.0, 1e-14));
        // d/dt sqrt(x) = x'/(2 sqrt x) = 2/4, so c2 = 0.25
        CHECK_THAT(coeffs[0][2].mid(), Catch::Matchers::WithinAbs(0.25, 1e-14));
    }

    SECTION("division")
    {
        const auto dyn = Dynamics::parse({"1 / x1"}, 1, 0);
        const auto coeffs = taylor_coeffs(dyn, std::vector<double>{2.0}, {}, 2);
        CHECK_THAT(coeffs[0][1].mid(), Catch::Matchers::WithinAbs(0.5, 1e-14));
        // c2 = (-x'/x^2)/2 = -0.0625
        CHECK_THAT(coeffs[0][2].mid(), Catch::Matchers::WithinAbs(-0.0625, 1e-14));
    }

    SECTION("exp")
    {
        const auto dyn = Dynamics::parse({"exp(x1)"}, 1, 0);
        const auto coeffs = taylor_coeffs(dyn, std::vector<double>{0.3}, {}, 2);
        const double e = std::exp(0.3);
        CHECK_THAT(coeffs[0][1].mid(), Catch::Matchers::WithinAbs(e, 1e-14));
        CHECK_THAT(coeffs[0][2].mid(), Catch::Matchers::WithinAbs(e * e / 2.0, 1e-14));
    }
}

TEST_CASE("box coefficients contain sampled point coefficients")
{
    const auto dyn = Dynamics::parse({"x2 - x1^3", "a1"}, 2, 1);
    const IntervalBox box({Interval(0.15, 0.2), Interval(0.2, 0.3)});
    const std::vector<double> act{0.5};
    const auto wide = taylor_coeffs(dyn, box, act, 4);

    std::mt19937_64 rng(67);
    std::uniform_real_distribution<double> u1(0.15, 0.2), u2(0.2, 0.3);
    for (int s = 0; s < 200; ++s) {
        const std::vector<double> p{u1(rng), u2(rng)};
        const auto point = taylor_coeffs(dyn, p, act, 4);
        for (std::size_t d = 0; d < 2; ++d)
            for (std::size_t j = 0; j <= 4; ++j)
                CHECK(wide[d][j].contains(point[d][j]));
    }
}

TEST_CASE("series order validation")
{
    const auto dyn = Dynamics::parse({"x1"}, 1, 0);
    CHECK_THROWS_AS(taylor_coeffs(dyn, std::vector<double>{1.0}, {}, 0), DomainError);
}
