#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fde/constants.hpp"

using namespace fde;
using doctest::Approx;

TEST_CASE("coefficients at hand-substituted points")
{
    const Coefficients c3 = derive_coefficients(4, 3.0);
    CHECK(c3.a == Approx(0.0).epsilon(1e-15));
    CHECK(c3.b == Approx(-1.0).epsilon(1e-15));

    const Coefficients c5 = derive_coefficients(4, 5.0);
    CHECK(c5.a == Approx(1.0).epsilon(1e-15));
    CHECK(c5.b == Approx(-0.75).epsilon(1e-15));

    for (int n = 3; n <= 9; ++n) CHECK(std::abs(derive_coefficients(n, yamabe_exponent(n)).a) < 1e-14);

    CHECK_THROWS_AS(derive_coefficients(4, 1.0), DomainError);
    CHECK_THROWS_AS(derive_coefficients(2, 3.0), DomainError);
}

TEST_CASE("b is negative above n/(n-2)")
{
    for (int n = 3; n <= 8; ++n)
        for (double s : {1e-3, 0.1, 0.5, 1.0, 3.0, 10.0}) {
            const double p = double(n) / (n - 2) + s;
            CHECK(derive_coefficients(n, p).b < 0.0);
        }
}

TEST_CASE("Marcinkiewicz exponent")
{
    CHECK(critical_marcinkiewicz_exponent(4, 1.0 / 3.0) == Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(critical_marcinkiewicz_exponent(3, 0.25) == Approx(1.125).epsilon(1e-15));
    CHECK(critical_marcinkiewicz_exponent(4, 0.5 - 1e-12) == Approx(1.0).epsilon(1e-10));
    CHECK_THROWS_AS(critical_marcinkiewicz_exponent(4, 0.5), DomainError);
    CHECK_THROWS_AS(critical_marcinkiewicz_exponent(4, 0.0), DomainError);
}

TEST_CASE("stationary constants")
{
    CHECK(stationary_constant(4, 3.0, 1.5) == Approx(1.0).epsilon(1e-14));
    CHECK(stationary_constant(4, 3.0, 1.0) == Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-14));
    CHECK(stationary_constant(4, 5.0, 1.0) == Approx(std::pow(0.6, 0.25)).epsilon(1e-14));
    CHECK_THROWS_AS(stationary_constant(4, 2.0, 1.0), DomainError);
    CHECK_THROWS_AS(stationary_constant(4, 3.0, 0.0), DomainError);
}

TEST_CASE("stationary constant at the critical exponent")
{
    for (int n = 3; n <= 8; ++n)
        for (double t : {0.3, 1.0, 2.5}) {
            const double expected = std::pow(t * (n - 2.0) * (n - 2.0) / (n + 2.0), (n - 2.0) / 4.0);
            CHECK(stationary_constant(n, yamabe_exponent(n), t) == Approx(expected).epsilon(1e-13));
        }
}

TEST_CASE("consistency triangle: vbar^{p-1} = -b (p-1) T / p")
{
    for (int n = 3; n <= 7; ++n)
        for (double p : {double(n) / (n - 2) + 0.2, yamabe_exponent(n), 7.0})
            for (double t : {0.5, 1.0, 4.0}) {
                const double b = derive_coefficients(n, p).b;
                const double lhs = std::pow(stationary_constant(n, p, t), p - 1.0);
                CHECK(lhs == Approx(-b * (p - 1.0) * t / p).epsilon(1e-12));
            }
}

TEST_CASE("singular Barenblatt")
{
    CHECK(singular_barenblatt(4, 1.0 / 3.0, 1.0, 0.0, 1.0) == Approx(std::pow(2.0 / 3.0, 1.5)).epsilon(1e-14));
    CHECK(singular_barenblatt(4, 1.0 / 3.0, 1.0, 1.0 - 1e-9, 1.0) < 1e-12);
    CHECK_THROWS_AS(singular_barenblatt(4, 1.0 / 3.0, 1.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(singular_barenblatt(4, 1.0 / 3.0, 1.0, 0.0, 0.0), DomainError);
}

TEST_CASE("bubble profile")
{
    // (3/5)^{1/4} (sqrt(3)/3)^{1/2} = 0.668740...
    const double at_antipode = std::pow(0.6, 0.25) * std::sqrt(std::sqrt(3.0) / 3.0);
    CHECK(bubble_profile(4, -1.0, 2.0) == Approx(at_antipode).epsilon(1e-14));
    CHECK(bubble_profile(4, -1.0, 2.0) == Approx(0.668740).epsilon(1e-6));
    CHECK(std::abs(bubble_profile(4, 0.3, 1e12) - std::pow(0.6, 0.25)) < 1e-10);

    const double north[] = {0.0, 0.0, 0.0, 1.0};
    const double east[] = {1.0, 0.0, 0.0, 0.0};
    CHECK(bubble_profile(4, north, 2.0, east) == Approx(bubble_profile(4, 0.0, 2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(bubble_profile(4, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(bubble_profile(3, 0.0, 2.0), DomainError);
}

TEST_CASE("bubble maximum sits at the center")
{
    for (double lambda : {1.5, 2.0, 10.0})
        for (int i = 0; i <= 50; ++i) {
            const double c = std::cos(std::numbers::pi * i / 50.0);
            CHECK(bubble_profile(4, c, lambda) <= bubble_profile(4, 1.0, lambda));
        }
}

TEST_CASE("bubbles approach the constant monotonically as lambda grows")
{
    for (int n : {4, 5, 6}) {
        const double vbar = stationary_constant(n, bubble_exponent(n), 1.0);
        double prev = INFINITY;
        for (double lambda = 2.0; lambda <= 4096.0; lambda *= 2.0) {
            double worst = 0.0;
            for (int i = 0; i <= 400; ++i)
                worst = std::max(worst, std::abs(bubble_profile(n, std::cos(std::numbers::pi * i / 400.0), lambda) - vbar));
            CHECK(worst < prev);
            prev = worst;
        }
        CHECK(prev < 1e-3);
    }
}

TEST_CASE("sphere areas")
{
    CHECK(sphere_area(1) == Approx(2.0 * std::numbers::pi).epsilon(1e-15));
    CHECK(sphere_area(2) == Approx(4.0 * std::numbers::pi).epsilon(1e-15));
    CHECK(sphere_area(3) == Approx(2.0 * std::numbers::pi * std::numbers::pi).epsilon(1e-15));
}

TEST_CASE("problem spec accepts m, p or a consistent pair")
{
    const ProblemSpec a = ProblemSpec::make(4, 1.0 / 3.0, std::nullopt, Geometry::SphereAxisym);
    const ProblemSpec b = ProblemSpec::make(4, std::nullopt, 3.0, Geometry::SphereAxisym);
    CHECK(a.p == Approx(b.p).epsilon(1e-15));
    CHECK_NOTHROW(ProblemSpec::make(4, 1.0 / 3.0, 3.0, Geometry::SphereAxisym));
    CHECK_THROWS_AS(ProblemSpec::make(4, 0.3, 3.0, Geometry::SphereAxisym), DomainError);
    CHECK_THROWS_AS(ProblemSpec::make(4, std::nullopt, 3.0, Geometry::CylinderRho, 0.0), DomainError);
    CHECK_THROWS_AS(ProblemSpec::make(4, std::nullopt, std::nullopt, Geometry::SphereAxisym), DomainError);
}
