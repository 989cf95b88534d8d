#include <doctest.h>

#include <cmath>
#include <random>

#include "fde/constants.hpp"
#include "fde/transform.hpp"

using namespace fde;
using doctest::Approx;

TEST_CASE("Barenblatt maps to a constant cylindrical profile")
{
    for (double r : {1e-3, 0.1, 1.0, 7.0, 1e3}) {
        const double u = singular_barenblatt(4, 1.0 / 3.0, 1.0, 0.0, r);
        CHECK(to_cylindrical(u, r, 3.0) == Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-14));
    }
    CHECK(to_cylindrical(0.0, 2.0, 3.0) == 0.0);
    CHECK_THROWS_AS(to_cylindrical(1.0, 0.0, 3.0), DomainError);
    CHECK_THROWS_AS(from_cylindrical(1.0, -1.0, 3.0), DomainError);
}

TEST_CASE("cylindrical round trip")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> lr(-5.0, 5.0), lu(-10.0, 10.0), pp(1.2, 8.0);
    for (int i = 0; i < 500; ++i) {
        const double r = std::exp(lr(rng)), u = std::exp(lu(rng)), p = pp(rng);
        CHECK(from_cylindrical(to_cylindrical(u, r, p), r, p) == Approx(u).epsilon(1e-13));
        CHECK(to_cylindrical(u, r, p) > 0.0);
    }
}

TEST_CASE("time map")
{
    CHECK(rescale_time(0.0, 2.0) == 0.0);
    CHECK(rescale_time(2.0 * (1.0 - std::exp(-1.0)), 2.0) == Approx(2.0).epsilon(1e-14));
    CHECK_THROWS_AS(rescale_time(2.0, 2.0), DomainError);
    double prev = -1.0, prev_slope = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double tau = 1.5 * i / 200.0;
        const double t = rescale_time(tau, 1.5);
        CHECK(t > prev);
        if (i > 0) {
            const double slope = t - prev;
            if (i > 1) CHECK(slope > prev_slope);
            prev_slope = slope;
        }
        prev = t;
        CHECK(unrescale_time(t, 1.5) == Approx(tau).epsilon(1e-14).scale(1.0));
    }
}

TEST_CASE("rescaling factor")
{
    CHECK(rescale_factor(0.0, 1.3, 3.0) == 1.0);
    CHECK(rescale_factor(0.65, 1.3, 3.0) == Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(rescale_factor(0.5, 1.0, 5.0) == Approx(std::pow(2.0, 0.25)).epsilon(1e-15));
    const Field w{1.0, 2.0, 3.0};
    CHECK(rescale_field(w, 0.0, 1.0, 3.0) == w);
    CHECK_THROWS_AS(rescale_field(w, 1.0, 1.0, 3.0), DomainError);
}

TEST_CASE("exact singular solution is constant in space and rescaled time")
{
    const int n = 5;
    const double m = 0.4, p = 1.0 / m, t_star = 2.0;
    const double target = stationary_constant(n, p, t_star);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lr(-6.0, 6.0), tt(0.0, 0.999);
    for (int i = 0; i < 1000; ++i) {
        const double r = std::exp(lr(rng)), tau = t_star * tt(rng);
        const double w = to_cylindrical(singular_barenblatt(n, m, t_star, tau, r), r, p);
        const double v = rescale_field(std::vector<double>{w}, tau, t_star, p)[0];
        CHECK(v == Approx(target).epsilon(1e-12));
    }
}

TEST_CASE("sample structs round trip")
{
    const PhysicalSample s{2.0, 0.3, 0.4, 0.25};
    const CylindricalSample c = to_cylindrical(s, 3.0);
    CHECK(c.rho == Approx(std::log(2.0)));
    const RescaledSample r = rescale(c, 1.0, 3.0);
    const PhysicalSample back = from_cylindrical(unrescale(r, 1.0, 3.0), 3.0);
    CHECK(back.r == Approx(s.r).epsilon(1e-14));
    CHECK(back.t == Approx(s.t).epsilon(1e-14));
    CHECK(back.value == Approx(s.value).epsilon(1e-13));
}
