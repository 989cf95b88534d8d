#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "fde/fowler.hpp"

using namespace fde;
using doctest::Approx;

namespace {
const double kThreshold4 = 2.0 * std::numbers::pi / std::sqrt(2.0);
}

TEST_CASE("center and center energy")
{
    CHECK(fowler_center(4, 3.0) == Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-15));
    CHECK(fowler_center_energy(4, 3.0) == Approx(-1.0 / 6.0).epsilon(1e-14));
    CHECK(first_integral({fowler_center(4, 3.0), 0.0}, 4, 3.0) == Approx(-1.0 / 6.0).epsilon(1e-14));
    CHECK(first_integral({1e-8, 0.0}, 4, 3.0) < 0.0);
    CHECK(first_integral({1e-8, 0.0}, 4, 3.0) > -1e-15);
    CHECK(fowler_period_threshold(4) == Approx(4.44288).epsilon(1e-6));
    CHECK_THROWS_AS(require_critical(4, 5.0), DomainError);
    CHECK_THROWS_AS(first_integral({1.0, 0.0}, 4, 5.0), DomainError);
}

TEST_CASE("orbit integration")
{
    const double vbar = fowler_center(4, 3.0);
    const auto still = integrate_orbit({vbar, 0.0}, 10.0, 4, 3.0, 1000);
    for (const auto& s : still) CHECK(s.v == Approx(vbar).epsilon(1e-14));

    // near-center orbit oscillates with the harmonic period
    const auto orbit = integrate_orbit({vbar + 0.01, 0.0}, 6.0, 4, 3.0, 60000);
    double first_return = 0.0;
    for (std::size_t k = 1; k + 1 < orbit.size(); ++k)
        if (orbit[k].rho > 1.0 && orbit[k].dv >= 0.0 && orbit[k + 1].dv < 0.0) {
            first_return = orbit[k].rho;
            break;
        }
    CHECK(first_return == Approx(kThreshold4).epsilon(1e-3));

    CHECK_THROWS_AS(integrate_orbit({0.2, 1.0}, 10.0, 4, 3.0, 1000), UnboundedOrbit);
}

TEST_CASE("energy conservation per period")
{
    for (double e : {-0.15, -0.1, -0.05, -0.01}) {
        const OrbitDescriptor d = describe_orbit(e, 4, 3.0);
        const auto orbit = integrate_orbit({d.v_max, 0.0}, d.period, 4, 3.0, 10000);
        double drift = 0.0;
        for (const auto& s : orbit) drift = std::max(drift, std::abs(first_integral({s.v, s.dv}, 4, 3.0) - e));
        CHECK(drift <= 1e-8);
    }
}

TEST_CASE("orbit is even about its maximum")
{
    const OrbitDescriptor d = describe_orbit(-0.08, 4, 3.0);
    const auto orbit = integrate_orbit({d.v_max, 0.0}, d.period, 4, 3.0, 8000);
    for (std::size_t k = 0; k <= 4000; k += 250) CHECK(orbit[k].v == Approx(orbit[8000 - k].v).epsilon(1e-9));
}

TEST_CASE("turning points bracket the center and solve the energy equation")
{
    for (double e : {-0.16, -0.1, -0.02}) {
        const auto [lo, hi] = turning_points(e, 4, 3.0);
        CHECK(lo < fowler_center(4, 3.0));
        CHECK(hi > fowler_center(4, 3.0));
        CHECK(fowler_potential(lo, 4, 3.0) == Approx(e).epsilon(1e-11));
        CHECK(fowler_potential(hi, 4, 3.0) == Approx(e).epsilon(1e-11));
    }
    CHECK_THROWS_AS(turning_points(0.01, 4, 3.0), DomainError);
    CHECK_THROWS_AS(turning_points(-0.2, 4, 3.0), DomainError);
}

TEST_CASE("minimal period: harmonic limit, threshold and monotonicity")
{
    for (int n : {4, 5, 6}) {
        const double p = yamabe_exponent(n);
        const double ec = fowler_center_energy(n, p);
        CHECK(minimal_period(ec + 1e-4, n, p) == Approx(fowler_period_threshold(n)).epsilon(5e-3));
        double prev = 0.0;
        for (int i = 1; i <= 40; ++i) {
            const double e = ec * (1.0 - i / 41.0);
            const double q = minimal_period(e, n, p);
            CHECK(q > fowler_period_threshold(n));
            CHECK(q > prev);
            prev = q;
        }
    }
    CHECK_THROWS_AS(minimal_period(0.0, 4, 3.0), DomainError);
}

TEST_CASE("quadrature and return-time periods agree")
{
    for (double e : {-0.16, -0.12, -0.06, -0.02, -0.005}) {
        const double q = minimal_period(e, 4, 3.0);
        CHECK(return_period(e, 4, 3.0) == Approx(q).epsilon(1e-4));
    }
}

TEST_CASE("energy for a target period")
{
    const double e = energy_for_period(6.0, 4, 3.0);
    CHECK(minimal_period(e, 4, 3.0) == Approx(6.0).epsilon(1e-9));
    CHECK_THROWS_AS(energy_for_period(4.0, 4, 3.0), NoFowlerSolution);
}

TEST_CASE("Fowler fields on grids")
{
    auto grid = make_periodic_line(4, 6.0, 256);
    const Field f = fowler_on_grid(6.0, 1, 0.0, 4, 3.0, grid);
    const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
    CHECK(*hi - *lo > 0.1);

    // the sampled orbit carries one energy at every node
    const double e = energy_for_period(6.0, 4, 3.0);
    const OrbitDescriptor d = describe_orbit(e, 4, 3.0);
    const auto orbit = integrate_orbit({d.v_max, 0.0}, 6.0, 4, 3.0, 60000);
    for (const auto& s : orbit) CHECK(first_integral({s.v, s.dv}, 4, 3.0) == Approx(e).epsilon(1e-6));

    // half-period phase shift is an index rotation
    const Field g = fowler_on_grid(6.0, 1, 3.0, 4, 3.0, grid);
    for (int i = 0; i < 256; ++i) CHECK(g[(i + 128) % 256] == Approx(f[i]).epsilon(1e-9));

    CHECK_THROWS_AS(fowler_on_grid(4.0, 1, 0.0, 4, 3.0, make_periodic_line(4, 4.0, 64)), NoFowlerSolution);
    const Field c = fowler_on_grid(4.0, 0, 0.0, 4, 3.0, make_periodic_line(4, 4.0, 64));
    for (double x : c) CHECK(x == Approx(fowler_center(4, 3.0)).epsilon(1e-15));
}

TEST_CASE("Fowler fields are discrete stationary states up to O(h^2)")
{
    auto residual = [](int N) {
        auto grid = std::make_shared<const Grid>(make_periodic_line(4, 6.0, N));
        const Field f = fowler_on_grid(6.0, 1, 0.0, 4, 3.0, *grid);
        const DiscreteOperator op(grid, 0.0, -1.0);
        const Field lf = op.apply(f);
        double r = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) r = std::max(r, std::abs(lf[i] + 1.5 * std::pow(f[i], 3)));
        return r;
    };
    const double r1 = residual(128), r2 = residual(256);
    CHECK(r2 < 1e-3);
    CHECK(std::log2(r1 / r2) == Approx(2.0).epsilon(0.1));
}
