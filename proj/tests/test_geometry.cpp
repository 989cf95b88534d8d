#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "fde/geometry.hpp"

using namespace fde;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const Grid> shared(Grid g) { return std::make_shared<const Grid>(std::move(g)); }

double max_abs_error(const Field& got, const Field& want)
{
    double e = 0.0;
    for (std::size_t k = 0; k < got.size(); ++k) e = std::max(e, std::abs(got[k] - want[k]));
    return e;
}

}  // namespace

TEST_CASE("grid volumes")
{
    const Grid arc = make_polar_arc(4, 64);
    CHECK(arc.total_volume == Approx(2.0 * kPi * kPi).epsilon(1e-12));
    double sum = 0.0;
    for (double w : arc.weights) {
        CHECK(w > 0.0);
        sum += w;
    }
    CHECK(sum == Approx(arc.total_volume).epsilon(1e-10));

    const double ell = 2.0 * kPi / std::sqrt(2.0);
    const Grid line = make_periodic_line(4, ell, 32);
    CHECK(line.total_volume == Approx(ell * 2.0 * kPi * kPi).epsilon(1e-12));

    const Grid tensor = make_tensor_grid(5, 3.0, 16, 24);
    CHECK(tensor.total_volume == Approx(3.0 * sphere_area(4)).epsilon(1e-12));
    CHECK(integrate(tensor, Field(tensor.size(), 1.0)) == Approx(tensor.total_volume).epsilon(1e-12));
}

TEST_CASE("cell volumes are exact for every n")
{
    for (int n = 3; n <= 7; ++n)
        for (int N : {16, 17, 40}) CHECK(make_polar_arc(n, N).total_volume == Approx(sphere_area(n - 1)).epsilon(1e-12));
}

TEST_CASE("resolution below 16 is rejected")
{
    CHECK_THROWS_AS(make_polar_arc(4, 15), DomainError);
    CHECK_THROWS_AS(make_periodic_line(4, 1.0, 8), DomainError);
    const ProblemSpec s = ProblemSpec::make(4, std::nullopt, 3.0, Geometry::CylinderFull, 5.0);
    CHECK_THROWS_AS(build_grid(s, {32, 10}), DomainError);
    CHECK(build_grid(s, {32, 16}).size() == 32u * 16u);
}

TEST_CASE("quadrature of odd and squared fields")
{
    const Grid arc = make_polar_arc(4, 80);
    const Field c = sample(arc, [](double, double th) { return std::cos(th); });
    CHECK(std::abs(integrate(arc, c)) < 1e-10);

    const double ell = 5.0;
    const Grid line = make_periodic_line(4, ell, 64);
    const Field sq = sample(line, [&](double r, double) { return std::pow(std::cos(2 * kPi * r / ell), 2); });
    CHECK(integrate(line, sq) == Approx(line.total_volume / 2.0).epsilon(1e-6));
}

TEST_CASE("operator on constants")
{
    auto g = shared(make_tensor_grid(4, 5.0, 16, 20));
    const DiscreteOperator op(g, 0.7, -1.0);
    const Field out = op.apply(Field(g->size(), 2.5));
    for (double x : out) CHECK(x == Approx(-2.5).epsilon(1e-12));

    const DiscreteOperator pure(g, 0.0, 0.0);
    const Field lap = pure.laplacian(Field(g->size(), 3.0));
    for (double x : lap) CHECK(std::abs(x) < 1e-10);
}

TEST_CASE("eigenfunctions: truncation error is second order")
{
    auto rho_error = [](int N) {
        const double ell = 3.0;
        auto g = shared(make_periodic_line(4, ell, N));
        const DiscreteOperator op(g, 0.0, 0.0);
        const double k = 2 * kPi / ell;
        const Field f = sample(*g, [&](double r, double) { return std::cos(k * r); });
        const Field want = sample(*g, [&](double r, double) { return -k * k * std::cos(k * r); });
        return max_abs_error(op.apply(f), want);
    };
    auto theta_error = [](int N) {
        auto g = shared(make_polar_arc(4, N));
        const DiscreteOperator op(g, 0.0, 0.0);
        const Field f = sample(*g, [](double, double th) { return std::cos(th); });
        const Field want = sample(*g, [](double, double th) { return -3.0 * std::cos(th); });
        return max_abs_error(op.apply(f), want);
    };
    const double r1 = std::log2(rho_error(32) / rho_error(64));
    const double r2 = std::log2(theta_error(64) / theta_error(128));
    CHECK(r1 >= 1.8);
    CHECK(r1 <= 2.2);
    CHECK(r2 >= 1.8);
    CHECK(r2 <= 2.2);
    CHECK(theta_error(128) < 1e-3);
}

TEST_CASE("drift term acts on rho")
{
    const double ell = 4.0;
    auto g = shared(make_periodic_line(4, ell, 256));
    const DiscreteOperator with(g, 1.0, 0.0), without(g, 0.0, 0.0);
    const double k = 2 * kPi / ell;
    const Field f = sample(*g, [&](double r, double) { return std::sin(k * r); });
    const Field a = with.apply(f), b = without.apply(f);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(a[i] - b[i] == Approx(k * std::cos(k * g->rho_at(i))).epsilon(1e-3).scale(1.0));
}

TEST_CASE("self-adjointness in the weighted inner product when a = 0")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto g : {shared(make_polar_arc(4, 40)), shared(make_periodic_line(5, 6.0, 33)),
                   shared(make_tensor_grid(4, 5.0, 20, 18))}) {
        const DiscreteOperator op(g, 0.0, -0.8);
        for (int trial = 0; trial < 5; ++trial) {
            // smooth random fields: a few low modes with random coefficients
            const double c[] = {u(rng), u(rng), u(rng), u(rng)};
            const double d[] = {u(rng), u(rng), u(rng), u(rng)};
            auto field = [&](const double* q) {
                return sample(*g, [&](double r, double th) {
                    return q[0] + q[1] * std::cos(th) + q[2] * std::sin(r) + q[3] * std::cos(2 * th) * std::cos(r);
                });
            };
            const Field x = field(c), y = field(d);
            const Field ax = op.apply(x), ay = op.apply(y);
            double lhs = 0, rhs = 0, nx = 0, ny = 0;
            for (std::size_t k = 0; k < x.size(); ++k) {
                lhs += g->weights[k] * y[k] * ax[k];
                rhs += g->weights[k] * x[k] * ay[k];
                nx += g->weights[k] * x[k] * x[k];
                ny += g->weights[k] * y[k] * y[k];
            }
            CHECK(std::abs(lhs - rhs) <= 1e-8 * std::sqrt(nx * ny));
        }
    }
}

TEST_CASE("pole regularity")
{
    auto g = shared(make_polar_arc(5, 64));
    const DiscreteOperator op(g, 0.0, 0.0);
    const Field f = sample(*g, [](double, double th) { return std::cos(th) * std::cos(th); });
    const Field out = op.apply(f);
    for (double x : out) CHECK(std::isfinite(x));
    // f_tt + (n-2) cot(t) f_t with f = cos^2, at the first cell
    const double th = g->theta.front();
    const double want = 2.0 * std::sin(th) * std::sin(th) - 2.0 * std::cos(th) * std::cos(th) -
                        2.0 * (5 - 2) * std::cos(th) * std::cos(th);
    CHECK(out.front() == Approx(want).epsilon(5e-3));
}

TEST_CASE("shifted solves invert the operator")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (auto g : {shared(make_polar_arc(4, 50)), shared(make_periodic_line(4, 6.0, 40)),
                   shared(make_tensor_grid(4, 5.0, 20, 20))}) {
        for (double a : {0.0, 0.5}) {
            const DiscreteOperator op(g, a, -1.0);
            Field shift(g->size()), rhs(g->size());
            for (std::size_t k = 0; k < shift.size(); ++k) {
                shift[k] = 50.0 * u(rng);
                rhs[k] = u(rng);
            }
            const Field x = op.solve_shifted(shift, rhs);
            const Field ax = op.apply(x);
            double err = 0.0;
            for (std::size_t k = 0; k < x.size(); ++k) err = std::max(err, std::abs(shift[k] * x[k] - ax[k] - rhs[k]));
            CHECK(err < 1e-8);
        }
    }
}

TEST_CASE("grid JSON round trip")
{
    const Grid g = make_tensor_grid(4, 5.5, 20, 24);
    const Grid h = grid_from_json(to_json(g));
    CHECK(h.kind == g.kind);
    CHECK(h.n_rho == g.n_rho);
    CHECK(h.n_theta == g.n_theta);
    CHECK(h.ell == g.ell);
    CHECK(h.weights == g.weights);
}
