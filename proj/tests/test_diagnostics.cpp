#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "fde/diagnostics.hpp"
#include "fde/fowler.hpp"

using namespace fde;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const Grid> arc(int n, int N) { return std::make_shared<const Grid>(make_polar_arc(n, N)); }
std::shared_ptr<const Grid> line(double ell, int N) { return std::make_shared<const Grid>(make_periodic_line(4, ell, N)); }

double spread(const std::vector<double>& e)
{
    const auto [lo, hi] = std::minmax_element(e.begin(), e.end());
    return *hi - *lo;
}

}  // namespace

TEST_CASE("H, zeta and J of constants on the three-sphere")
{
    auto g = arc(4, 64);
    const DiscreteOperator op(g, 0.0, -1.0);
    for (double c : {0.3, 1.0, 7.0}) {
        const Field v(g->size(), c);
        CHECK(rayleigh_quotient(op, v, 3.0) == Approx(std::sqrt(2.0) * kPi).epsilon(1e-12));
    }
    const Field one(g->size(), 1.0);
    CHECK(zeta(*g, one, 3.0) == Approx(std::sqrt(2.0) * kPi).epsilon(1e-12));
    CHECK(energy_J(op, one, 3.0, 1.5) == Approx(kPi * kPi / 2.0).epsilon(1e-12));
    CHECK(std::abs(energy_J(op, Field(g->size(), 1e-6), 3.0, 1.5)) < 1e-10);

    const EnergyReport r = energy_report(op, one, 3.0, 1.5);
    CHECK(r.H == Approx(std::sqrt(2.0) * kPi).epsilon(1e-12));
    CHECK(r.harnack_ratio == 1.0);
    CHECK(std::isnan(energy_report(op, one, 3.0).J));
}

TEST_CASE("scale behaviour of H and zeta")
{
    auto g = arc(4, 40);
    const DiscreteOperator op(g, 0.0, -1.0);
    const Field v = sample(*g, [](double, double th) { return 1.0 + 0.4 * std::cos(th); });
    for (double mu : {1e-3, 0.5, 3.0, 1e3}) {
        Field w = v;
        for (double& x : w) x *= mu;
        CHECK(rayleigh_quotient(op, w, 3.0) == Approx(rayleigh_quotient(op, v, 3.0)).epsilon(1e-12));
        CHECK(zeta(*g, w, 3.0) == Approx(std::pow(mu, 2.0) * zeta(*g, v, 3.0)).epsilon(1e-12));
        CHECK(zeta(*g, w, 5.0) == Approx(std::pow(mu, 4.0) * zeta(*g, v, 5.0)).epsilon(1e-12));
    }
}

TEST_CASE("Harnack ratio of a nonconstant field")
{
    auto g = arc(4, 40);
    const DiscreteOperator op(g, 0.0, -1.0);
    const Field v = sample(*g, [](double, double th) { return 2.0 + std::cos(th); });
    const EnergyReport r = energy_report(op, v, 3.0, 1.0);
    CHECK(r.harnack_ratio == Approx(r.sup / r.inf));
    CHECK(r.harnack_ratio > 1.0);
}

TEST_CASE("classification: exact constant")
{
    auto g = arc(4, 64);
    const ProblemSpec spec = ProblemSpec::make(4, std::nullopt, 3.0, Geometry::SphereAxisym);
    const Field v(g->size(), stationary_constant(4, 3.0, 1.3));
    const ProfileFit f = classify_profile(*g, v, spec, 1.3, default_candidates(spec));
    CHECK(f.profile.kind == ProfileKind::StationaryConstant);
    CHECK(f.residual_sup < 1e-14);
    CHECK(f.to_json()["kind"] == "constant");
}

TEST_CASE("classification: bubble round trip and reflection gauge")
{
    auto g = arc(4, 128);
    const ProblemSpec spec = ProblemSpec::make(4, std::nullopt, 5.0, Geometry::SphereAxisym);
    const double t_star = 0.8, scale = std::pow(t_star, 0.25);
    const Field v = sample(*g, [&](double, double th) { return scale * bubble_profile(4, std::cos(th), 2.0); });
    const ProfileFit f = classify_profile(*g, v, spec, t_star, default_candidates(spec));
    CHECK(f.profile.kind == ProfileKind::Bubble);
    CHECK(f.profile.lambda == Approx(2.0).epsilon(1e-3));
    CHECK(f.profile.theta0 == Approx(0.0).scale(1.0));

    Field reflected(v.rbegin(), v.rend());
    const ProfileFit r = classify_profile(*g, reflected, spec, t_star, default_candidates(spec));
    CHECK(r.profile.kind == ProfileKind::Bubble);
    CHECK(r.profile.theta0 == Approx(kPi));
    CHECK(r.residual_sup == Approx(f.residual_sup).epsilon(1e-10).scale(1.0));
    CHECK(r.profile.lambda == Approx(f.profile.lambda).epsilon(1e-10));
}

TEST_CASE("classification: Fowler round trip and translation gauge")
{
    auto g = line(6.0, 256);
    const ProblemSpec spec = ProblemSpec::make(4, std::nullopt, 3.0, Geometry::CylinderRho, 6.0);
    const double e = energy_for_period(6.0, 4, 3.0);
    const Field v = fowler_on_grid(6.0, 1, 0.0, 4, 3.0, *g);
    const ProfileFit f = classify_profile(*g, v, spec, 1.0, default_candidates(spec));
    CHECK(f.profile.kind == ProfileKind::FowlerOrbit);
    CHECK(f.profile.energy == Approx(e).epsilon(1e-6).scale(1.0));

    // shift by 32 cells
    Field shifted(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) shifted[(i + 32) % v.size()] = v[i];
    const ProfileFit s = classify_profile(*g, shifted, spec, 1.0, default_candidates(spec));
    CHECK(s.profile.kind == ProfileKind::FowlerOrbit);
    const double delta = 32 * g->d_rho;
    double dphase = std::remainder(s.profile.phase - f.profile.phase - delta, 6.0);
    CHECK(std::abs(dphase) < 1e-8);
    CHECK(s.residual_sup == Approx(f.residual_sup).epsilon(1e-10).scale(1.0));

    // short cylinders admit no Fowler candidate
    const ProblemSpec short_spec = ProblemSpec::make(4, std::nullopt, 3.0, Geometry::CylinderRho, 4.0);
    auto gs = line(4.0, 64);
    CHECK_THROWS_AS(fit_fowler(*gs, Field(gs->size(), 1.0), short_spec, 1.0), DomainError);
}

TEST_CASE("no candidate fits a wild field")
{
    auto g = arc(4, 64);
    const ProblemSpec spec = ProblemSpec::make(4, std::nullopt, 3.0, Geometry::SphereAxisym);
    const Field v = sample(*g, [](double, double th) { return 1.0 + 0.9 * std::cos(5.0 * th); });
    CHECK_THROWS_AS(classify_profile(*g, v, spec, 1.0, default_candidates(spec)), NoCandidateFits);
}

TEST_CASE("pointwise first integral of a sampled Fowler solution")
{
    auto g = line(6.0, 512);
    const Field v = fowler_on_grid(6.0, 1, 0.0, 4, 3.0, *g);
    const std::vector<double> e = pointwise_first_integral(*g, v, 4, 3.0);
    CHECK(spread(e) <= 1e-6);
    CHECK(e.front() == Approx(energy_for_period(6.0, 4, 3.0)).epsilon(1e-6));
    CHECK_THROWS_AS(pointwise_first_integral(*arc(4, 32), Field(32, 1.0), 4, 3.0), DomainError);
}

TEST_CASE("rate fit")
{
    auto g = arc(4, 32);
    TrajectoryRecord at_limit;
    const Field limit(g->size(), 1.0);
    for (int k = 0; k < 30; ++k) at_limit.history.push_back({k, 0.1 * k, limit});
    const RateFit f = fit_rate(at_limit, *g, limit);
    CHECK(f.at_limit);
    CHECK(std::isinf(f.gamma));

    TrajectoryRecord empty;
    CHECK_THROWS_AS(fit_rate(empty, *g, limit), InsufficientData);

    // algebraic decay t^{-2}
    TrajectoryRecord decay;
    for (int k = 0; k < 200; ++k) {
        const double t = std::pow(10.0, -0.5 + 3.0 * k / 199.0);
        Field v = limit;
        v[0] += 1.0 / (t * t);
        decay.history.push_back({k, t, v});
    }
    const RateFit d = fit_rate(decay, *g, limit);
    CHECK(d.gamma == Approx(2.0).epsilon(1e-6));
    CHECK(d.quality > 0.999);
}
