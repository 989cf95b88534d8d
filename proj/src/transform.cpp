#include "fde/transform.hpp"

#include <cmath>

namespace fde {

namespace {

void check_p(double p)
{
    if (!(p > 1.0)) throw DomainError("p must be > 1");
}

}  // namespace

double to_cylindrical(double u_value, double r, double p)
{
    check_p(p);
    if (!(r > 0.0)) throw DomainError("r must be positive");
    if (!(u_value >= 0.0)) throw DomainError("u must be non-negative");
    return std::pow(r, 2.0 / (p - 1.0)) * std::pow(u_value, 1.0 / p);
}

double from_cylindrical(double w_value, double r, double p)
{
    check_p(p);
    if (!(r > 0.0)) throw DomainError("r must be positive");
    if (!(w_value >= 0.0)) throw DomainError("w must be non-negative");
    return std::pow(std::pow(r, -2.0 / (p - 1.0)) * w_value, p);
}

double rescale_time(double tau, double t_star)
{
    if (!(t_star > 0.0)) throw DomainError("t_star must be positive");
    if (!(tau >= 0.0) || !(tau < t_star)) throw DomainError("tau must lie in [0, t_star)");
    // -T log1p(-tau/T) == T ln(T/(T-tau)) without cancellation for small tau
    return -t_star * std::log1p(-tau / t_star);
}

double unrescale_time(double t, double t_star)
{
    if (!(t_star > 0.0)) throw DomainError("t_star must be positive");
    if (!(t >= 0.0)) throw DomainError("rescaled time must be non-negative");
    return -t_star * std::expm1(-t / t_star);
}

double rescale_factor(double tau, double t_star, double p)
{
    check_p(p);
    if (!(t_star > 0.0)) throw DomainError("t_star must be positive");
    if (!(tau >= 0.0) || !(tau < t_star)) throw DomainError("tau must lie in [0, t_star)");
    return std::pow(t_star / (t_star - tau), 1.0 / (p - 1.0));
}

Field rescale_field(std::span<const double> w, double tau, double t_star, double p)
{
    const double f = rescale_factor(tau, t_star, p);
    Field v(w.begin(), w.end());
    for (double& x : v) x *= f;
    return v;
}

CylindricalSample to_cylindrical(const PhysicalSample& s, double p)
{
    return {std::log(s.r), s.theta, s.t, to_cylindrical(s.value, s.r, p)};
}

PhysicalSample from_cylindrical(const CylindricalSample& s, double p)
{
    const double r = std::exp(s.rho);
    return {r, s.theta, s.tau, from_cylindrical(s.value, r, p)};
}

RescaledSample rescale(const CylindricalSample& s, double t_star, double p)
{
    return {s.rho, s.theta, rescale_time(s.tau, t_star),
            rescale_factor(s.tau, t_star, p) * s.value};
}

CylindricalSample unrescale(const RescaledSample& s, double t_star, double p)
{
    const double tau = unrescale_time(s.t_rescaled, t_star);
    return {s.rho, s.theta, tau, s.value / rescale_factor(tau, t_star, p)};
}

}  // namespace fde
