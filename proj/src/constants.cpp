#include "fde/constants.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fde {

std::string to_string(Geometry g)
{
    switch (g) {
    case Geometry::CylinderRho: return "cylinder_rho";
    case Geometry::SphereAxisym: return "sphere_axisym";
    case Geometry::CylinderFull: return "cylinder_full";
    }
    return "unknown";
}

Geometry geometry_from_string(const std::string& s)
{
    if (s == "cylinder_rho") return Geometry::CylinderRho;
    if (s == "sphere_axisym") return Geometry::SphereAxisym;
    if (s == "cylinder_full") return Geometry::CylinderFull;
    throw DomainError("unknown geometry '" + s + "'");
}

std::string to_string(ProfileKind k)
{
    switch (k) {
    case ProfileKind::SingularBarenblatt: return "singular_barenblatt";
    case ProfileKind::StationaryConstant: return "constant";
    case ProfileKind::Bubble: return "bubble";
    case ProfileKind::FowlerOrbit: return "fowler";
    }
    return "unknown";
}

Coefficients ProblemSpec::coefficients() const { return derive_coefficients(n, p); }

ProblemSpec ProblemSpec::make(int n, std::optional<double> m, std::optional<double> p,
                              Geometry geometry, double ell, std::optional<double> t_star)
{
    if (!m && !p) throw DomainError("either m or p must be given");
    double pv = p ? *p : 1.0 / *m;
    if (m && p) {
        if (!(*m > 0.0) || std::abs(*m * *p - 1.0) > 1e-12)
            throw DomainError("inconsistent exponents: p*m must equal 1");
    }
    if (n < 3) throw DomainError("dimension n must be at least 3");
    if (!(pv > 1.0) || !std::isfinite(pv)) throw DomainError("p must be finite and > 1");
    ProblemSpec spec;
    spec.n = n;
    spec.p = pv;
    spec.geometry = geometry;
    spec.ell = ell;
    spec.t_star = t_star;
    if (spec.has_rho() && !(ell > 0.0)) throw DomainError("cylinder geometries need ell > 0");
    if (t_star && !(*t_star > 0.0)) throw DomainError("t_star must be positive");
    return spec;
}

double sphere_area(int k)
{
    if (k < 0) throw DomainError("sphere dimension must be non-negative");
    const double half = 0.5 * (k + 1);
    return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

double yamabe_exponent(int n)
{
    if (n < 3) throw DomainError("n must be at least 3");
    return (n + 2.0) / (n - 2.0);
}

double bubble_exponent(int n)
{
    if (n <= 3) throw DomainError("bubbles need n > 3");
    return (n + 1.0) / (n - 3.0);
}

Coefficients derive_coefficients(int n, double p)
{
    if (n < 3) throw DomainError("n must be at least 3");
    if (!(p > 1.0)) throw DomainError("p must be > 1");
    const double nm2 = n - 2.0;
    Coefficients c;
    c.a = nm2 / (p - 1.0) * (p - (n + 2.0) / nm2);
    c.b = 2.0 * nm2 / ((p - 1.0) * (p - 1.0)) * (n / nm2 - p);
    return c;
}

double critical_marcinkiewicz_exponent(int n, double m)
{
    if (n < 3) throw DomainError("n must be at least 3");
    if (!(m > 0.0) || !(m < (n - 2.0) / n))
        throw DomainError("m must lie in (0, (n-2)/n)");
    return n * (1.0 - m) / 2.0;
}

double stationary_constant(int n, double p, double t_star)
{
    if (n < 3) throw DomainError("n must be at least 3");
    if (!(p > 1.0)) throw DomainError("p must be > 1");
    if (!(t_star > 0.0)) throw DomainError("t_star must be positive");
    const double k = (n - 2.0) * p - n;
    if (!(k > 0.0)) throw DomainError("constant state needs (n-2)p > n");
    return std::pow(2.0 * t_star * k / (p * (p - 1.0)), 1.0 / (p - 1.0));
}

double singular_barenblatt(int n, double m, double t_star, double t, double r)
{
    if (n < 3) throw DomainError("n must be at least 3");
    if (!(m > 0.0) || !(m < (n - 2.0) / n))
        throw DomainError("m must lie in (0, (n-2)/n)");
    if (!(r > 0.0)) throw DomainError("r must be positive");
    if (!(t < t_star)) throw DomainError("t must precede the extinction time");
    const double e = 1.0 / (1.0 - m);
    const double c = std::pow(2.0 * m * (n - 2.0 - n * m) / (1.0 - m), e);
    return c * std::pow((t_star - t) / (r * r), e);
}

double bubble_profile(int n, double cos_dist, double lambda)
{
    if (n <= 3) throw DomainError("bubbles need n > 3");
    if (!(lambda > 1.0)) throw DomainError("lambda must exceed 1");
    if (!(cos_dist >= -1.0 - 1e-12 && cos_dist <= 1.0 + 1e-12))
        throw DomainError("cos(dist) must lie in [-1, 1]");
    const double amp = std::pow((n - 1.0) * (n - 3.0) / (n + 1.0), (n - 3.0) / 4.0);
    // sqrt(l^2-1) = sqrt((l-1)(l+1)) keeps digits for l close to 1
    const double ratio = std::sqrt((lambda - 1.0) * (lambda + 1.0)) / (lambda - cos_dist);
    return amp * std::pow(ratio, (n - 3.0) / 2.0);
}

double bubble_profile(int n, std::span<const double> theta0, double lambda,
                      std::span<const double> theta)
{
    if (theta0.size() != static_cast<std::size_t>(n) || theta.size() != theta0.size())
        throw DomainError("points on S^{n-1} need n coordinates");
    double dot = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) dot += theta0[i] * theta[i];
    return bubble_profile(n, std::clamp(dot, -1.0, 1.0), lambda);
}

}  // namespace fde
