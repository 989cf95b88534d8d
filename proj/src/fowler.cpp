#include "fde/fowler.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace fde {

namespace {

struct OdeParams {
    double b;
    double nonlinear;  // p/(p-1)
    double potential;  // p/((p-1)(p+1))
    double p;
};

OdeParams params(int n, double p)
{
    require_critical(n, p);
    return {derive_coefficients(n, p).b, p / (p - 1.0), p / ((p - 1.0) * (p + 1.0)), p};
}

FowlerState rhs(const OdeParams& o, FowlerState s)
{
    return {s.dv, -o.b * s.v - o.nonlinear * std::pow(s.v, o.p)};
}

FowlerState rk4_step(const OdeParams& o, FowlerState s, double h)
{
    const FowlerState k1 = rhs(o, s);
    const FowlerState k2 = rhs(o, {s.v + 0.5 * h * k1.v, s.dv + 0.5 * h * k1.dv});
    const FowlerState k3 = rhs(o, {s.v + 0.5 * h * k2.v, s.dv + 0.5 * h * k2.dv});
    const FowlerState k4 = rhs(o, {s.v + h * k3.v, s.dv + h * k3.dv});
    return {s.v + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
            s.dv + h / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv)};
}

// (x^q - y^q)/(x - y) without cancellation when x is close to y.
double power_divided_difference(double x, double y, double q)
{
    const double d = x - y;
    if (d == 0.0) return q * std::pow(y, q - 1.0);
    return std::pow(y, q) * std::expm1(q * std::log1p(d / y)) / d;
}

// (U(x) - U(y)) / (x - y)
double potential_slope(const OdeParams& o, double x, double y)
{
    return 0.5 * o.b * (x + y) + o.potential * power_divided_difference(x, y, o.p + 1.0);
}

double potential(const OdeParams& o, double v)
{
    return 0.5 * o.b * v * v + o.potential * std::pow(v, o.p + 1.0);
}

void check_energy(int n, double p, double energy)
{
    const double ec = fowler_center_energy(n, p);
    if (!(energy > ec) || !(energy < 0.0))
        throw DomainError("orbit energy must lie strictly between the center energy and 0");
}

}  // namespace

void require_critical(int n, double p)
{
    const double pc = yamabe_exponent(n);
    if (std::abs(p - pc) > 1e-12 * pc)
        throw DomainError("Fowler orbits are defined only at p = (n+2)/(n-2)");
}

double fowler_potential(double v, int n, double p) { return potential(params(n, p), v); }

double first_integral(FowlerState state, int n, double p)
{
    return 0.5 * state.dv * state.dv + fowler_potential(state.v, n, p);
}

double fowler_center(int n, double p)
{
    const OdeParams o = params(n, p);
    return std::pow(-o.b / o.nonlinear, 1.0 / (p - 1.0));
}

double fowler_center_energy(int n, double p)
{
    return fowler_potential(fowler_center(n, p), n, p);
}

double fowler_period_threshold(int n)
{
    if (n < 3) throw DomainError("n must be at least 3");
    return 2.0 * std::numbers::pi / std::sqrt(n - 2.0);
}

std::vector<OrbitSample> integrate_orbit(FowlerState start, double length, int n, double p,
                                         int steps)
{
    const OdeParams o = params(n, p);
    if (steps < 1) throw DomainError("steps must be positive");
    if (!(length > 0.0)) throw DomainError("orbit length must be positive");
    if (!(start.v > 0.0)) throw UnboundedOrbit("orbit must start at v > 0");
    if (!(first_integral(start, n, p) < 0.0))
        throw UnboundedOrbit("orbit energy must be negative for a bounded orbit");
    const double h = length / steps;
    std::vector<OrbitSample> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    FowlerState s = start;
    out.push_back({0.0, s.v, s.dv});
    for (int i = 1; i <= steps; ++i) {
        s = rk4_step(o, s, h);
        if (!(s.v > 0.0) || !std::isfinite(s.dv))
            throw UnboundedOrbit("orbit reached v <= 0");
        if (!(0.5 * s.dv * s.dv + potential(o, s.v) < 0.0))
            throw UnboundedOrbit("orbit energy drifted to E >= 0");
        out.push_back({i * h, s.v, s.dv});
    }
    return out;
}

std::pair<double, double> turning_points(double energy, int n, double p)
{
    check_energy(n, p, energy);
    const OdeParams o = params(n, p);
    const double center = fowler_center(n, p);
    // U decreases on (0, center) and increases on (center, inf)
    double lo = 0.0, hi = center;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * center; ++it) {
        const double mid = 0.5 * (lo + hi);
        (potential(o, mid) > energy ? lo : hi) = mid;
    }
    const double v_min = 0.5 * (lo + hi);
    lo = center;
    hi = 2.0 * center;
    while (potential(o, hi) < energy) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * center; ++it) {
        const double mid = 0.5 * (lo + hi);
        (potential(o, mid) < energy ? lo : hi) = mid;
    }
    return {v_min, 0.5 * (lo + hi)};
}

double minimal_period(double energy, int n, double p)
{
    const OdeParams o = params(n, p);
    const auto [v_min, v_max] = turning_points(energy, n, p);
    const double v_mid = 0.5 * (v_min + v_max);
    using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
    // v = v_min + s^2 on the lower half and v = v_max - s^2 on the upper half;
    // the inverse square root at the turning point cancels against dv = 2 s ds.
    auto lower = [&](double s) {
        const double v = v_min + s * s;
        return 2.0 / std::sqrt(-2.0 * potential_slope(o, v_min, v));
    };
    auto upper = [&](double s) {
        const double v = v_max - s * s;
        return 2.0 / std::sqrt(2.0 * potential_slope(o, v_max, v));
    };
    const double half = Quad::integrate(lower, 0.0, std::sqrt(v_mid - v_min), 15, 1e-14) +
                        Quad::integrate(upper, 0.0, std::sqrt(v_max - v_mid), 15, 1e-14);
    return 2.0 * half;
}

OrbitDescriptor describe_orbit(double energy, int n, double p)
{
    const auto [v_min, v_max] = turning_points(energy, n, p);
    return {energy, v_min, v_max, minimal_period(energy, n, p)};
}

double return_period(double energy, int n, double p, int steps_per_threshold)
{
    const OdeParams o = params(n, p);
    const auto tp = turning_points(energy, n, p);
    const double h = fowler_period_threshold(n) / steps_per_threshold;
    FowlerState s{tp.second, 0.0};
    double rho = 0.0;
    bool rising = false;
    // Leave the maximum (dv < 0), pass the minimum (dv turns positive), then
    // stop when dv turns negative again: that is the return to the maximum.
    for (long it = 0; it < 1000L * steps_per_threshold; ++it) {
        const FowlerState next = rk4_step(o, s, h);
        if (!(next.v > 0.0)) throw UnboundedOrbit("orbit reached v <= 0");
        if (!rising && s.dv < 0.0 && next.dv >= 0.0) rising = true;
        if (rising && s.dv > 0.0 && next.dv <= 0.0) {
            // secant on the partial step length for dv = 0
            double a = 0.0, fa = s.dv, c = h, fc = next.dv;
            for (int k = 0; k < 50 && std::abs(c - a) > 1e-15 * h; ++k) {
                const double m = a - fa * (c - a) / (fc - fa);
                const double fm = rk4_step(o, s, m).dv;
                if ((fm > 0.0) == (fa > 0.0)) { a = m; fa = fm; }
                else { c = m; fc = fm; }
                if (fm == 0.0) { a = c = m; }
            }
            return rho + 0.5 * (a + c);
        }
        s = next;
        rho += h;
    }
    throw UnboundedOrbit("orbit did not return to its maximum");
}

double energy_for_period(double period, int n, double p)
{
    require_critical(n, p);
    const double threshold = fowler_period_threshold(n);
    if (!(period > threshold))
        throw NoFowlerSolution("no Fowler solution with period " + std::to_string(period) +
                               " <= " + std::to_string(threshold));
    double lo = fowler_center_energy(n, p);
    double hi = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (minimal_period(mid, n, p) < period ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Field fowler_on_grid(double ell, int k, double phase, int n, double p, const Grid& grid)
{
    require_critical(n, p);
    if (!grid.has_rho()) throw DomainError("Fowler samples need a grid with a rho axis");
    if (k < 0) throw DomainError("k must be non-negative");
    if (k == 0) return Field(grid.size(), fowler_center(n, p));
    const double period = ell / k;
    const double energy = energy_for_period(period, n, p);
    const auto [v_min, v_max] = turning_points(energy, n, p);
    (void)v_min;
    const OdeParams o = params(n, p);
    const int m = std::max(8192, 32 * grid.n_rho);
    const auto orbit = integrate_orbit({v_max, 0.0}, period, n, p, m);
    const double h = period / m;
    Field out(grid.size());
    for (std::size_t idx = 0; idx < out.size(); ++idx) {
        double s = std::fmod(grid.rho_at(idx) - phase, period);
        if (s < 0.0) s += period;
        const std::size_t base = std::min(static_cast<std::size_t>(s / h), orbit.size() - 1);
        const OrbitSample& o0 = orbit[base];
        out[idx] = rk4_step(o, {o0.v, o0.dv}, s - o0.rho).v;
    }
    return out;
}

}  // namespace fde
