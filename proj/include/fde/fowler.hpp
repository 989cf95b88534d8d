#ifndef FDE_FOWLER_HPP
#define FDE_FOWLER_HPP

/**
 * @file fowler.hpp
 * @brief Phase-plane tools for the stationary ODE at the critical exponent
 *        p = (n+2)/(n-2):
 *
 *     v'' + b v + (p/(p-1)) v^p = 0,   b = -(n-2)^2/4,
 *
 * written at the t_star = 1 normalization. Callers comparing with a rescaled
 * flow multiply by t_star^{1/(p-1)}.
 *
 * The first integral is E = v'^2/2 + U(v) with U(v) = b v^2/2 + p v^{p+1}/((p-1)(p+1)).
 * Bounded nonconstant orbits have E in (E_c, 0) where E_c = U(center); their
 * minimal period increases from 2 pi/sqrt(n-2) (harmonic limit at the center)
 * to infinity (homoclinic limit as E -> 0).
 */

#include <vector>

#include "fde/constants.hpp"
#include "fde/geometry.hpp"

namespace fde {

/// Orbit left the bounded region (v <= 0 or E >= 0).
class UnboundedOrbit : public DomainError {
public:
    using DomainError::DomainError;
};

/// Requested period is at or below the harmonic threshold.
class NoFowlerSolution : public DomainError {
public:
    using DomainError::DomainError;
};

struct FowlerState {
    double v = 0.0;
    double dv = 0.0;
};

struct OrbitSample {
    double rho = 0.0;
    double v = 0.0;
    double dv = 0.0;
};

struct OrbitDescriptor {
    double energy = 0.0;
    double v_min = 0.0;
    double v_max = 0.0;
    double period = 0.0;
};

/// Rejects p that is not the critical exponent of dimension n.
void require_critical(int n, double p);

double fowler_potential(double v, int n, double p);
double first_integral(FowlerState state, int n, double p);

/// The constant solution (equilibrium) of the ODE.
double fowler_center(int n, double p);
double fowler_center_energy(int n, double p);

/// 2 pi / sqrt(n - 2)
double fowler_period_threshold(int n);

/// Fixed-step classical RK4. Returns steps+1 samples starting at rho = 0.
std::vector<OrbitSample> integrate_orbit(FowlerState start, double length, int n, double p,
                                         int steps);

/// (v_min, v_max) with U(v) = E on either side of the center.
std::pair<double, double> turning_points(double energy, int n, double p);

/// Minimal period by quadrature between turning points.
double minimal_period(double energy, int n, double p);

OrbitDescriptor describe_orbit(double energy, int n, double p);

/// Minimal period measured by integrating from (v_max, 0) until the orbit
/// returns to its maximum; independent of the quadrature route.
double return_period(double energy, int n, double p, int steps_per_threshold = 10000);

/// Energy whose minimal period equals the target.
double energy_for_period(double period, int n, double p);

/**
 * @brief Samples the Fowler solution with minimal period ell/k on a grid.
 *
 * The orbit maximum sits at rho = phase. k = 0 returns the constant solution.
 * Throws NoFowlerSolution when ell/k is at or below the threshold.
 */
Field fowler_on_grid(double ell, int k, double phase, int n, double p, const Grid& grid);

}  // namespace fde

#endif  // FDE_FOWLER_HPP
