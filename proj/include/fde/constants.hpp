#ifndef FDE_CONSTANTS_HPP
#define FDE_CONSTANTS_HPP

/**
 * @file constants.hpp
 * @brief Closed-form coefficients and stationary profiles of the transformed
 *        fast diffusion equation.
 *
 * Everything here is a pure function of its arguments. These values are the
 * ground truth that the discrete solvers are checked against.
 *
 * Conventions: the diffusion exponent is m in (0,1) and p = 1/m. The
 * cylindrical variable is w = r^{2/(p-1)} u^m with rho = ln r, which turns
 * u_t = Laplace(u^m) into
 *
 *     (w^p)_t = w_rhorho + Laplace_{S^{n-1}} w + a w_rho + b w.
 */

#include <optional>
#include <span>
#include <stdexcept>
#include <string>

namespace fde {

/// Raised when an argument lies outside the domain where a formula is valid.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

enum class Geometry {
    CylinderRho,   ///< periodic rho-line, theta-independent fields
    SphereAxisym,  ///< S^{n-1}, axisymmetric fields (polar angle only)
    CylinderFull,  ///< periodic rho times axisymmetric polar angle
};

std::string to_string(Geometry g);
Geometry geometry_from_string(const std::string& s);

/// Drift and zeroth-order coefficients of the cylindrical equation.
struct Coefficients {
    double a = 0.0;
    double b = 0.0;
};

/**
 * @brief Problem parameters shared by every module.
 *
 * Build through make(); the constructor does not validate.
 */
struct ProblemSpec {
    int n = 4;
    double p = 3.0;
    Geometry geometry = Geometry::SphereAxisym;
    double ell = 0.0;                ///< rho-period, required for cylinder geometries
    std::optional<double> t_star;    ///< extinction time, set for rescaled flows

    double m() const { return 1.0 / p; }
    Coefficients coefficients() const;
    bool has_rho() const { return geometry != Geometry::SphereAxisym; }
    bool has_theta() const { return geometry != Geometry::CylinderRho; }

    /// Accepts m, p or both; a pair is rejected unless p*m = 1 to 1e-12 relative.
    static ProblemSpec make(int n, std::optional<double> m, std::optional<double> p,
                            Geometry geometry, double ell = 0.0,
                            std::optional<double> t_star = std::nullopt);
};

/// Volume of the unit sphere S^k embedded in R^{k+1}: 2 pi^{(k+1)/2} / Gamma((k+1)/2).
double sphere_area(int k);

/// (n+2)/(n-2): the exponent at which a = 0 and the equation is conformally invariant.
double yamabe_exponent(int n);

/// (n+1)/(n-3): the exponent for which rho-independent stationary states include bubbles.
double bubble_exponent(int n);

Coefficients derive_coefficients(int n, double p);

/// n(1-m)/2, valid for 0 < m < (n-2)/n.
double critical_marcinkiewicz_exponent(int n, double m);

/// Spatially constant stationary state (2 T ((n-2)p - n) / (p (p-1)))^{1/(p-1)}.
double stationary_constant(int n, double p, double t_star);

/// Explicit singular solution of u_t = Laplace(u^m) extinguishing at t_star.
double singular_barenblatt(int n, double m, double t_star, double t, double r);

/**
 * @brief Bubble on S^{n-1} at p = (n+1)/(n-3), normalized for t_star = 1.
 *
 * The geodesic distance enters only through cos(dist(theta, theta0)); callers
 * pass the inner product of the two unit vectors.
 */
double bubble_profile(int n, double cos_dist, double lambda);

/// Same, for explicit points on S^{n-1} (unit vectors of length n).
double bubble_profile(int n, std::span<const double> theta0, double lambda,
                      std::span<const double> theta);

enum class ProfileKind { SingularBarenblatt, StationaryConstant, Bubble, FowlerOrbit };

std::string to_string(ProfileKind k);

/// Label for a closed-form limit. Bubble carries (theta0 as polar angle, lambda),
/// FowlerOrbit carries its first-integral value and phase.
struct ClosedFormProfile {
    ProfileKind kind = ProfileKind::StationaryConstant;
    double theta0 = 0.0;   ///< polar angle of the bubble center (0 or pi on axisymmetric grids)
    double lambda = 0.0;
    double energy = 0.0;
    double phase = 0.0;
};

}  // namespace fde

#endif  // FDE_CONSTANTS_HPP
