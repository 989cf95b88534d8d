#ifndef FDE_DIAGNOSTICS_HPP
#define FDE_DIAGNOSTICS_HPP

/**
 * @file diagnostics.hpp
 * @brief Monotone quantities of the flow, profile classification against the
 *        closed-form limit set, and convergence-rate fitting.
 *
 * All integrals use the grid's cell volumes and the operator's face
 * conductances, so the discrete quantities satisfy the same summation-by-parts
 * identities as the discrete flow.
 */

#include <optional>
#include <span>
#include <stdexcept>

#include <json.hpp>

#include "fde/constants.hpp"
#include "fde/geometry.hpp"
#include "fde/trajectory.hpp"

namespace fde {

/// Raised when no candidate profile is within tolerance of a terminal field.
class NoCandidateFits : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a rate fit has too few usable samples.
class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EnergyReport {
    double H = 0.0;
    double J = std::numeric_limits<double>::quiet_NaN();
    double zeta = 0.0;
    double lp1_norm = 0.0;
    double mass = 0.0;  ///< integral of v^{p+1}
    double sup = 0.0;
    double inf = 0.0;
    double harnack_ratio = 1.0;
};

/// (integral of |f|^q)^{1/q}
double lp_norm(const Grid& grid, std::span<const double> f, double q);

/// Weighted L2 distance between two fields.
double l2_distance(const Grid& grid, std::span<const double> f, std::span<const double> g);

double sup_distance(std::span<const double> f, std::span<const double> g);

/// integral of v L v with L = -(Lap + b); the drift does not enter.
double quadratic_form(const DiscreteOperator& op, std::span<const double> v);

/// H(v) = int v L v / (int v^{p+1})^{2/(p+1)}
double rayleigh_quotient(const DiscreteOperator& op, std::span<const double> v, double p);

/// J(v) = 1/2 int |grad v|^2 - b/2 int v^2 - p/((p^2-1) T) int v^{p+1}
double energy_J(const DiscreteOperator& op, std::span<const double> v, double p, double t_star);

/// (int v^{p+1})^{(p-1)/(p+1)}
double zeta(const Grid& grid, std::span<const double> v, double p);

/// 4p/(p+1)^2 int ((v^{(p+1)/2})_t)^2, from two states dt apart.
double energy_dissipation(const Grid& grid, std::span<const double> v_old,
                          std::span<const double> v_new, double dt, double p);

EnergyReport energy_report(const DiscreteOperator& op, std::span<const double> v, double p,
                           std::optional<double> t_star = std::nullopt);

/// Which closed-form limits classify_profile may consider.
struct CandidateSet {
    bool constant = true;
    bool bubble = false;
    bool fowler = false;
};

/// Candidates that exist for the given problem: bubbles on the sphere at
/// p = (n+1)/(n-3), Fowler orbits on cylinders at p = (n+2)/(n-2).
CandidateSet default_candidates(const ProblemSpec& spec);

struct ProfileFit {
    ClosedFormProfile profile;
    double residual_sup = 0.0;
    double residual_l2 = 0.0;
    int fowler_k = 0;  ///< number of Fowler periods per ell
    Field fitted;

    nlohmann::json to_json() const;
};

/// Rescaled constant, bubble and Fowler fits; each throws DomainError when the
/// candidate does not exist for the grid or exponent.
ProfileFit fit_constant(const Grid& grid, std::span<const double> v, const ProblemSpec& spec,
                        double t_star);
ProfileFit fit_bubble(const Grid& grid, std::span<const double> v, const ProblemSpec& spec,
                      double t_star);
ProfileFit fit_fowler(const Grid& grid, std::span<const double> v, const ProblemSpec& spec,
                      double t_star);

/// Best candidate by sup residual. Throws NoCandidateFits when every residual
/// exceeds 0.1 ||v||_inf.
ProfileFit classify_profile(const Grid& grid, std::span<const double> v, const ProblemSpec& spec,
                            double t_star, CandidateSet candidates);

/// First integral at every node of a rho-dependent field, derivatives by
/// fourth-order central differences along rho. Input at t_star = 1 scaling.
std::vector<double> pointwise_first_integral(const Grid& grid, std::span<const double> v, int n,
                                             double p);

struct RateFit {
    double gamma = 0.0;
    double prefactor = 0.0;
    double quality = 0.0;  ///< R^2 of the log-log fit
    int samples = 0;
    bool at_limit = false;  ///< error below tolerance throughout; gamma = +inf
};

/**
 * @brief Fits ||v(t) - limit||_{L2} ~ C t^{-gamma} on the final two decades of
 *        error decay before the error floor, restricted to t > 1.
 *
 * Requires trajectory.history. Exponential decay shows up as a large gamma;
 * only gamma > 0 carries meaning.
 */
RateFit fit_rate(const TrajectoryRecord& trajectory, const Grid& grid,
                 std::span<const double> limit);

/// Fills residual_to_limit (relative sup distance) for every row that has a
/// history state.
void annotate_residuals(TrajectoryRecord& trajectory, std::span<const double> limit);

}  // namespace fde

#endif  // FDE_DIAGNOSTICS_HPP
