#ifndef FDE_FLOW_HPP
#define FDE_FLOW_HPP

/**
 * @file flow.hpp
 * @brief Backward Euler integration of
 *
 *     (v^p)_t = Lap_g v + a v_rho + b v + c v^p,
 *
 * with c = 0 for the raw cylindrical flow and c = p/((p-1) T) for the flow
 * rescaled by its extinction time T.
 *
 * The rescaled flow has an unstable scaling direction: perturbing T by dT
 * makes the amplitude drift like exp(t/T) dT/T. A rescaled run therefore stays
 * near its limit only for as long as T matches the extinction time of the
 * discrete raw flow, which is why refine_extinction_time exists.
 */

#include <optional>
#include <span>
#include <stdexcept>

#include <json.hpp>

#include "fde/constants.hpp"
#include "fde/geometry.hpp"
#include "fde/trajectory.hpp"

namespace fde {

class NewtonDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PositivityLost : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// dt fell below dt_min; the message carries a diagnostic dump of the last state.
class TimeStepUnderflow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An extinction-time estimate left its analytic bracket.
class BracketViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class StopRule { TimeReached, SteadyState, ExtinctionDetected };

std::string to_string(StopRule r);
StopRule stop_rule_from_string(const std::string& s);

struct FlowConfig {
    FlowMode mode = FlowMode::Rescaled;
    std::optional<double> t_star;
    double dt_initial = 1e-3;
    double dt_min = 1e-12;
    double dt_max = 0.05;
    bool adaptive = true;
    double newton_tol = 1e-12;
    int newton_max_iter = 30;
    StopRule stop = StopRule::TimeReached;
    double t_end = 10.0;
    double steady_tol = 1e-10;
    int steady_count = 10;
    double mass_floor = 1e-4;  ///< relative to the initial integral of v^{p+1}
    DriftScheme drift = DriftScheme::Central;
    bool keep_history = false;
    /// Rescaled mode: stop once zeta leaves [ref/r, ref*r] around the zeta of
    /// the stationary constant. 0 disables.
    double divergence_ratio = 0.0;
    /// Rescaled mode: stop once the drift exceeds rebound_factor times its
    /// minimum and rebound_wait * T has passed since that minimum. 0 disables.
    double rebound_factor = 0.0;
    double rebound_wait = 5.0;
    long max_steps = 10'000'000;
    double snapshot_first = 0.1;  ///< snapshots at snapshot_first * 2^k
    /// Test hook: integrates with the sign of b reversed. Diagnostics still use
    /// the true b, so monotonicity checks must catch it.
    bool flip_b_sign = false;

    void validate() const;
    nlohmann::json to_json() const;
};

struct StepReport {
    double t_before = 0.0;
    double t_after = 0.0;
    double dt_used = 0.0;
    int newton_iterations = 0;
    double min_value = 0.0;
    double max_value = 0.0;
    bool accepted = false;
    std::string failure;  ///< empty when accepted
};

/// The operator the flow integrates with, honoring drift and flip_b_sign.
DiscreteOperator flow_operator(std::shared_ptr<const Grid> grid, const ProblemSpec& spec,
                               const FlowConfig& config);

/// c = p/((p-1) T) in rescaled mode, 0 in raw mode.
double reaction_coefficient(const ProblemSpec& spec, const FlowConfig& config);

/**
 * @brief One backward Euler step solved by damped Newton on v_new.
 *
 * Never throws on solver failure: a non-converged or non-positive result comes
 * back with accepted = false and the input state untouched in `next`.
 */
StepReport step_implicit(std::span<const double> state, double t, double dt,
                         const DiscreteOperator& op, double p, double c, const FlowConfig& config,
                         Field& next);

/// Integrates from `initial` under `config`; see TrajectoryRecord for what is kept.
TrajectoryRecord run(const Field& initial, const ProblemSpec& spec, const DiscreteOperator& op,
                     const FlowConfig& config);

/// Convenience overload that assembles the operator.
TrajectoryRecord run(const Field& initial, const ProblemSpec& spec,
                     std::shared_ptr<const Grid> grid, const FlowConfig& config);

struct ExtinctionEstimate {
    double t_star = 0.0;
    double uncertainty = 0.0;
    double lower_bound = 0.0;  ///< p zeta(0) / ((p+1) H(0))
    double upper_bound = 0.0;  ///< p zeta(0) / ((p-1) min H)
    double coarse = 0.0;       ///< root from the run at dt
    double fine = 0.0;         ///< root from the run at dt/2
    double dt = 0.0;
    TrajectoryRecord fine_run;

    nlohmann::json to_json() const;
};

struct EstimateOptions {
    double mass_floor = 1e-4;
    double dt_fraction = 2e-4;  ///< dt as a fraction of the analytic lower bound
    DriftScheme drift = DriftScheme::Central;
    bool flip_b_sign = false;
};

/**
 * @brief Extinction time of the raw flow from initial data w0.
 *
 * Fits zeta(t) linearly over the last decade of mass decay of two fixed-step
 * runs (dt and dt/2), extrapolates each root and combines them by Richardson.
 * The uncertainty is the difference of the two roots.
 */
ExtinctionEstimate estimate_extinction_time(const Field& initial, const ProblemSpec& spec,
                                            std::shared_ptr<const Grid> grid,
                                            const EstimateOptions& options = {});

struct ShootingResult {
    double t_star = 0.0;
    double lower = 0.0;  ///< largest probed T that diverged upward
    double upper = 0.0;  ///< smallest probed T that diverged downward
    int probes = 0;
};

/**
 * @brief Refines T so that the rescaled run stays bounded as long as possible.
 *
 * Probes with T too small blow up and probes with T too large collapse;
 * bisection on the direction pins T to a few ulps. The bracket is widened
 * geometrically when it does not straddle the answer.
 */
ShootingResult refine_extinction_time(const Field& initial, const ProblemSpec& spec,
                                      std::shared_ptr<const Grid> grid, const FlowConfig& base,
                                      double lo, double hi);

}  // namespace fde

#endif  // FDE_FLOW_HPP
