#ifndef FDE_TRAJECTORY_HPP
#define FDE_TRAJECTORY_HPP

#include <limits>
#include <string>
#include <vector>

#include "fde/geometry.hpp"

namespace fde {

enum class FlowMode { Raw, Rescaled };

std::string to_string(FlowMode m);
FlowMode flow_mode_from_string(const std::string& s);

enum class StopReason {
    TimeReached,
    SteadyState,
    ExtinctionDetected,
    DivergedUp,      ///< rescaled amplitude grew past the divergence ratio
    DivergedDown,    ///< rescaled amplitude decayed past the divergence ratio
    DriftRebounded,  ///< drift rose far above its minimum after passing it
    StepLimit,
};

std::string to_string(StopReason r);

/// One line of the diagnostic time series.
struct DiagnosticRow {
    long step = 0;
    double t = 0.0;             ///< integration time (rescaled time in rescaled mode)
    double tau_physical = 0.0;  ///< cylindrical time tau
    double dt = 0.0;
    double zeta = 0.0;
    double H = 0.0;
    double J = std::numeric_limits<double>::quiet_NaN();
    double sup_v = 0.0;
    double inf_v = 0.0;
    double harnack_ratio = 1.0;
    double residual_to_limit = std::numeric_limits<double>::quiet_NaN();
    double mass = 0.0;   ///< integral of v^{p+1}
    double drift = 0.0;  ///< max |v_new - v_old| / dt over the step
    int newton_iterations = 0;
};

struct Snapshot {
    long step = 0;
    double t = 0.0;
    Field values;
};

struct TrajectoryRecord {
    FlowMode mode = FlowMode::Rescaled;
    double t_star = std::numeric_limits<double>::quiet_NaN();
    std::vector<DiagnosticRow> rows;     ///< row 0 is the initial state
    std::vector<Snapshot> snapshots;     ///< geometric schedule in t
    std::vector<Snapshot> history;       ///< every accepted state when requested
    Field terminal;                      ///< last accepted state
    Field best;                          ///< accepted state with the smallest drift
    std::size_t best_row = 0;
    StopReason stop = StopReason::TimeReached;
    long rejected_steps = 0;
};

}  // namespace fde

#endif  // FDE_TRAJECTORY_HPP
