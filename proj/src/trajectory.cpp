#include "fde/trajectory.hpp"

#include <stdexcept>

#include "fde/constants.hpp"

namespace fde {

std::string to_string(FlowMode m) { return m == FlowMode::Raw ? "raw" : "rescaled"; }

FlowMode flow_mode_from_string(const std::string& s)
{
    if (s == "raw") return FlowMode::Raw;
    if (s == "rescaled") return FlowMode::Rescaled;
    throw DomainError("unknown flow mode: " + s);
}

std::string to_string(StopReason r)
{
    switch (r) {
    case StopReason::TimeReached: return "time_reached";
    case StopReason::SteadyState: return "steady_state";
    case StopReason::ExtinctionDetected: return "extinction_detected";
    case StopReason::DivergedUp: return "diverged_up";
    case StopReason::DivergedDown: return "diverged_down";
    case StopReason::DriftRebounded: return "drift_rebounded";
    case StopReason::StepLimit: return "step_limit";
    }
    return "unknown";
}

}  // namespace fde
