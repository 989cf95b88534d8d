#ifndef FDE_PIPELINE_HPP
#define FDE_PIPELINE_HPP

// End-to-end run: raw-flow extinction time, shooting refinement, rescaled run
// to the limit, classification and rate fit.

#include <memory>
#include <optional>
#include <string>

#include "fde/config.hpp"
#include "fde/diagnostics.hpp"
#include "fde/flow.hpp"

namespace fde {

struct SimulateOptions {
    bool flip_b_sign = false;      ///< test hook, see FlowConfig
    bool calibrate_only = false;   ///< stop after T has been determined
};

struct SimulationResult {
    RunConfig config;
    std::shared_ptr<const Grid> grid;
    Field initial;
    std::optional<ExtinctionEstimate> estimate;
    std::optional<ShootingResult> shooting;
    double t_star = 0.0;
    double dt_max = 0.0;
    TrajectoryRecord trajectory;  ///< raw run in raw mode, final rescaled run otherwise
    std::optional<ProfileFit> fit;
    std::string fit_error;
    std::optional<RateFit> rate;
    std::string rate_error;
    double seconds = 0.0;
};

SimulationResult simulate(const RunConfig& config, const SimulateOptions& options = {});

/// Terminal profile reported for a rescaled run: the accepted state of least drift.
const Field& terminal_profile(const SimulationResult& result);

}  // namespace fde

#endif  // FDE_PIPELINE_HPP
