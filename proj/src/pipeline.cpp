#include "fde/pipeline.hpp"

#include <algorithm>
#include <chrono>

namespace fde {

const Field& terminal_profile(const SimulationResult& result)
{
    return result.trajectory.mode == FlowMode::Rescaled ? result.trajectory.best
                                                        : result.trajectory.terminal;
}

SimulationResult simulate(const RunConfig& config, const SimulateOptions& options)
{
    const auto start = std::chrono::steady_clock::now();
    SimulationResult res;
    res.config = config;
    const ProblemSpec& spec = config.spec;
    res.grid = std::make_shared<const Grid>(build_grid(spec, config.resolution));
    res.initial = sample_initial(config.initial, spec, *res.grid);

    std::optional<double> given = spec.t_star;
    if (config.flow.t_star) given = config.flow.t_star;

    EstimateOptions eopt;
    eopt.mass_floor = config.flow.mass_floor;
    eopt.dt_fraction = config.estimate_dt_fraction;
    eopt.drift = config.flow.drift;
    eopt.flip_b_sign = options.flip_b_sign;

    if (config.flow.mode == FlowMode::Raw || !given) {
        res.estimate = estimate_extinction_time(res.initial, spec, res.grid, eopt);
        res.t_star = res.estimate->t_star;
    } else {
        res.t_star = *given;
    }

    auto finish = [&] {
        res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return res;
    };

    if (config.flow.mode == FlowMode::Raw) {
        res.trajectory = res.estimate->fine_run;
        return finish();
    }

    FlowConfig base = config.flow;
    base.flip_b_sign = options.flip_b_sign;
    res.dt_max = config.dt_max ? *config.dt_max : config.dt_max_fraction * res.t_star;
    base.dt_max = res.dt_max;
    base.dt_initial = std::min(base.dt_initial, base.dt_max);
    base.dt_min = std::min(base.dt_min, base.dt_initial);

    if (config.refine_tstar) {
        double lo, hi;
        if (res.estimate) {
            const double half = std::max(10.0 * res.estimate->uncertainty, 1e-9 * res.t_star);
            lo = res.t_star - half;
            hi = res.t_star + half;
        } else {
            lo = res.t_star * (1.0 - 1e-3);
            hi = res.t_star * (1.0 + 1e-3);
        }
        FlowConfig probe = base;
        probe.t_end = config.probe_horizon * res.t_star;
        res.shooting = refine_extinction_time(res.initial, spec, res.grid, probe, lo, hi);
        res.t_star = res.shooting->t_star;
    }
    if (options.calibrate_only) return finish();

    FlowConfig final_cfg = base;
    final_cfg.mode = FlowMode::Rescaled;
    final_cfg.t_star = res.t_star;
    final_cfg.t_end = config.t_end ? *config.t_end : config.horizon * res.t_star;
    final_cfg.keep_history = true;
    res.trajectory = run(res.initial, spec, res.grid, final_cfg);

    const Field& profile = terminal_profile(res);
    try {
        res.fit = classify_profile(*res.grid, profile, spec, res.t_star, default_candidates(spec));
        annotate_residuals(res.trajectory, res.fit->fitted);
    } catch (const std::exception& e) {
        res.fit_error = e.what();
    }
    if (res.fit) {
        try {
            res.rate = fit_rate(res.trajectory, *res.grid, res.fit->fitted);
        } catch (const std::exception& e) {
            res.rate_error = e.what();
        }
    }
    return finish();
}

}  // namespace fde
