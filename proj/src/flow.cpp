#include "fde/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fde/diagnostics.hpp"
#include "fde/transform.hpp"

namespace fde {

namespace {

double weighted_norm(const Grid& g, std::span<const double> x)
{
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += g.weights[k] * x[k] * x[k];
    return std::sqrt(s);
}

// R(v) = (v^p - v_old^p)/dt - c v^p - A v
double residual(const DiscreteOperator& op, std::span<const double> v,
                std::span<const double> vp_old, double p, double c, double dt, Field& out)
{
    op.apply(v, out);
    for (std::size_t k = 0; k < v.size(); ++k) {
        const double vp = std::pow(v[k], p);
        out[k] = (vp - vp_old[k]) / dt - c * vp - out[k];
    }
    return weighted_norm(op.grid(), out);
}

bool all_positive(std::span<const double> v)
{
    return std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0 && std::isfinite(x); });
}

DiagnosticRow make_row(const DiscreteOperator& diag_op, std::span<const double> v, double p,
                       FlowMode mode, std::optional<double> t_star)
{
    const EnergyReport e =
        energy_report(diag_op, v, p, mode == FlowMode::Rescaled ? t_star : std::nullopt);
    DiagnosticRow row;
    row.zeta = e.zeta;
    row.H = e.H;
    row.J = e.J;
    row.sup_v = e.sup;
    row.inf_v = e.inf;
    row.harnack_ratio = e.harnack_ratio;
    row.mass = e.mass;
    return row;
}

std::string dump_state(const Field& v, double t, double dt)
{
    std::ostringstream os;
    os.precision(17);
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    os << "time step underflow at t=" << t << " dt=" << dt << " min v=" << *lo
       << " max v=" << *hi << " nodes=" << v.size();
    return os.str();
}

double reference_zeta(const Grid& grid, const ProblemSpec& spec, double t_star,
                      std::span<const double> initial)
{
    if ((spec.n - 2) * spec.p > spec.n) {
        const double vbar = stationary_constant(spec.n, spec.p, t_star);
        return std::pow(grid.total_volume * std::pow(vbar, spec.p + 1.0),
                        (spec.p - 1.0) / (spec.p + 1.0));
    }
    return zeta(grid, initial, spec.p);
}

}  // namespace

std::string to_string(StopRule r)
{
    switch (r) {
    case StopRule::TimeReached: return "time_reached";
    case StopRule::SteadyState: return "steady_state";
    case StopRule::ExtinctionDetected: return "extinction_detected";
    }
    return "unknown";
}

StopRule stop_rule_from_string(const std::string& s)
{
    if (s == "time_reached") return StopRule::TimeReached;
    if (s == "steady_state") return StopRule::SteadyState;
    if (s == "extinction_detected") return StopRule::ExtinctionDetected;
    throw DomainError("unknown stop rule: " + s);
}

void FlowConfig::validate() const
{
    if (!(dt_min > 0.0 && dt_min <= dt_initial && dt_initial <= dt_max))
        throw DomainError("need 0 < dt_min <= dt_initial <= dt_max");
    if (!(newton_tol > 0.0) || newton_max_iter < 1) throw DomainError("bad Newton settings");
    if (!(steady_tol > 0.0) || steady_count < 1) throw DomainError("bad steady-state settings");
    if (!(mass_floor > 0.0 && mass_floor < 1.0)) throw DomainError("mass_floor must be in (0,1)");
    if (!(t_end > 0.0)) throw DomainError("t_end must be positive");
    if (mode == FlowMode::Rescaled && !(t_star && *t_star > 0.0))
        throw DomainError("rescaled mode needs a positive t_star");
}

nlohmann::json FlowConfig::to_json() const
{
    nlohmann::json j = {{"mode", fde::to_string(mode)},
                        {"dt_initial", dt_initial},
                        {"dt_min", dt_min},
                        {"dt_max", dt_max},
                        {"adaptive", adaptive},
                        {"newton_tol", newton_tol},
                        {"newton_max_iter", newton_max_iter},
                        {"stop", fde::to_string(stop)},
                        {"t_end", t_end},
                        {"steady_tol", steady_tol},
                        {"steady_count", steady_count},
                        {"mass_floor", mass_floor},
                        {"drift", drift == DriftScheme::Central ? "central" : "upwind"},
                        {"divergence_ratio", divergence_ratio},
                        {"rebound_factor", rebound_factor},
                        {"rebound_wait", rebound_wait},
                        {"max_steps", max_steps},
                        {"snapshot_first", snapshot_first}};
    j["t_star"] = t_star ? nlohmann::json(*t_star) : nlohmann::json(nullptr);
    return j;
}

DiscreteOperator flow_operator(std::shared_ptr<const Grid> grid, const ProblemSpec& spec,
                               const FlowConfig& config)
{
    const Coefficients co = spec.coefficients();
    return DiscreteOperator(std::move(grid), co.a, config.flip_b_sign ? -co.b : co.b,
                            config.drift);
}

double reaction_coefficient(const ProblemSpec& spec, const FlowConfig& config)
{
    if (config.mode == FlowMode::Raw) return 0.0;
    if (!config.t_star) throw DomainError("rescaled mode needs t_star");
    return spec.p / ((spec.p - 1.0) * *config.t_star);
}

StepReport step_implicit(std::span<const double> state, double t, double dt,
                         const DiscreteOperator& op, double p, double c, const FlowConfig& config,
                         Field& next)
{
    StepReport rep;
    rep.t_before = t;
    rep.dt_used = dt;
    const std::size_t n = state.size();
    const Grid& g = op.grid();
    if (!(dt > 0.0)) throw DomainError("dt must be positive");
    if (!(1.0 / dt > c)) {
        rep.failure = "dt exceeds the reaction time scale";
        next.assign(state.begin(), state.end());
        return rep;
    }

    Field vp_old(n), v(state.begin(), state.end()), r(n), shift(n), rhs(n), trial(n), r_trial(n);
    for (std::size_t k = 0; k < n; ++k) vp_old[k] = std::pow(state[k], p);
    double rnorm = residual(op, v, vp_old, p, c, dt, r);

    bool converged = false;
    for (int it = 1; it <= config.newton_max_iter && !converged; ++it) {
        rep.newton_iterations = it;
        for (std::size_t k = 0; k < n; ++k) {
            shift[k] = p * std::pow(v[k], p - 1.0) * (1.0 / dt - c);
            rhs[k] = -r[k];
        }
        Field delta;
        try {
            delta = op.solve_shifted(shift, rhs);
        } catch (const linalg::SolveError& e) {
            rep.failure = std::string("linear solve failed: ") + e.what();
            break;
        }
        const double dnorm = weighted_norm(g, delta);
        const double vnorm = weighted_norm(g, v);
        double lambda = 1.0;
        bool moved = false;
        for (int half = 0; half <= 6; ++half, lambda *= 0.5) {
            for (std::size_t k = 0; k < n; ++k) trial[k] = v[k] + lambda * delta[k];
            if (!all_positive(trial)) continue;
            if (half == 0 && dnorm <= config.newton_tol * vnorm) {
                v.swap(trial);
                converged = true;
                moved = true;
                break;
            }
            const double tn = residual(op, trial, vp_old, p, c, dt, r_trial);
            if (tn < rnorm) {
                v.swap(trial);
                r.swap(r_trial);
                rnorm = tn;
                moved = true;
                converged = lambda * dnorm <= config.newton_tol * vnorm;
                break;
            }
        }
        if (!moved) {
            rep.failure = all_positive(trial) ? "Newton damping exhausted" : "positivity lost";
            break;
        }
    }
    if (!converged && rep.failure.empty()) rep.failure = "Newton did not converge";
    if (converged && !all_positive(v)) {
        converged = false;
        rep.failure = "positivity lost";
    }
    if (!converged) {
        next.assign(state.begin(), state.end());
        rep.t_after = t;
        const auto [lo, hi] = std::minmax_element(state.begin(), state.end());
        rep.min_value = *lo;
        rep.max_value = *hi;
        return rep;
    }
    next = std::move(v);
    const auto [lo, hi] = std::minmax_element(next.begin(), next.end());
    rep.min_value = *lo;
    rep.max_value = *hi;
    rep.accepted = true;
    rep.t_after = t + dt;
    return rep;
}

TrajectoryRecord run(const Field& initial, const ProblemSpec& spec,
                     std::shared_ptr<const Grid> grid, const FlowConfig& config)
{
    return run(initial, spec, flow_operator(std::move(grid), spec, config), config);
}

TrajectoryRecord run(const Field& initial, const ProblemSpec& spec, const DiscreteOperator& op,
                     const FlowConfig& config)
{
    config.validate();
    const Grid& grid = op.grid();
    if (initial.size() != grid.size()) throw DomainError("initial field does not match grid");
    if (!all_positive(initial)) throw DomainError("initial field must be positive and finite");
    const double p = spec.p;
    const double c = reaction_coefficient(spec, config);
    const bool rescaled = config.mode == FlowMode::Rescaled;
    const double t_star = rescaled ? *config.t_star : std::numeric_limits<double>::quiet_NaN();
    const Coefficients co = spec.coefficients();
    const DiscreteOperator diag_op(op.grid_ptr(), co.a, co.b, config.drift);

    double dt_cap = config.dt_max;
    if (rescaled) dt_cap = std::min(dt_cap, 0.5 / c);
    if (!config.adaptive) dt_cap = std::min(dt_cap, config.dt_initial);

    TrajectoryRecord rec;
    rec.mode = config.mode;
    rec.t_star = t_star;

    Field v = initial, next;
    double t = 0.0;
    double dt = std::min(config.dt_initial, dt_cap);
    long step = 0;

    auto physical = [&](double time) { return rescaled ? unrescale_time(time, t_star) : time; };

    DiagnosticRow row0 = make_row(diag_op, v, p, config.mode, config.t_star);
    row0.tau_physical = 0.0;
    rec.rows.push_back(row0);
    const double mass0 = row0.mass;
    const double zeta_ref = rescaled ? reference_zeta(grid, spec, t_star, initial) : row0.zeta;
    rec.snapshots.push_back({0, 0.0, v});
    if (config.keep_history) rec.history.push_back({0, 0.0, v});
    double next_snapshot = config.snapshot_first;

    double best_drift = std::numeric_limits<double>::infinity();
    double t_best = 0.0;
    rec.best = v;
    int calm = 0;
    int streak = 0;

    while (true) {
        if (t >= config.t_end * (1.0 - 1e-14)) {
            rec.stop = StopReason::TimeReached;
            break;
        }
        if (step >= config.max_steps) {
            rec.stop = StopReason::StepLimit;
            break;
        }
        const double h = std::min(dt, config.t_end - t);
        const StepReport rep = step_implicit(v, t, h, op, p, c, config, next);
        if (!rep.accepted) {
            ++rec.rejected_steps;
            streak = 0;
            dt = 0.5 * h;
            if (dt < config.dt_min) throw TimeStepUnderflow(dump_state(v, t, dt) + ": " + rep.failure);
            continue;
        }
        double drift = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k)
            drift = std::max(drift, std::abs(next[k] - v[k]) / h);
        v.swap(next);
        t = rep.t_after;
        ++step;

        DiagnosticRow row = make_row(diag_op, v, p, config.mode, config.t_star);
        row.step = step;
        row.t = t;
        row.tau_physical = physical(t);
        row.dt = h;
        row.drift = drift;
        row.newton_iterations = rep.newton_iterations;
        rec.rows.push_back(row);
        if (config.keep_history) rec.history.push_back({step, t, v});
        while (t >= next_snapshot * (1.0 - 1e-12)) {
            if (rec.snapshots.back().step != step) rec.snapshots.push_back({step, t, v});
            next_snapshot *= 2.0;
        }
        if (drift < best_drift) {
            best_drift = drift;
            t_best = t;
            rec.best = v;
            rec.best_row = rec.rows.size() - 1;
        }

        if (++streak >= 5) {
            dt = std::min(1.5 * h, dt_cap);
            streak = 0;
        } else {
            dt = std::max(dt, h);
        }

        if (!rescaled && row.mass < config.mass_floor * mass0) {
            rec.stop = StopReason::ExtinctionDetected;
            break;
        }
        // the raw flow strictly decreases the mass whenever H > 0
        if (!rescaled && row.mass > mass0) {
            rec.stop = StopReason::DivergedUp;
            break;
        }
        if (config.stop == StopRule::SteadyState) {
            calm = drift < config.steady_tol ? calm + 1 : 0;
            if (calm >= config.steady_count) {
                rec.stop = StopReason::SteadyState;
                break;
            }
        }
        if (rescaled && config.divergence_ratio > 0.0) {
            const double ratio = row.zeta / zeta_ref;
            const double r = config.divergence_ratio;
            const double bound = t >= t_star ? r : r * r;
            if (ratio > bound) {
                rec.stop = StopReason::DivergedUp;
                break;
            }
            if (ratio < 1.0 / bound) {
                rec.stop = StopReason::DivergedDown;
                break;
            }
        }
        if (rescaled && config.rebound_factor > 0.0 && drift > config.rebound_factor * best_drift &&
            t - t_best > config.rebound_wait * t_star) {
            rec.stop = StopReason::DriftRebounded;
            break;
        }
    }
    rec.terminal = v;
    if (rec.snapshots.back().step != step) rec.snapshots.push_back({step, t, v});
    return rec;
}

nlohmann::json ExtinctionEstimate::to_json() const
{
    return {{"t_star", t_star},     {"uncertainty", uncertainty}, {"lower_bound", lower_bound},
            {"upper_bound", upper_bound}, {"coarse_root", coarse}, {"fine_root", fine},
            {"dt", dt}};
}

namespace {

// Root of the least-squares line zeta = alpha + beta t over the last decade of mass.
double zeta_root(const TrajectoryRecord& rec)
{
    const double mass_end = rec.rows.back().mass;
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const DiagnosticRow& r : rec.rows) {
        if (r.mass > 10.0 * mass_end) continue;
        n += 1;
        sx += r.t;
        sy += r.zeta;
        sxx += r.t * r.t;
        sxy += r.t * r.zeta;
    }
    if (n < 3) throw InsufficientData("too few samples in the last decade of mass");
    const double beta = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double alpha = (sy - beta * sx) / n;
    if (!(beta < 0.0)) throw InsufficientData("zeta is not decreasing near extinction");
    return -alpha / beta;
}

}  // namespace

ExtinctionEstimate estimate_extinction_time(const Field& initial, const ProblemSpec& spec,
                                            std::shared_ptr<const Grid> grid,
                                            const EstimateOptions& options)
{
    const double p = spec.p;
    const Coefficients co = spec.coefficients();
    const DiscreteOperator diag_op(grid, co.a, co.b, options.drift);
    const double h0 = rayleigh_quotient(diag_op, initial, p);
    const double z0 = zeta(*grid, initial, p);
    if (!(h0 > 0.0)) throw DomainError("H(0) must be positive for finite-time extinction");

    ExtinctionEstimate est;
    est.lower_bound = p * z0 / ((p + 1.0) * h0);
    est.dt = options.dt_fraction * est.lower_bound;

    FlowConfig cfg;
    cfg.mode = FlowMode::Raw;
    cfg.adaptive = false;
    cfg.dt_initial = est.dt;
    cfg.dt_max = est.dt;
    cfg.dt_min = est.dt * 1e-6;
    cfg.stop = StopRule::ExtinctionDetected;
    cfg.mass_floor = options.mass_floor;
    cfg.t_end = 1e3 * est.lower_bound;
    cfg.drift = options.drift;
    cfg.flip_b_sign = options.flip_b_sign;
    const DiscreteOperator op = flow_operator(grid, spec, cfg);

    TrajectoryRecord coarse = run(initial, spec, op, cfg);
    cfg.dt_initial = cfg.dt_max = 0.5 * est.dt;
    cfg.dt_min = 0.5 * cfg.dt_min;
    TrajectoryRecord fine = run(initial, spec, op, cfg);
    if (coarse.stop != StopReason::ExtinctionDetected || fine.stop != StopReason::ExtinctionDetected)
        throw InsufficientData("raw flow did not reach the mass floor (stopped: " +
                               to_string(coarse.stop == StopReason::ExtinctionDetected ? fine.stop : coarse.stop) + ")");

    est.coarse = zeta_root(coarse);
    est.fine = zeta_root(fine);
    est.t_star = 2.0 * est.fine - est.coarse;
    est.uncertainty = std::abs(est.fine - est.coarse);

    double h_min = std::numeric_limits<double>::infinity();
    for (const DiagnosticRow& r : fine.rows) h_min = std::min(h_min, r.H);
    est.upper_bound = p * z0 / ((p - 1.0) * h_min);
    est.fine_run = std::move(fine);

    if (est.t_star < est.lower_bound * (1.0 - 1e-9) || est.t_star > est.upper_bound * (1.0 + 1e-6)) {
        std::ostringstream os;
        os.precision(17);
        os << "extinction time " << est.t_star << " outside [" << est.lower_bound << ", "
           << est.upper_bound << "]";
        throw BracketViolation(os.str());
    }
    return est;
}

ShootingResult refine_extinction_time(const Field& initial, const ProblemSpec& spec,
                                      std::shared_ptr<const Grid> grid, const FlowConfig& base,
                                      double lo, double hi)
{
    if (!(lo > 0.0 && lo < hi)) throw DomainError("need 0 < lo < hi");
    ShootingResult res;
    // +1: amplitude grows, so T is too small; -1: T is too large
    auto probe = [&](double t_star) {
        ++res.probes;
        FlowConfig cfg = base;
        cfg.mode = FlowMode::Rescaled;
        cfg.t_star = t_star;
        cfg.divergence_ratio = base.divergence_ratio > 0.0 ? base.divergence_ratio : 4.0;
        cfg.stop = StopRule::TimeReached;
        cfg.rebound_factor = 0.0;
        cfg.keep_history = false;
        try {
            const TrajectoryRecord rec = run(initial, spec, grid, cfg);
            if (rec.stop == StopReason::DivergedUp) return 1;
            if (rec.stop == StopReason::DivergedDown) return -1;
            const auto& rows = rec.rows;
            if (rows.size() < 2) return 1;
            return rows.back().mass >= rows[rows.size() - 2].mass ? 1 : -1;
        } catch (const TimeStepUnderflow&) {
            return 1;
        }
    };

    for (int k = 0; k < 40 && probe(lo) != 1; ++k) {
        const double w = hi - lo;
        hi = lo;
        lo = std::max(lo - 2.0 * w, 0.5 * lo);
    }
    for (int k = 0; k < 40 && probe(hi) != -1; ++k) {
        const double w = hi - lo;
        lo = hi;
        hi = hi + 2.0 * w;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (probe(mid) == 1 ? lo : hi) = mid;
    }
    res.lower = lo;
    res.upper = hi;
    res.t_star = 0.5 * (lo + hi);
    return res;
}

}  // namespace fde
