#include "fde/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fde/fowler.hpp"

namespace fde {

namespace {

double rescaled_amplitude(double t_star, double p) { return std::pow(t_star, 1.0 / (p - 1.0)); }

void fill_residuals(const Grid& grid, std::span<const double> v, ProfileFit& fit)
{
    fit.residual_sup = sup_distance(v, fit.fitted);
    fit.residual_l2 = l2_distance(grid, v, fit.fitted);
}

// Golden-section minimization of a unimodal function on [lo, hi].
template <class F>
double golden_section(F&& f, double lo, double hi, double tol)
{
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > tol) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    return f1 < f2 ? x1 : x2;
}

Field bubble_field(const Grid& grid, int n, double lambda, bool north, double amplitude)
{
    Field out(grid.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double c = std::cos(grid.theta_at(k));
        out[k] = amplitude * bubble_profile(n, north ? c : -c, lambda);
    }
    return out;
}

}  // namespace

double lp_norm(const Grid& grid, std::span<const double> f, double q)
{
    if (f.size() != grid.size()) throw DomainError("field size does not match grid");
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) s += grid.weights[k] * std::pow(std::abs(f[k]), q);
    return std::pow(s, 1.0 / q);
}

double l2_distance(const Grid& grid, std::span<const double> f, std::span<const double> g)
{
    if (f.size() != grid.size() || g.size() != grid.size())
        throw DomainError("field size does not match grid");
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) s += grid.weights[k] * (f[k] - g[k]) * (f[k] - g[k]);
    return std::sqrt(s);
}

double sup_distance(std::span<const double> f, std::span<const double> g)
{
    if (f.size() != g.size()) throw DomainError("field sizes differ");
    double m = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) m = std::max(m, std::abs(f[k] - g[k]));
    return m;
}

double quadratic_form(const DiscreteOperator& op, std::span<const double> v)
{
    double v2 = 0.0;
    const Grid& g = op.grid();
    for (std::size_t k = 0; k < v.size(); ++k) v2 += g.weights[k] * v[k] * v[k];
    return op.dirichlet_energy(v) - op.b() * v2;
}

double rayleigh_quotient(const DiscreteOperator& op, std::span<const double> v, double p)
{
    const Grid& g = op.grid();
    double mass = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (!(v[k] > 0.0)) throw DomainError("rayleigh quotient needs a positive field");
        mass += g.weights[k] * std::pow(v[k], p + 1.0);
    }
    return quadratic_form(op, v) / std::pow(mass, 2.0 / (p + 1.0));
}

double energy_J(const DiscreteOperator& op, std::span<const double> v, double p, double t_star)
{
    if (!(t_star > 0.0)) throw DomainError("energy J needs a positive extinction time");
    const Grid& g = op.grid();
    double v2 = 0.0, vp = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        v2 += g.weights[k] * v[k] * v[k];
        vp += g.weights[k] * std::pow(v[k], p + 1.0);
    }
    return 0.5 * op.dirichlet_energy(v) - 0.5 * op.b() * v2 -
           p / ((p * p - 1.0) * t_star) * vp;
}

double zeta(const Grid& grid, std::span<const double> v, double p)
{
    double mass = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) mass += grid.weights[k] * std::pow(v[k], p + 1.0);
    return std::pow(mass, (p - 1.0) / (p + 1.0));
}

double energy_dissipation(const Grid& grid, std::span<const double> v_old,
                          std::span<const double> v_new, double dt, double p)
{
    const double e = 0.5 * (p + 1.0);
    double s = 0.0;
    for (std::size_t k = 0; k < v_old.size(); ++k) {
        const double d = (std::pow(v_new[k], e) - std::pow(v_old[k], e)) / dt;
        s += grid.weights[k] * d * d;
    }
    return 4.0 * p / ((p + 1.0) * (p + 1.0)) * s;
}

EnergyReport energy_report(const DiscreteOperator& op, std::span<const double> v, double p,
                           std::optional<double> t_star)
{
    const Grid& g = op.grid();
    EnergyReport r;
    r.sup = *std::max_element(v.begin(), v.end());
    r.inf = *std::min_element(v.begin(), v.end());
    for (std::size_t k = 0; k < v.size(); ++k) r.mass += g.weights[k] * std::pow(v[k], p + 1.0);
    r.lp1_norm = std::pow(r.mass, 1.0 / (p + 1.0));
    r.zeta = std::pow(r.mass, (p - 1.0) / (p + 1.0));
    r.H = quadratic_form(op, v) / std::pow(r.mass, 2.0 / (p + 1.0));
    if (t_star) r.J = energy_J(op, v, p, *t_star);
    r.harnack_ratio = r.inf > 0.0 ? r.sup / r.inf : std::numeric_limits<double>::infinity();
    return r;
}

CandidateSet default_candidates(const ProblemSpec& spec)
{
    CandidateSet c;
    const double tol = 1e-12;
    if (spec.geometry == Geometry::SphereAxisym && spec.n > 3)
        c.bubble = std::abs(spec.p - bubble_exponent(spec.n)) <= tol * spec.p;
    if (spec.has_rho()) c.fowler = std::abs(spec.p - yamabe_exponent(spec.n)) <= tol * spec.p;
    return c;
}

nlohmann::json ProfileFit::to_json() const
{
    nlohmann::json params = nlohmann::json::object();
    switch (profile.kind) {
    case ProfileKind::Bubble:
        params["theta0"] = profile.theta0;
        params["lambda"] = profile.lambda;
        break;
    case ProfileKind::FowlerOrbit:
        params["energy"] = profile.energy;
        params["phase"] = profile.phase;
        params["k"] = fowler_k;
        break;
    default: break;
    }
    return {{"kind", to_string(profile.kind)},
            {"params", params},
            {"residual_sup", residual_sup},
            {"residual_l2", residual_l2}};
}

ProfileFit fit_constant(const Grid& grid, std::span<const double> v, const ProblemSpec& spec,
                        double t_star)
{
    ProfileFit fit;
    fit.profile.kind = ProfileKind::StationaryConstant;
    fit.fitted.assign(grid.size(), stationary_constant(spec.n, spec.p, t_star));
    fill_residuals(grid, v, fit);
    return fit;
}

ProfileFit fit_bubble(const Grid& grid, std::span<const double> v, const ProblemSpec& spec,
                      double t_star)
{
    if (grid.kind != GridKind::PolarArc) throw DomainError("bubble fit needs a polar grid");
    if (spec.n <= 3 || std::abs(spec.p - bubble_exponent(spec.n)) > 1e-12 * spec.p)
        throw DomainError("bubbles exist only at p = (n+1)/(n-3)");
    const double amp = rescaled_amplitude(t_star, spec.p);
    // Axisymmetric data can only select a bubble centered on the axis.
    ProfileFit best;
    bool have = false;
    for (bool north : {true, false}) {
        auto objective = [&](double x) {
            return l2_distance(grid, v, bubble_field(grid, spec.n, 1.0 + std::exp(x), north, amp));
        };
        const double x = golden_section(objective, std::log(1e-6), std::log(1e3 - 1.0), 1e-10);
        ProfileFit fit;
        fit.profile.kind = ProfileKind::Bubble;
        fit.profile.theta0 = north ? 0.0 : std::numbers::pi;
        fit.profile.lambda = 1.0 + std::exp(x);
        fit.fitted = bubble_field(grid, spec.n, fit.profile.lambda, north, amp);
        fill_residuals(grid, v, fit);
        if (!have || fit.residual_l2 < best.residual_l2) {
            best = std::move(fit);
            have = true;
        }
    }
    return best;
}

ProfileFit fit_fowler(const Grid& grid, std::span<const double> v, const ProblemSpec& spec,
                      double t_star)
{
    if (!grid.has_rho()) throw DomainError("Fowler fit needs a rho axis");
    require_critical(spec.n, spec.p);
    const int n = spec.n;
    const double p = spec.p;
    const double amp = rescaled_amplitude(t_star, p);
    const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
    const double vmin = *lo_it / amp, vmax = *hi_it / amp;
    const double center = fowler_center(n, p);
    if (!(vmin < center && vmax > center) || (vmax - vmin) < 1e-8 * center)
        throw DomainError("field does not oscillate around the Fowler center");

    // energy from the turning points, then snap to the admissible period ell/k
    const double ec = fowler_center_energy(n, p);
    double e_est = 0.5 * (fowler_potential(vmin, n, p) + fowler_potential(vmax, n, p));
    e_est = std::clamp(e_est, ec + 1e-12 * std::abs(ec), -1e-12 * std::abs(ec));
    const double period_est = minimal_period(e_est, n, p);
    const int k = std::max(1, static_cast<int>(std::lround(grid.ell / period_est)));
    const double period = grid.ell / k;
    const double energy = energy_for_period(period, n, p);

    // phase by cross-correlation over whole-node shifts of the rho axis
    const Field base = fowler_on_grid(grid.ell, k, 0.0, n, p, grid);
    int best_shift = 0;
    double best_corr = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < grid.n_rho; ++s) {
        double c = 0.0;
        for (int i = 0; i < grid.n_rho; ++i)
            for (int j = 0; j < grid.n_theta; ++j)
                c += grid.weights[grid.index(i, j)] * v[grid.index(i, j)] *
                     base[grid.index((i - s + grid.n_rho) % grid.n_rho, j)];
        if (c > best_corr) {
            best_corr = c;
            best_shift = s;
        }
    }
    const double phase0 = best_shift * grid.d_rho;
    auto candidate = [&](double phase) {
        Field f = fowler_on_grid(grid.ell, k, phase, n, p, grid);
        for (double& x : f) x *= amp;
        return f;
    };
    const double phase = golden_section(
        [&](double ph) { return l2_distance(grid, v, candidate(ph)); }, phase0 - grid.d_rho,
        phase0 + grid.d_rho, 1e-10 * grid.d_rho);

    ProfileFit fit;
    fit.profile.kind = ProfileKind::FowlerOrbit;
    fit.profile.energy = energy;
    fit.profile.phase = std::fmod(std::fmod(phase, period) + period, period);
    fit.fowler_k = k;
    fit.fitted = candidate(phase);
    fill_residuals(grid, v, fit);
    return fit;
}

ProfileFit classify_profile(const Grid& grid, std::span<const double> v, const ProblemSpec& spec,
                            double t_star, CandidateSet candidates)
{
    std::vector<ProfileFit> fits;
    auto attempt = [&](auto&& fitter) {
        try {
            fits.push_back(fitter(grid, v, spec, t_star));
        } catch (const DomainError&) {
            // candidate does not exist for this field or exponent
        }
    };
    if (candidates.constant) attempt(fit_constant);
    if (candidates.bubble) attempt(fit_bubble);
    if (candidates.fowler) attempt(fit_fowler);
    const double vmax = *std::max_element(v.begin(), v.end());
    const ProfileFit* best = nullptr;
    for (const ProfileFit& f : fits)
        if (!best || f.residual_sup < best->residual_sup) best = &f;
    if (!best || best->residual_sup > 0.1 * vmax)
        throw NoCandidateFits("no closed-form profile within 10% of the terminal field");
    return *best;
}

std::vector<double> pointwise_first_integral(const Grid& grid, std::span<const double> v, int n,
                                             double p)
{
    if (!grid.has_rho()) throw DomainError("first integral needs a rho axis");
    if (grid.n_rho < 5) throw DomainError("need at least 5 rho nodes");
    std::vector<double> e(grid.size());
    const int N = grid.n_rho;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < grid.n_theta; ++j) {
            auto at = [&](int di) { return v[grid.index((i + di + 2 * N) % N, j)]; };
            const double dv = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * grid.d_rho);
            e[grid.index(i, j)] = first_integral({at(0), dv}, n, p);
        }
    return e;
}

RateFit fit_rate(const TrajectoryRecord& trajectory, const Grid& grid,
                 std::span<const double> limit)
{
    const auto& hist = trajectory.history;
    if (hist.empty()) throw InsufficientData("trajectory has no stored states");
    std::vector<double> ts, errs;
    for (const Snapshot& s : hist) {
        ts.push_back(s.t);
        errs.push_back(l2_distance(grid, s.values, limit));
    }
    const double scale = lp_norm(grid, limit, 2.0);
    RateFit fit;
    const double floor_tol = 1e-10 * scale;
    if (*std::max_element(errs.begin(), errs.end()) <= floor_tol) {
        fit.at_limit = true;
        fit.gamma = std::numeric_limits<double>::infinity();
        fit.quality = 1.0;
        return fit;
    }
    // error floor: the minimum over t > 1; the fit uses the decay leading to it
    std::size_t kmin = hist.size();
    for (std::size_t k = 0; k < hist.size(); ++k)
        if (ts[k] > 1.0 && (kmin == hist.size() || errs[k] < errs[kmin])) kmin = k;
    if (kmin == hist.size()) throw InsufficientData("no samples with t > 1");
    const double e_floor = errs[kmin];
    std::vector<double> x, y;
    for (std::size_t k = 0; k <= kmin; ++k) {
        if (ts[k] <= 1.0 || errs[k] <= 0.0) continue;
        if (errs[k] > 1e3 * e_floor || errs[k] < 10.0 * e_floor) continue;
        x.push_back(std::log(ts[k]));
        y.push_back(std::log(errs[k]));
    }
    if (x.size() < 20) throw InsufficientData("fewer than 20 samples in the fit window");
    const double m = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / m;
    double ss_res = 0.0, ss_tot = 0.0;
    const double ybar = sy / m;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (icpt + slope * x[i]);
        ss_res += r * r;
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }
    fit.gamma = -slope;
    fit.prefactor = std::exp(icpt);
    fit.quality = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    fit.samples = static_cast<int>(x.size());
    return fit;
}

void annotate_residuals(TrajectoryRecord& trajectory, std::span<const double> limit)
{
    double scale = 0.0;
    for (double x : limit) scale = std::max(scale, std::abs(x));
    std::size_t h = 0;
    for (DiagnosticRow& row : trajectory.rows) {
        while (h < trajectory.history.size() && trajectory.history[h].step < row.step) ++h;
        if (h < trajectory.history.size() && trajectory.history[h].step == row.step)
            row.residual_to_limit = sup_distance(trajectory.history[h].values, limit) / scale;
    }
}

}  // namespace fde
