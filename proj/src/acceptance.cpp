#include "fde/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

#include "fde/constants.hpp"
#include "fde/diagnostics.hpp"
#include "fde/fowler.hpp"
#include "fde/pipeline.hpp"
#include "fde/transform.hpp"

namespace fde {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDtMax = 0.075;

std::string fmt(double x, const char* spec = "%.6g")
{
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, x);
    return buf;
}

RunConfig sphere_config(double p, int n_theta)
{
    RunConfig c;
    c.spec = ProblemSpec::make(4, std::nullopt, p, Geometry::SphereAxisym);
    c.resolution = {0, n_theta};
    c.dt_max = kDtMax;
    c.flow.rebound_factor = 100.0;
    return c;
}

RunConfig cylinder_config(double ell, int n_rho, double amplitude)
{
    RunConfig c;
    c.spec = ProblemSpec::make(4, std::nullopt, 3.0, Geometry::CylinderRho, ell);
    c.resolution = {n_rho, 0};
    c.dt_max = kDtMax;
    c.flow.rebound_factor = 100.0;
    c.initial.kind = InitialKind::CosinePerturbation;
    c.initial.base = 1.0;
    c.initial.amplitude = amplitude;
    c.initial.mode_rho = 1;
    return c;
}

RunConfig cosine_sphere(double p, int n_theta, double amplitude)
{
    RunConfig c = sphere_config(p, n_theta);
    c.initial.kind = InitialKind::CosinePerturbation;
    c.initial.base = 1.0;
    c.initial.amplitude = amplitude;
    c.initial.mode_theta = 1;
    return c;
}

struct Outcome {
    std::shared_ptr<SimulationResult> result;
    std::string error;
};

// Runs every scenario at most once and remembers the outcome.
class Suite {
public:
    explicit Suite(const AcceptanceOptions& o) : opt_(o), scale_(o.quick ? 2 : 1) {}

    int res(int full) const { return full / scale_; }

    const Outcome& get(const std::string& key, const std::function<RunConfig()>& make,
                       bool calibrate_only = false)
    {
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        if (opt_.progress) *opt_.progress << "  running " << key << " ..." << std::flush;
        Outcome out;
        try {
            SimulateOptions so;
            so.flip_b_sign = opt_.flip_b_sign;
            so.calibrate_only = calibrate_only;
            out.result = std::make_shared<SimulationResult>(simulate(make(), so));
            if (out.result->estimate) estimates_.push_back({key, *out.result->estimate});
        } catch (const std::exception& e) {
            out.error = e.what();
        }
        if (opt_.progress) {
            if (out.result) *opt_.progress << " " << fmt(out.result->seconds, "%.2f") << " s\n";
            else *opt_.progress << " error: " << out.error << '\n';
        }
        return cache_.emplace(key, std::move(out)).first->second;
    }

    const Outcome& c1() { return get("constant sphere raw", [&] {
        RunConfig c = sphere_config(3.0, res(128));
        c.flow.mode = FlowMode::Raw;
        return c;
    }); }
    const Outcome& c5(int mult = 1) { return get("sphere p=3 N=" + std::to_string(res(128) * mult), [&, mult] {
        return cosine_sphere(3.0, res(128) * mult, 0.3);
    }, mult > 1); }
    const Outcome& c6(int mult = 1) { return get("cylinder ell=4 N=" + std::to_string(res(256) * mult), [&, mult] {
        return cylinder_config(4.0, res(256) * mult, 0.2);
    }, mult > 1); }
    const Outcome& c7() { return get("cylinder ell=6", [&] { return cylinder_config(6.0, res(256), 0.4); }); }
    const Outcome& c8() { return get("sphere p=5", [&] { return cosine_sphere(5.0, res(256), 0.5); }); }

    const std::vector<std::pair<std::string, ExtinctionEstimate>>& estimates() const { return estimates_; }
    bool flip() const { return opt_.flip_b_sign; }

private:
    AcceptanceOptions opt_;
    int scale_;
    std::map<std::string, Outcome> cache_;
    std::vector<std::pair<std::string, ExtinctionEstimate>> estimates_;
};

CriterionResult failed(int id, const std::string& name, const std::string& bound,
                       const std::string& why)
{
    return {id, name, std::numeric_limits<double>::quiet_NaN(), bound, false, why};
}

double sup_relative(std::span<const double> v, double value)
{
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x - value));
    return m / std::abs(value);
}

CriterionResult criterion1(Suite& s)
{
    const std::string name = "exact extinction time, constant data";
    const std::string bound = "T in [1.4990, 1.5010], < 10 s";
    const Outcome& o = s.c1();
    if (!o.result) return failed(1, name, bound, o.error);
    const double t = o.result->t_star;
    const double secs = o.result->seconds;
    return {1, name, t, bound, t >= 1.499 && t <= 1.501 && secs < 10.0,
            "uncertainty " + fmt(o.result->estimate->uncertainty, "%.2e") + ", " + fmt(secs, "%.2f") + " s"};
}

CriterionResult criterion2(Suite& s)
{
    const std::string name = "zeta upper bound and strict decrease";
    const std::string bound = "max zeta / bound <= 1 + 1e-6";
    const Outcome& o = s.c1();
    if (!o.result) return failed(2, name, bound, o.error);
    const double p = o.result->config.spec.p;
    const double t_star = o.result->t_star;
    const auto& rows = o.result->estimate->fine_run.rows;
    const double h0 = rows.front().H;
    double worst = 0.0;
    bool decreasing = true;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const double bnd = (p + 1.0) / p * (t_star - rows[k].t) * h0;
        worst = std::max(worst, bnd > 0.0 ? rows[k].zeta / bnd : kInf);
        if (k > 0 && !(rows[k].zeta < rows[k - 1].zeta)) decreasing = false;
    }
    return {2, name, worst, bound, worst <= 1.0 + 1e-6 && decreasing,
            std::string(decreasing ? "strictly decreasing" : "NOT strictly decreasing") + " over " +
                std::to_string(rows.size()) + " states"};
}

CriterionResult criterion3(Suite& s)
{
    const std::string name = "extinction time above analytic lower bound";
    const std::string bound = "min T / (p zeta0 / ((p+1) H0)) >= 1";
    if (s.estimates().empty()) return failed(3, name, bound, "no extinction-time estimates succeeded");
    double worst = kInf;
    std::string which;
    for (const auto& [key, est] : s.estimates()) {
        const double r = est.t_star / est.lower_bound;
        if (r < worst) {
            worst = r;
            which = key;
        }
    }
    return {3, name, worst, bound, worst >= 1.0,
            std::to_string(s.estimates().size()) + " runs, tightest: " + which};
}

struct Monotone {
    double max_dh = -kInf;
    double max_dj = -kInf;
    double min_j = kInf;
};

Monotone monotone(const TrajectoryRecord& tr)
{
    Monotone m;
    for (std::size_t k = 0; k < tr.rows.size(); ++k) {
        m.min_j = std::min(m.min_j, tr.rows[k].J);
        if (k == 0) continue;
        m.max_dh = std::max(m.max_dh, tr.rows[k].H - tr.rows[k - 1].H);
        m.max_dj = std::max(m.max_dj, tr.rows[k].J - tr.rows[k - 1].J);
    }
    return m;
}

CriterionResult criterion4(Suite& s)
{
    const std::string name = "H and J nonincreasing, J >= 0 on rescaled runs";
    const std::string bound = "max(dH, dJ, -J) <= 1e-8";
    double worst = -kInf;
    std::string detail;
    bool ok = true;
    auto account = [&](const std::string& label, double dh, double dj, double neg_j) {
        const double w = std::max({dh, dj, neg_j});
        if (w > worst) worst = w;
        if (w > 1e-8) {
            ok = false;
            detail += label + " violates (dH " + fmt(dh, "%.2e") + ", dJ " + fmt(dj, "%.2e") +
                      ", -J " + fmt(neg_j, "%.2e") + "); ";
        }
    };
    const Outcome* runs[] = {&s.c5(), &s.c6(), &s.c7(), &s.c8()};
    const char* labels[] = {"sphere p=3", "cylinder ell=4", "cylinder ell=6", "sphere p=5"};
    for (int i = 0; i < 4; ++i) {
        if (!runs[i]->result) {
            ok = false;
            detail += std::string(labels[i]) + " failed: " + runs[i]->error + "; ";
            continue;
        }
        const Monotone m = monotone(runs[i]->result->trajectory);
        account(labels[i], m.max_dh, m.max_dj, -m.min_j);
    }
    const double probe = h_monotone_probe(s.flip(), s.res(256));
    if (probe > worst) worst = probe;
    if (probe > 1e-8) {
        ok = false;
        detail += "H-monotone probe dH " + fmt(probe, "%.2e") + "; ";
    }
    if (detail.empty()) detail = "4 runs plus H-monotone probe (probe dH " + fmt(probe, "%.2e") + ")";
    return {4, name, worst, bound, ok, detail};
}

CriterionResult criterion5(Suite& s)
{
    const std::string name = "sphere p=3 converges to the constant";
    const std::string bound = "rel sup <= 1e-3, gamma > 0, R^2 > 0.9, < 60 s";
    const Outcome& o = s.c5();
    if (!o.result) return failed(5, name, bound, o.error);
    const SimulationResult& r = *o.result;
    const double vbar = stationary_constant(4, 3.0, r.t_star);
    const double dist = sup_relative(terminal_profile(r), vbar);
    bool ok = dist <= 1e-3 && r.seconds < 60.0;
    std::string detail = "T " + fmt(r.t_star, "%.12g") + ", " + fmt(r.seconds, "%.2f") + " s";
    try {
        const RateFit rf = fit_rate(r.trajectory, *r.grid, Field(r.grid->size(), vbar));
        ok = ok && rf.gamma > 0.0 && rf.quality > 0.9;
        detail += ", gamma " + fmt(rf.gamma, "%.3g") + ", R^2 " + fmt(rf.quality, "%.4f");
    } catch (const std::exception& e) {
        ok = false;
        detail += std::string(", rate fit failed: ") + e.what();
    }
    return {5, name, dist, bound, ok, detail};
}

CriterionResult criterion6(Suite& s)
{
    const std::string name = "short cylinder converges to the constant";
    const std::string bound = "rel sup <= 1e-3, class constant";
    const Outcome& o = s.c6();
    if (!o.result) return failed(6, name, bound, o.error);
    const SimulationResult& r = *o.result;
    const double vbar = std::sqrt(2.0 * r.t_star / 3.0);
    const double dist = sup_relative(terminal_profile(r), vbar);
    const bool constant = r.fit && r.fit->profile.kind == ProfileKind::StationaryConstant;
    return {6, name, dist, bound, dist <= 1e-3 && constant,
            "class " + (r.fit ? to_string(r.fit->profile.kind) : "none (" + r.fit_error + ")")};
}

CriterionResult criterion7(Suite& s)
{
    const std::string name = "long cylinder limit is Fowler or constant";
    const std::string bound = "first integral spread <= 1e-4, period | ell to 1e-3";
    const Outcome& o = s.c7();
    if (!o.result) return failed(7, name, bound, o.error);
    const SimulationResult& r = *o.result;
    if (!r.fit) return failed(7, name, bound, "classification failed: " + r.fit_error);
    if (r.fit->profile.kind == ProfileKind::StationaryConstant)
        return {7, name, 0.0, bound, true, "class constant"};
    if (r.fit->profile.kind != ProfileKind::FowlerOrbit)
        return failed(7, name, bound, "unexpected class " + to_string(r.fit->profile.kind));
    Field v = terminal_profile(r);
    const double scale = std::pow(r.t_star, 1.0 / (r.config.spec.p - 1.0));
    for (double& x : v) x /= scale;
    const std::vector<double> e = pointwise_first_integral(*r.grid, v, 4, 3.0);
    const auto [lo, hi] = std::minmax_element(e.begin(), e.end());
    double mean = 0.0;
    for (double x : e) mean += x / static_cast<double>(e.size());
    const double spread = (*hi - *lo) / std::abs(mean);
    const double period = minimal_period(mean, 4, 3.0);
    const double ratio = r.grid->ell / period;
    const double off = std::abs(ratio - std::round(ratio));
    return {7, name, spread, bound, spread <= 1e-4 && off <= 1e-3 && std::round(ratio) >= 1.0,
            "class fowler, E " + fmt(mean, "%.8f") + ", ell/period " + fmt(ratio, "%.6f")};
}

CriterionResult criterion8(Suite& s)
{
    const std::string name = "sphere p=5 limit is a bubble or constant";
    const std::string bound = "residual_sup / sup v < 1e-2";
    const Outcome& o = s.c8();
    if (!o.result) return failed(8, name, bound, o.error);
    const SimulationResult& r = *o.result;
    if (!r.fit) return failed(8, name, bound, "classification failed: " + r.fit_error);
    const Field& v = terminal_profile(r);
    const double rel = r.fit->residual_sup / *std::max_element(v.begin(), v.end());
    bool ok = rel < 1e-2;
    std::string detail = "class " + to_string(r.fit->profile.kind);
    if (r.fit->profile.kind == ProfileKind::Bubble) {
        const double lambda = r.fit->profile.lambda;
        ok = ok && std::isfinite(lambda) && lambda > 1.0;
        double far = 0.0;
        const double vbar = stationary_constant(4, 5.0, 1.0);
        for (int i = 0; i <= 100; ++i)
            far = std::max(far, std::abs(bubble_profile(4, -1.0 + 0.02 * i, 1e12) - vbar));
        ok = ok && far < 1e-10;
        detail += ", lambda " + fmt(lambda, "%.6g") + ", |bubble(1e12) - const| " + fmt(far, "%.1e");
    } else if (r.fit->profile.kind != ProfileKind::StationaryConstant) {
        ok = false;
    }
    return {8, name, rel, bound, ok, detail};
}

CriterionResult criterion9()
{
    const std::string name = "Fowler period threshold and cross-check";
    const std::string bound = "P > 2pi/sqrt(n-2); limit 0.5%; quad vs orbit 1e-4";
    double worst_cross = 0.0, worst_limit = 0.0;
    bool above = true;
    for (int n : {4, 5}) {
        const double p = yamabe_exponent(n);
        const double ec = fowler_center_energy(n, p);
        const double thr = fowler_period_threshold(n);
        for (int i = 1; i <= 50; ++i) {
            const double e = ec * (1.0 - i / 51.0);
            const double q = minimal_period(e, n, p);
            if (!(q > thr)) above = false;
            const double rp = return_period(e, n, p);
            worst_cross = std::max(worst_cross, std::abs(q - rp) / q);
        }
        worst_limit = std::max(worst_limit, std::abs(minimal_period(ec + 1e-4, n, p) / thr - 1.0));
    }
    return {9, name, worst_cross, bound, above && worst_limit <= 5e-3 && worst_cross <= 1e-4,
            "limit deviation " + fmt(worst_limit, "%.2e") + (above ? "" : ", threshold violated")};
}

CriterionResult criterion10(unsigned seed)
{
    const std::string name = "exact singular solution maps to a constant";
    const std::string bound = "rel deviation <= 1e-12";
    const int n = 4;
    const double m = 1.0 / 3.0, p = 3.0, t_star = 1.0;
    const double target = stationary_constant(n, p, t_star);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> log_r(std::log(1e-3), std::log(1e3));
    std::uniform_real_distribution<double> tau(0.0, 0.99 * t_star);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double r = std::exp(log_r(rng));
        const double t = tau(rng);
        const double w = to_cylindrical(singular_barenblatt(n, m, t_star, t, r), r, p);
        const Field v = rescale_field(std::vector<double>{w}, t, t_star, p);
        worst = std::max(worst, std::abs(v[0] - target) / target);
    }
    return {10, name, worst, bound, worst <= 1e-12, "1000 random (r, t) samples"};
}

CriterionResult criterion11(Suite& s)
{
    const std::string name = "self-convergence order of the limits";
    const std::string bound = "rates in [1.8, 2.2]";
    double rates[2];
    std::string detail;
    for (int which = 0; which < 2; ++which) {
        const Outcome* o[3];
        for (int k = 0; k < 3; ++k) o[k] = which == 0 ? &s.c5(1 << k) : &s.c6(1 << k);
        double lim[3];
        long rejected = 0;
        for (int k = 0; k < 3; ++k) {
            if (!o[k]->result) return failed(11, name, bound, o[k]->error);
            lim[k] = stationary_constant(4, 3.0, o[k]->result->t_star);
            rejected += o[k]->result->trajectory.rejected_steps;
        }
        rates[which] = std::log2(std::abs(lim[0] - lim[1]) / std::abs(lim[1] - lim[2]));
        detail += std::string(which == 0 ? "sphere " : ", cylinder ") + fmt(rates[which], "%.4f");
        if (rejected) detail += " (rejected steps " + std::to_string(rejected) + ")";
    }
    const double worst = std::abs(rates[0] - 2.0) > std::abs(rates[1] - 2.0) ? rates[0] : rates[1];
    const bool ok = rates[0] >= 1.8 && rates[0] <= 2.2 && rates[1] >= 1.8 && rates[1] <= 2.2;
    return {11, name, worst, bound, ok, detail};
}

CriterionResult criterion12(Suite& s)
{
    const std::string name = "discrete dzeta/dt matches -(p-1)/p H";
    const std::string bound = "max rel error <= 1e-2";
    const Outcome& o = s.c1();
    if (!o.result) return failed(12, name, bound, o.error);
    const double p = o.result->config.spec.p;
    const auto& rows = o.result->estimate->fine_run.rows;
    const double mass0 = rows.front().mass;
    double worst = 0.0;
    std::size_t used = 0;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        if (rows[k].mass <= 0.05 * mass0) break;
        const double slope = (rows[k].zeta - rows[k - 1].zeta) / rows[k].dt;
        const double expected = -(p - 1.0) / p * rows[k].H;
        worst = std::max(worst, std::abs(slope - expected) / std::abs(expected));
        ++used;
    }
    return {12, name, worst, bound, worst <= 1e-2 && used > 0, std::to_string(used) + " steps"};
}

}  // namespace

double h_monotone_probe(bool flip_b_sign, int n_rho)
{
    const ProblemSpec spec = ProblemSpec::make(4, std::nullopt, 3.0, Geometry::CylinderRho, 6.0);
    auto grid = std::make_shared<const Grid>(build_grid(spec, {n_rho, 0}));
    const Field w0 = sample(*grid, [&](double rho, double) {
        return std::cbrt(1.0 + 0.4 * std::cos(2.0 * std::numbers::pi * rho / 6.0));
    });
    const Coefficients co = spec.coefficients();
    const DiscreteOperator op(grid, co.a, co.b);
    const double t_star = spec.p * zeta(*grid, w0, spec.p) /
                          ((spec.p + 1.0) * rayleigh_quotient(op, w0, spec.p));
    FlowConfig cfg;
    cfg.t_star = t_star;
    cfg.t_end = 5.0 * t_star;
    cfg.dt_max = 0.05 * t_star;
    cfg.flip_b_sign = flip_b_sign;
    const TrajectoryRecord rec = run(w0, spec, grid, cfg);
    return monotone(rec).max_dh;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options)
{
    Suite suite(options);
    const std::vector<std::pair<int, std::function<CriterionResult()>>> all = {
        {1, [&] { return criterion1(suite); }},   {2, [&] { return criterion2(suite); }},
        {5, [&] { return criterion5(suite); }},   {6, [&] { return criterion6(suite); }},
        {7, [&] { return criterion7(suite); }},   {8, [&] { return criterion8(suite); }},
        {4, [&] { return criterion4(suite); }},   {9, [&] { return criterion9(); }},
        {10, [&] { return criterion10(20240601u); }}, {11, [&] { return criterion11(suite); }},
        {12, [&] { return criterion12(suite); }}, {3, [&] { return criterion3(suite); }},
    };
    std::vector<CriterionResult> out;
    for (const auto& [id, fn] : all) {
        if (!options.only.empty() && !options.only.count(id)) continue;
        try {
            out.push_back(fn());
        } catch (const std::exception& e) {
            out.push_back(failed(id, "criterion " + std::to_string(id), "", e.what()));
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    return out;
}

void print_report(std::ostream& out, const std::vector<CriterionResult>& results)
{
    for (const CriterionResult& r : results) {
        char line[512];
        std::snprintf(line, sizeof line, "criterion %2d  %-4s  %-48s measured %-13s bound %s", r.id,
                      r.pass ? "PASS" : "FAIL", r.name.c_str(), fmt(r.measured, "%.6g").c_str(),
                      r.bound.c_str());
        out << line;
        if (!r.detail.empty()) out << "  [" << r.detail << "]";
        out << '\n';
    }
}

bool all_passed(const std::vector<CriterionResult>& results)
{
    return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
}

}  // namespace fde
