#include "fde/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace fde {

namespace {

using nlohmann::json;

std::ofstream open_for_write(const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json rate_json(const RateFit& r)
{
    return {{"gamma", finite_or_null(r.gamma)},
            {"prefactor", r.prefactor},
            {"quality", r.quality},
            {"samples", r.samples},
            {"at_limit", r.at_limit}};
}

}  // namespace

std::string format_double(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

const std::vector<std::string>& timeseries_columns()
{
    static const std::vector<std::string> cols = {"t",     "tau_physical", "dt",
                                                  "zeta",  "H",            "J",
                                                  "sup_v", "inf_v",        "harnack_ratio",
                                                  "residual_to_limit"};
    return cols;
}

void write_timeseries_csv(std::ostream& out, const TrajectoryRecord& rec)
{
    const auto& cols = timeseries_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const DiagnosticRow& r : rec.rows) {
        const double vals[] = {r.t,     r.tau_physical, r.dt,    r.zeta,          r.H,
                               r.J,     r.sup_v,        r.inf_v, r.harnack_ratio, r.residual_to_limit};
        for (std::size_t i = 0; i < std::size(vals); ++i)
            out << (i ? "," : "") << format_double(vals[i]);
        out << '\n';
    }
}

void write_field_csv(std::ostream& out, const Grid& grid, std::span<const double> values,
                     const std::string& comment)
{
    if (!comment.empty()) out << "# " << comment << '\n';
    out << "# columns: rho,theta,value\n";
    for (std::size_t k = 0; k < values.size(); ++k)
        out << format_double(grid.rho_at(k)) << ',' << format_double(grid.theta_at(k)) << ','
            << format_double(values[k]) << '\n';
}

json manifest(const SimulationResult& res)
{
    const Coefficients co = res.config.spec.coefficients();
    json m;
    m["fde_manifest"] = 1;
    m["config"] = res.config.to_json();
    m["grid"] = to_json(*res.grid);
    m["coefficients"] = {{"a", co.a}, {"b", co.b}};
    m["t_star"] = res.t_star;
    m["estimate"] = res.estimate ? res.estimate->to_json() : json(nullptr);
    if (res.shooting)
        m["shooting"] = {{"t_star", res.shooting->t_star},
                         {"lower", res.shooting->lower},
                         {"upper", res.shooting->upper},
                         {"probes", res.shooting->probes}};
    else
        m["shooting"] = nullptr;
    const TrajectoryRecord& tr = res.trajectory;
    m["run"] = {{"mode", to_string(tr.mode)},
                {"dt_max", res.dt_max},
                {"stop", to_string(tr.stop)},
                {"steps", tr.rows.back().step},
                {"rejected_steps", tr.rejected_steps},
                {"terminal_step", tr.rows[tr.mode == FlowMode::Rescaled ? tr.best_row : tr.rows.size() - 1].step},
                {"seconds", res.seconds}};
    m["diagnostics_schema"] = {{"file", "timeseries.csv"}, {"columns", timeseries_columns()}};
    m["profile_fit"] = res.fit ? res.fit->to_json() : json(nullptr);
    if (!res.fit_error.empty()) m["profile_fit_error"] = res.fit_error;
    m["rate_fit"] = res.rate ? rate_json(*res.rate) : json(nullptr);
    if (!res.rate_error.empty()) m["rate_fit_error"] = res.rate_error;
    json snaps = json::array();
    for (const Snapshot& s : tr.snapshots)
        snaps.push_back({{"step", s.step}, {"t", s.t}, {"file", "snapshots/step_" + std::to_string(s.step) + ".csv"}});
    m["snapshots"] = snaps;
    return m;
}

void write_artifacts(const SimulationResult& res, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir / "snapshots");
    {
        auto out = open_for_write(dir / "manifest.json");
        out << manifest(res).dump(2) << '\n';
    }
    {
        auto out = open_for_write(dir / "timeseries.csv");
        write_timeseries_csv(out, res.trajectory);
    }
    {
        auto out = open_for_write(dir / "initial.csv");
        write_field_csv(out, *res.grid, res.initial, "w0");
    }
    {
        auto out = open_for_write(dir / "terminal.csv");
        const TrajectoryRecord& tr = res.trajectory;
        const std::size_t row = tr.mode == FlowMode::Rescaled ? tr.best_row : tr.rows.size() - 1;
        write_field_csv(out, *res.grid, terminal_profile(res), "t = " + format_double(tr.rows[row].t));
    }
    if (res.fit) {
        auto out = open_for_write(dir / "profile_fit.json");
        out << res.fit->to_json().dump(2) << '\n';
        auto fitted = open_for_write(dir / "fitted.csv");
        write_field_csv(fitted, *res.grid, res.fit->fitted, to_string(res.fit->profile.kind));
    }
    for (const Snapshot& s : res.trajectory.snapshots) {
        auto out = open_for_write(dir / "snapshots" / ("step_" + std::to_string(s.step) + ".csv"));
        write_field_csv(out, *res.grid, s.values, "t = " + format_double(s.t));
    }
}

}  // namespace fde
