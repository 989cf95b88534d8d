// fde: command-line front end (simulate, fowler, profiles, verify).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fde/acceptance.hpp"
#include "fde/config.hpp"
#include "fde/constants.hpp"
#include "fde/fowler.hpp"
#include "fde/io.hpp"
#include "fde/pipeline.hpp"
#include "fde/transform.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

void print_error(const std::string& type, const std::string& message,
                 const std::optional<std::string>& key = std::nullopt)
{
    json j = {{"error", {{"type", type}, {"message", message}}}};
    if (key) j["error"]["key"] = *key;
    std::cerr << j.dump() << '\n';
}

// Runs fn and turns exceptions into an error JSON plus exit status.
template <class F>
int guarded(F&& fn)
{
    try {
        return fn();
    } catch (const fde::ConfigError& e) {
        print_error("config", e.what(), e.key());
        return kExitConfig;
    } catch (const fde::DomainError& e) {
        print_error("domain", e.what());
        return kExitFailure;
    } catch (const std::exception& e) {
        print_error("runtime", e.what());
        return kExitFailure;
    }
}

fs::path output_root()
{
    if (const char* env = std::getenv("FDE_OUT_DIR"); env && *env) return env;
    return fs::current_path();
}

// ---------------------------------------------------------------- simulate

struct SimulateFlags {
    std::string config;
    std::string out;
    std::string mode;
    std::optional<double> tstar;
    std::string resolution;
    std::string sweep;
    unsigned jobs = 0;
    bool inject = false;
};

void apply_overrides(fde::RunConfig& cfg, const SimulateFlags& f)
{
    if (!f.mode.empty()) {
        try {
            cfg.flow.mode = fde::flow_mode_from_string(f.mode);
        } catch (const std::exception& e) {
            throw fde::ConfigError("mode", e.what());
        }
    }
    if (f.tstar) {
        if (!(*f.tstar > 0.0)) throw fde::ConfigError("tstar", "must be positive");
        cfg.spec.t_star = *f.tstar;
        cfg.flow.t_star.reset();
    }
    if (!f.resolution.empty()) cfg.resolution = fde::parse_resolution(f.resolution, cfg.spec);
}

json run_summary(const fde::SimulationResult& r, const fs::path& dir)
{
    json s = {{"output_dir", dir.string()},
              {"t_star", r.t_star},
              {"stop", fde::to_string(r.trajectory.stop)},
              {"steps", r.trajectory.rows.back().step},
              {"seconds", r.seconds}};
    s["classification"] = r.fit ? json(fde::to_string(r.fit->profile.kind)) : json(nullptr);
    if (r.estimate) s["t_star_uncertainty"] = r.estimate->uncertainty;
    return s;
}

int simulate_one(const SimulateFlags& f)
{
    if (f.config.empty()) throw fde::ConfigError("config", "simulate needs --config or --sweep");
    fde::RunConfig cfg = fde::load_config(f.config);
    apply_overrides(cfg, f);
    const fs::path dir = f.out.empty() ? output_root() / cfg.output_dir : fs::path(f.out);
    fde::SimulateOptions opt;
    opt.flip_b_sign = f.inject;
    const fde::SimulationResult res = fde::simulate(cfg, opt);
    fde::write_artifacts(res, dir);
    std::cout << run_summary(res, dir).dump(2) << '\n';
    return 0;
}

struct SweepRun {
    std::string name;
    fde::RunConfig config;
};

// A sweep document holds an optional "base" (path or inline config) and a
// "runs" array; each run has a "name" and is merged over the base.
std::vector<SweepRun> load_sweep(const fs::path& path, const SimulateFlags& f)
{
    const json doc = fde::read_config_document(path);
    const fs::path dir = path.parent_path();
    json base = json::object();
    if (doc.contains("base")) {
        const json& b = doc.at("base");
        if (b.is_string()) {
            base = fde::read_config_document(dir / b.get<std::string>());
            if (base.contains("fde_manifest")) base = base.at("config");
        } else if (b.is_object()) {
            base = b;
        } else {
            throw fde::ConfigError("base", "expected a path or a table");
        }
    }
    if (!doc.contains("runs") || !doc.at("runs").is_array() || doc.at("runs").empty())
        throw fde::ConfigError("runs", "expected a non-empty array of runs");
    for (const auto& [key, _] : doc.items())
        if (key != "base" && key != "runs") throw fde::ConfigError(key, "unknown sweep key");
    std::vector<SweepRun> runs;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < doc.at("runs").size(); ++i) {
        const std::string where = "runs[" + std::to_string(i) + "]";
        json entry = doc.at("runs")[i];
        if (!entry.is_object()) throw fde::ConfigError(where, "expected a table");
        if (!entry.contains("name") || !entry.at("name").is_string())
            throw fde::ConfigError(where + ".name", "each run needs a string name");
        const std::string name = entry.at("name").get<std::string>();
        if (name.empty() || name.find('/') != std::string::npos || name == "." || name == "..")
            throw fde::ConfigError(where + ".name", "not usable as a directory name");
        if (std::find(names.begin(), names.end(), name) != names.end())
            throw fde::ConfigError(where + ".name", "duplicate run name " + name);
        names.push_back(name);
        entry.erase("name");
        json merged = base;
        merged.merge_patch(entry);
        fde::RunConfig cfg;
        try {
            cfg = fde::parse_config(merged);
        } catch (const fde::ConfigError& e) {
            throw fde::ConfigError(where + "." + e.key(), e.what());
        }
        if (cfg.initial.kind == fde::InitialKind::ExplicitTable && fs::path(cfg.initial.path).is_relative())
            cfg.initial.path = (dir / cfg.initial.path).string();
        apply_overrides(cfg, f);
        runs.push_back({name, std::move(cfg)});
    }
    return runs;
}

int simulate_sweep(const SimulateFlags& f)
{
    const std::vector<SweepRun> runs = load_sweep(f.sweep, f);
    const fs::path root = f.out.empty() ? output_root() : fs::path(f.out);
    const unsigned jobs = std::max(1u, std::min<unsigned>(
        f.jobs ? f.jobs : std::thread::hardware_concurrency(), static_cast<unsigned>(runs.size())));

    std::vector<json> results(runs.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < runs.size(); i = next++) {
            const fs::path dir = root / runs[i].name;
            json r;
            try {
                fde::SimulateOptions opt;
                opt.flip_b_sign = f.inject;
                const fde::SimulationResult res = fde::simulate(runs[i].config, opt);
                fde::write_artifacts(res, dir);
                r = run_summary(res, dir);
                r["ok"] = true;
            } catch (const std::exception& e) {
                r = {{"ok", false}, {"output_dir", dir.string()}, {"error", e.what()}};
            }
            r["name"] = runs[i].name;
            std::lock_guard lock(log_mutex);
            std::cerr << runs[i].name << ": " << (r["ok"].get<bool>() ? "done" : "failed") << '\n';
            results[i] = std::move(r);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    const bool ok = std::all_of(results.begin(), results.end(), [](const json& r) { return r["ok"].get<bool>(); });
    std::cout << json{{"runs", results}}.dump(2) << '\n';
    return ok ? 0 : kExitFailure;
}

// ---------------------------------------------------------------- fowler

struct FowlerFlags {
    int n = 4;
    int count = 20;
    std::vector<double> energies;
    std::string out;
};

int cmd_fowler(const FowlerFlags& f)
{
    const double p = fde::yamabe_exponent(f.n);
    fde::require_critical(f.n, p);
    std::vector<double> energies = f.energies;
    if (energies.empty()) {
        if (f.count < 1) throw fde::ConfigError("count", "must be at least 1");
        const double ec = fde::fowler_center_energy(f.n, p);
        for (int i = 1; i <= f.count; ++i) energies.push_back(ec * (1.0 - double(i) / (f.count + 1)));
    }
    std::ofstream file;
    if (!f.out.empty()) {
        file.open(f.out);
        if (!file) throw std::runtime_error("cannot write " + f.out);
    }
    std::ostream& out = f.out.empty() ? std::cout : file;
    out << "E,v_min,v_max,period\n";
    for (double e : energies) {
        const fde::OrbitDescriptor d = fde::describe_orbit(e, f.n, p);
        out << fde::format_double(d.energy) << ',' << fde::format_double(d.v_min) << ','
            << fde::format_double(d.v_max) << ',' << fde::format_double(d.period) << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------- profiles

struct ProfileFlags {
    std::string kind;
    int n = 4;
    std::optional<double> p;
    std::optional<double> m;
    double tstar = 1.0;
    double lambda = 2.0;
    double theta0 = 0.0;
    double ell = 6.0;
    int k = 1;
    double phase = 0.0;
    int points = 201;
    bool physical = false;
    double time = 0.0;
    double r_min = 0.1;
    double r_max = 10.0;
    double theta = 0.0;
    std::string out;
};

int cmd_profiles(const ProfileFlags& f)
{
    if (f.points < 2) throw fde::ConfigError("points", "need at least 2 points");
    if (!(f.tstar > 0.0)) throw fde::ConfigError("tstar", "must be positive");
    std::optional<double> p = f.p;
    if (!p && !f.m) {
        p = f.kind == "bubble" ? fde::bubble_exponent(f.n) : fde::yamabe_exponent(f.n);
    }
    const fde::ProblemSpec spec = fde::ProblemSpec::make(f.n, f.m, p, fde::Geometry::SphereAxisym);
    const double pe = spec.p;
    const double scale = std::pow(f.tstar, 1.0 / (pe - 1.0));

    // v as a function of (rho, theta) in the rescaled frame
    std::function<double(double, double)> v;
    bool along_rho = false;
    if (f.kind == "constant") {
        const double c = fde::stationary_constant(f.n, pe, f.tstar);
        v = [c](double, double) { return c; };
    } else if (f.kind == "bubble") {
        if (std::abs(pe - fde::bubble_exponent(f.n)) > 1e-12 * pe)
            throw fde::DomainError("bubble needs p = (n+1)/(n-3)");
        if (!(f.lambda > 1.0)) throw fde::DomainError("bubble needs lambda > 1");
        v = [&, scale](double, double th) {
            return scale * fde::bubble_profile(f.n, std::cos(th - f.theta0), f.lambda);
        };
    } else if (f.kind == "fowler") {
        fde::require_critical(f.n, pe);
        const fde::ProblemSpec line = fde::ProblemSpec::make(f.n, std::nullopt, pe, fde::Geometry::CylinderRho, f.ell);
        const int nodes = std::max(f.points, 1024);
        const fde::Grid grid = fde::build_grid(line, {nodes, 0});
        const fde::Field samples = fde::fowler_on_grid(f.ell, f.k, f.phase, f.n, pe, grid);
        // periodic linear interpolation between cell centers
        v = [&, samples, nodes, scale](double rho, double) {
            const double h = f.ell / nodes;
            double x = std::fmod(rho / h - 0.5, double(nodes));
            if (x < 0.0) x += nodes;
            const int i = static_cast<int>(x) % nodes;
            const double w = x - std::floor(x);
            return scale * ((1.0 - w) * samples[i] + w * samples[(i + 1) % nodes]);
        };
        along_rho = true;
    } else if (f.kind != "barenblatt") {
        throw fde::ConfigError("kind", "expected constant, bubble, fowler or barenblatt");
    }

    std::ofstream file;
    if (!f.out.empty()) {
        file.open(f.out);
        if (!file) throw std::runtime_error("cannot write " + f.out);
    }
    std::ostream& out = f.out.empty() ? std::cout : file;
    out << "# columns: coordinate,value\n";
    auto emit = [&](double x, double y) {
        out << fde::format_double(x) << ',' << fde::format_double(y) << '\n';
    };

    if (f.kind == "barenblatt" || f.physical) {
        if (!(f.r_min > 0.0) || !(f.r_max > f.r_min)) throw fde::ConfigError("r-range", "need 0 < r_min < r_max");
        if (!(f.time >= 0.0) || !(f.time < f.tstar)) throw fde::DomainError("need 0 <= t < T*");
        const double lr0 = std::log(f.r_min), lr1 = std::log(f.r_max);
        for (int i = 0; i < f.points; ++i) {
            const double r = std::exp(lr0 + (lr1 - lr0) * i / (f.points - 1));
            if (f.kind == "barenblatt") {
                emit(r, fde::singular_barenblatt(f.n, spec.m(), f.tstar, f.time, r));
            } else {
                const double w = v(std::log(r), f.theta) / fde::rescale_factor(f.time, f.tstar, pe);
                emit(r, fde::from_cylindrical(w, r, pe));
            }
        }
        return 0;
    }
    const double span = along_rho ? f.ell : std::numbers::pi;
    for (int i = 0; i < f.points; ++i) {
        const double x = span * i / (f.points - 1);
        emit(x, along_rho ? v(x, 0.0) : v(0.0, x));
    }
    return 0;
}

// ---------------------------------------------------------------- verify

int cmd_verify(bool quick, bool inject, const std::vector<int>& only)
{
    fde::AcceptanceOptions opt;
    opt.quick = quick;
    opt.flip_b_sign = inject;
    opt.only = {only.begin(), only.end()};
    opt.progress = &std::cerr;
    const auto results = fde::run_acceptance(opt);
    fde::print_report(std::cout, results);
    std::string failing;
    for (const auto& r : results)
        if (!r.pass) failing += (failing.empty() ? "" : ", ") + std::to_string(r.id) + " (" + r.name + ")";
    if (failing.empty()) {
        std::cout << "all " << results.size() << " criteria passed\n";
        return 0;
    }
    std::cout << "FAILED criteria: " << failing << '\n';
    return kExitFailure;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Transformed fast diffusion solver"};
    app.require_subcommand(1);

    SimulateFlags sim;
    auto* simulate = app.add_subcommand("simulate", "run the flow and write artifacts");
    simulate->add_option("--config", sim.config, "TOML or JSON config, or a run manifest");
    simulate->add_option("--out", sim.out, "output directory (sweep: root of per-run directories)");
    simulate->add_option("--mode", sim.mode, "raw or rescaled");
    simulate->add_option("--tstar", sim.tstar, "extinction time; skips the raw-flow estimate");
    simulate->add_option("--resolution", sim.resolution, "N or N_rho,N_theta");
    simulate->add_option("--sweep", sim.sweep, "sweep document: base config plus named runs");
    simulate->add_option("--jobs", sim.jobs, "sweep worker count (default: hardware threads)");
    simulate->add_flag("--inject-b-sign-error", sim.inject)->group("");

    FowlerFlags fow;
    auto* fowler = app.add_subcommand("fowler", "period-energy table of Fowler orbits");
    fowler->add_option("--n", fow.n, "dimension (p is the critical exponent)");
    fowler->add_option("--count", fow.count, "energies evenly spaced in (E_c, 0)");
    fowler->add_option("--energy", fow.energies, "explicit energies (repeatable)");
    fowler->add_option("--out", fow.out, "CSV path (default stdout)");

    ProfileFlags prof;
    auto* profiles = app.add_subcommand("profiles", "sample a closed-form profile");
    profiles->add_option("kind", prof.kind, "constant, bubble, fowler or barenblatt")->required();
    profiles->add_option("--n", prof.n);
    profiles->add_option("--p", prof.p);
    profiles->add_option("--m", prof.m);
    profiles->add_option("--tstar", prof.tstar);
    profiles->add_option("--lambda", prof.lambda);
    profiles->add_option("--theta0", prof.theta0, "bubble center polar angle");
    profiles->add_option("--ell", prof.ell);
    profiles->add_option("--k", prof.k);
    profiles->add_option("--phase", prof.phase);
    profiles->add_option("--points", prof.points);
    profiles->add_flag("--physical", prof.physical, "emit u(r, t) along a ray");
    profiles->add_option("--time", prof.time, "physical time t in [0, T*)");
    profiles->add_option("--r-min", prof.r_min);
    profiles->add_option("--r-max", prof.r_max);
    profiles->add_option("--theta", prof.theta, "polar angle of the ray");
    profiles->add_option("--out", prof.out, "CSV path (default stdout)");

    bool quick = false, inject = false;
    std::vector<int> only;
    auto* verify = app.add_subcommand("verify", "run the acceptance criteria");
    verify->add_flag("--quick", quick, "halved resolutions");
    verify->add_option("--only", only, "criterion ids to run");
    verify->add_flag("--inject-b-sign-error", inject)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        print_error("usage", e.what());
        return kExitConfig;
    }

    if (simulate->parsed())
        return guarded([&] {
            if (!sim.sweep.empty()) {
                if (!sim.config.empty()) throw fde::ConfigError("sweep", "--sweep and --config are exclusive");
                return simulate_sweep(sim);
            }
            return simulate_one(sim);
        });
    if (fowler->parsed()) return guarded([&] { return cmd_fowler(fow); });
    if (profiles->parsed()) return guarded([&] { return cmd_profiles(prof); });
    return cmd_verify(quick, inject, only);
}
