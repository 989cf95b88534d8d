#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fde/config.hpp"
#include "fde/io.hpp"
#include "fde/pipeline.hpp"

using namespace fde;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "fde_tests";
    fs::create_directories(dir);
    return dir / name;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string key_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "";
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("TOML config round trip")
{
    const fs::path p = scratch("run.toml");
    write(p, R"(output_dir = "x"
seed = 4
[problem]
n = 4
m = 0.2
geometry = "cylinder_full"
ell = 5.0
[grid]
n_rho = 32
n_theta = 24
[initial]
kind = "cosine"
base = 1.0
amplitude = 0.25
mode_rho = 2
mode_theta = 1
[flow]
mode = "rescaled"
dt_max = 0.01
t_end = 3.0
)");
    const RunConfig c = load_config(p);
    CHECK(c.spec.p == Approx(5.0));
    CHECK(c.spec.geometry == Geometry::CylinderFull);
    CHECK(c.resolution.n_rho == 32);
    CHECK(c.resolution.n_theta == 24);
    CHECK(c.initial.kind == InitialKind::CosinePerturbation);
    CHECK(c.initial.mode_rho == 2);
    CHECK(*c.dt_max == 0.01);
    CHECK(c.seed == 4u);

    const RunConfig again = parse_config(c.to_json());
    CHECK(again.to_json() == c.to_json());
}

TEST_CASE("malformed configs name the offending key")
{
    CHECK(key_of([] { parse_config({{"problem", {{"n", 4}, {"p", 3}, {"geometry", "sphere_axisym"}}}, {"flow", {{"dt_inital", 0.1}}}}); }) == "flow.dt_inital");
    CHECK(key_of([] { parse_config({{"problem", {{"n", 4}, {"p", 3}, {"geometry", "torus"}}}}); }) == "problem.geometry");
    CHECK(key_of([] { parse_config({{"problem", {{"n", 4}, {"p", "three"}, {"geometry", "sphere_axisym"}}}}); }) == "problem.p");
    CHECK(key_of([] { parse_config({{"problem", {{"n", 4}, {"p", 3}, {"geometry", "sphere_axisym"}}}, {"grid", {{"n_theta", 8}}}}); }).rfind("grid", 0) == 0);
    CHECK(key_of([] { parse_config({{"problem", {{"n", 4}, {"p", 3}, {"geometry", "sphere_axisym"}}}, {"initial", {{"kind", "cosine"}, {"base", 1.0}, {"amplitude", 2.0}}}}); }).rfind("initial", 0) == 0);
    CHECK(key_of([] { parse_config({{"bogus", 1}}); }) == "bogus");

    const fs::path p = scratch("broken.toml");
    write(p, "[problem\nn = 4\n");
    CHECK_THROWS_AS(load_config(p), ConfigError);
}

TEST_CASE("resolution strings")
{
    const ProblemSpec s = ProblemSpec::make(4, std::nullopt, 3.0, Geometry::CylinderFull, 5.0);
    const Resolution a = parse_resolution("64", s);
    CHECK(a.n_rho == 64);
    CHECK(a.n_theta == 64);
    const Resolution b = parse_resolution("32,20", s);
    CHECK(b.n_rho == 32);
    CHECK(b.n_theta == 20);
    CHECK_THROWS_AS(parse_resolution("12", s), ConfigError);
    CHECK_THROWS_AS(parse_resolution("32x20", s), ConfigError);
}

TEST_CASE("initial data")
{
    const ProblemSpec s = ProblemSpec::make(4, std::nullopt, 3.0, Geometry::SphereAxisym);
    const Grid g = build_grid(s, {0, 32});
    InitialData d;
    d.kind = InitialKind::CosinePerturbation;
    d.base = 1.0;
    d.amplitude = 0.3;
    const Field w = sample_initial(d, s, g);
    for (std::size_t k = 0; k < w.size(); ++k)
        CHECK(std::pow(w[k], 3.0) == Approx(1.0 + 0.3 * std::cos(g.theta_at(k))).epsilon(1e-13));

    const fs::path table = scratch("w0.csv");
    {
        std::ofstream out(table);
        write_field_csv(out, g, Field(g.size(), 8.0), "");
    }
    d.kind = InitialKind::ExplicitTable;
    d.path = table.string();
    for (double x : sample_initial(d, s, g)) CHECK(x == Approx(2.0).epsilon(1e-14));
}

TEST_CASE("simulation artifacts are deterministic and rerunnable from the manifest")
{
    RunConfig c;
    c.spec = ProblemSpec::make(4, std::nullopt, 3.0, Geometry::SphereAxisym);
    c.resolution = {0, 32};
    c.initial.kind = InitialKind::CosinePerturbation;
    c.initial.amplitude = 0.2;
    c.flow.rebound_factor = 100.0;
    const SimulationResult a = simulate(c);
    REQUIRE(a.fit);
    CHECK(a.fit->profile.kind == ProfileKind::StationaryConstant);

    const fs::path d1 = scratch("run1"), d2 = scratch("run2");
    fs::remove_all(d1);
    fs::remove_all(d2);
    write_artifacts(a, d1);
    const SimulationResult b = simulate(load_config(d1 / "manifest.json"));
    write_artifacts(b, d2);
    for (const char* f : {"timeseries.csv", "terminal.csv", "initial.csv", "fitted.csv"})
        CHECK(slurp(d1 / f) == slurp(d2 / f));

    const std::string header = slurp(d1 / "timeseries.csv").substr(0, 70);
    CHECK(header.rfind("t,tau_physical,dt,zeta,H,J,sup_v,inf_v,harnack_ratio,residual_to_limit", 0) == 0);
    CHECK(fs::exists(d1 / "snapshots" / "step_0.csv"));
}

TEST_CASE("round-trip decimal formatting")
{
    for (double x : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5}) CHECK(std::stod(format_double(x)) == x);
}
