#include "fde/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "fde/fowler.hpp"

namespace fde {

namespace {

using nlohmann::json;

json toml_to_json(const toml::node& node)
{
    if (const auto* t = node.as_table()) {
        json out = json::object();
        for (const auto& [k, v] : *t) out[std::string(k.str())] = toml_to_json(v);
        return out;
    }
    if (const auto* a = node.as_array()) {
        json out = json::array();
        for (const auto& v : *a) out.push_back(toml_to_json(v));
        return out;
    }
    if (const auto* v = node.as_integer()) return v->get();
    if (const auto* v = node.as_floating_point()) return v->get();
    if (const auto* v = node.as_boolean()) return v->get();
    if (const auto* v = node.as_string()) return v->get();
    throw ConfigError("<document>", "unsupported TOML value type");
}

// Typed access to one table of the document; every lookup is recorded so
// leftover keys can be reported as unknown.
class Section {
public:
    Section(const json& doc, std::string prefix) : prefix_(std::move(prefix))
    {
        if (doc.is_null()) return;
        if (!doc.is_object()) throw ConfigError(prefix_.empty() ? "<document>" : prefix_, "expected a table");
        node_ = &doc;
    }

    std::string key(const std::string& name) const { return prefix_.empty() ? name : prefix_ + "." + name; }

    bool has(const std::string& name)
    {
        seen_.insert(name);
        return node_ && node_->contains(name) && !node_->at(name).is_null();
    }

    double number(const std::string& name, double fallback)
    {
        if (!has(name)) return fallback;
        const json& v = node_->at(name);
        if (!v.is_number()) throw ConfigError(key(name), "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ConfigError(key(name), "expected a finite number");
        return x;
    }

    std::optional<double> optional_number(const std::string& name)
    {
        if (!has(name)) return std::nullopt;
        return number(name, 0.0);
    }

    long integer(const std::string& name, long fallback)
    {
        if (!has(name)) return fallback;
        const json& v = node_->at(name);
        if (!v.is_number_integer()) throw ConfigError(key(name), "expected an integer");
        return v.get<long>();
    }

    bool boolean(const std::string& name, bool fallback)
    {
        if (!has(name)) return fallback;
        const json& v = node_->at(name);
        if (!v.is_boolean()) throw ConfigError(key(name), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& name, const std::string& fallback)
    {
        if (!has(name)) return fallback;
        const json& v = node_->at(name);
        if (!v.is_string()) throw ConfigError(key(name), "expected a string");
        return v.get<std::string>();
    }

    const json& child(const std::string& name)
    {
        static const json null_json;
        if (!has(name)) return null_json;
        return node_->at(name);
    }

    void reject_unknown() const
    {
        if (!node_) return;
        for (const auto& [k, v] : node_->items())
            if (!seen_.count(k)) throw ConfigError(key(k), "unknown key");
    }

private:
    const json* node_ = nullptr;
    std::string prefix_;
    std::set<std::string> seen_;
};

template <class F>
auto checked(const std::string& key, F&& f)
{
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(key, e.what());
    }
}

void require(bool ok, const std::string& key, const std::string& message)
{
    if (!ok) throw ConfigError(key, message);
}

Field read_table(const std::string& path, const Grid& grid)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("initial.path", "cannot open table " + path);
    Field values;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto comma = line.find_last_of(',');
        const std::string cell = comma == std::string::npos ? line : line.substr(comma + 1);
        try {
            values.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw ConfigError("initial.path", "bad number in table: " + line);
        }
    }
    if (values.size() != grid.size())
        throw ConfigError("initial.path", "table has " + std::to_string(values.size()) +
                                              " values, grid has " + std::to_string(grid.size()));
    return values;
}

}  // namespace

std::string to_string(InitialKind k)
{
    switch (k) {
    case InitialKind::Constant: return "constant";
    case InitialKind::CosinePerturbation: return "cosine";
    case InitialKind::BubbleSeed: return "bubble";
    case InitialKind::FowlerSeed: return "fowler";
    case InitialKind::ExplicitTable: return "table";
    }
    return "unknown";
}

json InitialData::to_json() const
{
    json j = {{"kind", to_string(kind)}};
    switch (kind) {
    case InitialKind::Constant: j["value"] = value; break;
    case InitialKind::CosinePerturbation:
        j["base"] = base;
        j["amplitude"] = amplitude;
        j["mode_rho"] = mode_rho;
        j["mode_theta"] = mode_theta;
        break;
    case InitialKind::BubbleSeed: j["lambda"] = lambda; break;
    case InitialKind::FowlerSeed:
        j["k"] = k;
        j["phase"] = phase;
        break;
    case InitialKind::ExplicitTable: j["path"] = path; break;
    }
    return j;
}

Field sample_initial(const InitialData& init, const ProblemSpec& spec, const Grid& grid)
{
    const double inv_p = 1.0 / spec.p;
    switch (init.kind) {
    case InitialKind::Constant:
        require(init.value > 0.0, "initial.value", "constant must be positive");
        return Field(grid.size(), init.value);
    case InitialKind::CosinePerturbation: {
        require(std::abs(init.amplitude) < init.base, "initial.amplitude",
                "|amplitude| must be below base for positivity");
        const bool use_rho = grid.has_rho() && init.mode_rho != 0;
        const bool use_theta = grid.has_theta() && init.mode_theta != 0;
        return sample(grid, [&](double rho, double theta) {
            double c = 1.0;
            if (use_rho) c *= std::cos(2.0 * std::numbers::pi * init.mode_rho * rho / grid.ell);
            if (use_theta) c *= std::cos(init.mode_theta * theta);
            return std::pow(init.base + init.amplitude * c, inv_p);
        });
    }
    case InitialKind::BubbleSeed:
        require(grid.kind == GridKind::PolarArc, "initial.kind", "bubble seeds need sphere_axisym");
        require(init.lambda > 1.0, "initial.lambda", "lambda must exceed 1");
        return checked("initial.kind", [&] {
            if (std::abs(spec.p - bubble_exponent(spec.n)) > 1e-12 * spec.p)
                throw DomainError("bubble seeds need p = (n+1)/(n-3)");
            return sample(grid, [&](double, double theta) {
                return bubble_profile(spec.n, std::cos(theta), init.lambda);
            });
        });
    case InitialKind::FowlerSeed:
        return checked("initial.k", [&] {
            return fowler_on_grid(grid.ell, init.k, init.phase, spec.n, spec.p, grid);
        });
    case InitialKind::ExplicitTable: {
        Field f = read_table(init.path, grid);
        for (double& x : f) {
            require(x > 0.0 && std::isfinite(x), "initial.path", "table values must be positive");
            x = std::pow(x, inv_p);
        }
        return f;
    }
    }
    throw ConfigError("initial.kind", "unknown initial data");
}

json RunConfig::to_json() const
{
    json problem = {{"n", spec.n}, {"p", spec.p}, {"m", spec.m()},
                    {"geometry", fde::to_string(spec.geometry)}};
    if (spec.has_rho()) problem["ell"] = spec.ell;
    if (spec.t_star) problem["t_star"] = *spec.t_star;
    json grid = json::object();
    if (spec.has_rho()) grid["n_rho"] = resolution.n_rho;
    if (spec.has_theta()) grid["n_theta"] = resolution.n_theta;
    json flow_j = flow.to_json();
    flow_j["refine_tstar"] = refine_tstar;
    flow_j["dt_max_fraction"] = dt_max_fraction;
    flow_j["horizon"] = horizon;
    flow_j["probe_horizon"] = probe_horizon;
    flow_j["estimate_dt_fraction"] = estimate_dt_fraction;
    flow_j["dt_max"] = dt_max ? json(*dt_max) : json(nullptr);
    flow_j["t_end"] = t_end ? json(*t_end) : json(nullptr);
    return {{"problem", problem},        {"grid", grid},
            {"initial", initial.to_json()}, {"flow", flow_j},
            {"output_dir", output_dir.string()}, {"seed", seed}};
}

RunConfig parse_config(const json& doc)
{
    RunConfig cfg;
    Section root(doc, "");

    Section problem(root.child("problem"), "problem");
    const long n = problem.integer("n", 4);
    const std::optional<double> m = problem.optional_number("m");
    std::optional<double> p = problem.optional_number("p");
    if (!m && !p) p = 3.0;
    const std::string geometry = problem.string("geometry", "sphere_axisym");
    const Geometry geo = checked("problem.geometry", [&] { return geometry_from_string(geometry); });
    const double ell = problem.number("ell", 0.0);
    const std::optional<double> t_star = problem.optional_number("t_star");
    problem.reject_unknown();
    require(n >= 3, "problem.n", "n must be at least 3");
    require(!(geo != Geometry::SphereAxisym) || ell > 0.0, "problem.ell",
            "cylinder geometries need ell > 0");
    cfg.spec = checked(m && p ? "problem.m" : (m ? "problem.m" : "problem.p"), [&] {
        return ProblemSpec::make(static_cast<int>(n), m, p, geo, ell, t_star);
    });

    Section grid(root.child("grid"), "grid");
    cfg.resolution.n_rho = static_cast<int>(grid.integer("n_rho", 128));
    cfg.resolution.n_theta = static_cast<int>(grid.integer("n_theta", 64));
    grid.reject_unknown();
    if (cfg.spec.has_rho())
        require(cfg.resolution.n_rho >= kMinResolution, "grid.n_rho", "need at least 16 nodes");
    if (cfg.spec.has_theta())
        require(cfg.resolution.n_theta >= kMinResolution, "grid.n_theta", "need at least 16 nodes");

    Section init(root.child("initial"), "initial");
    const std::string kind = init.string("kind", "constant");
    InitialData& id = cfg.initial;
    if (kind == "constant") id.kind = InitialKind::Constant;
    else if (kind == "cosine") id.kind = InitialKind::CosinePerturbation;
    else if (kind == "bubble") id.kind = InitialKind::BubbleSeed;
    else if (kind == "fowler") id.kind = InitialKind::FowlerSeed;
    else if (kind == "table") id.kind = InitialKind::ExplicitTable;
    else throw ConfigError("initial.kind", "unknown initial data kind: " + kind);
    id.value = init.number("value", 1.0);
    id.base = init.number("base", 1.0);
    id.amplitude = init.number("amplitude", 0.0);
    if (init.has("mode")) {
        const long mode = init.integer("mode", 1);
        id.mode_rho = id.mode_theta = static_cast<int>(mode);
    }
    id.mode_rho = static_cast<int>(init.integer("mode_rho", id.mode_rho));
    id.mode_theta = static_cast<int>(init.integer("mode_theta", id.mode_theta));
    id.lambda = init.number("lambda", 2.0);
    id.k = static_cast<int>(init.integer("k", 1));
    id.phase = init.number("phase", 0.0);
    id.path = init.string("path", "");
    init.reject_unknown();
    if (id.kind == InitialKind::Constant) require(id.value > 0.0, "initial.value", "must be positive");
    if (id.kind == InitialKind::CosinePerturbation)
        require(id.base > 0.0 && std::abs(id.amplitude) < id.base, "initial.amplitude",
                "need |amplitude| < base");
    if (id.kind == InitialKind::BubbleSeed) require(id.lambda > 1.0, "initial.lambda", "must exceed 1");
    if (id.kind == InitialKind::FowlerSeed) {
        require(cfg.spec.has_rho(), "initial.kind", "Fowler seeds need a cylinder geometry");
        require(id.k >= 0, "initial.k", "must be non-negative");
    }
    if (id.kind == InitialKind::ExplicitTable) require(!id.path.empty(), "initial.path", "missing path");

    Section flow(root.child("flow"), "flow");
    FlowConfig& f = cfg.flow;
    f.mode = checked("flow.mode", [&] { return flow_mode_from_string(flow.string("mode", "rescaled")); });
    f.dt_initial = flow.number("dt_initial", 1e-3);
    f.dt_min = flow.number("dt_min", 1e-12);
    cfg.dt_max = flow.optional_number("dt_max");
    cfg.dt_max_fraction = flow.number("dt_max_fraction", cfg.dt_max_fraction);
    f.adaptive = flow.boolean("adaptive", true);
    f.newton_tol = flow.number("newton_tol", f.newton_tol);
    f.newton_max_iter = static_cast<int>(flow.integer("newton_max_iter", f.newton_max_iter));
    f.stop = checked("flow.stop", [&] { return stop_rule_from_string(flow.string("stop", "time_reached")); });
    cfg.t_end = flow.optional_number("t_end");
    cfg.horizon = flow.number("horizon", cfg.horizon);
    cfg.probe_horizon = flow.number("probe_horizon", cfg.probe_horizon);
    f.steady_tol = flow.number("steady_tol", f.steady_tol);
    f.steady_count = static_cast<int>(flow.integer("steady_count", f.steady_count));
    f.mass_floor = flow.number("mass_floor", f.mass_floor);
    const std::string drift = flow.string("drift", "central");
    if (drift == "central") f.drift = DriftScheme::Central;
    else if (drift == "upwind") f.drift = DriftScheme::Upwind;
    else throw ConfigError("flow.drift", "expected central or upwind");
    f.rebound_factor = flow.number("rebound_factor", 100.0);
    f.divergence_ratio = flow.number("divergence_ratio", 0.0);
    f.t_star = flow.optional_number("t_star");
    require(!f.t_star || *f.t_star > 0.0, "flow.t_star", "must be positive");
    require(f.divergence_ratio == 0.0 || f.divergence_ratio > 1.0, "flow.divergence_ratio",
            "must be 0 or exceed 1");
    f.rebound_wait = flow.number("rebound_wait", f.rebound_wait);
    f.snapshot_first = flow.number("snapshot_first", f.snapshot_first);
    f.max_steps = flow.integer("max_steps", f.max_steps);
    cfg.refine_tstar = flow.boolean("refine_tstar", true);
    cfg.estimate_dt_fraction = flow.number("estimate_dt_fraction", cfg.estimate_dt_fraction);
    flow.reject_unknown();
    require(f.dt_initial > 0.0, "flow.dt_initial", "must be positive");
    require(f.dt_min > 0.0 && f.dt_min <= f.dt_initial, "flow.dt_min", "need 0 < dt_min <= dt_initial");
    require(!cfg.dt_max || *cfg.dt_max >= f.dt_initial, "flow.dt_max", "need dt_max >= dt_initial");
    require(cfg.dt_max_fraction > 0.0, "flow.dt_max_fraction", "must be positive");
    require(f.newton_tol > 0.0, "flow.newton_tol", "must be positive");
    require(f.newton_max_iter >= 1, "flow.newton_max_iter", "must be at least 1");
    require(!cfg.t_end || *cfg.t_end > 0.0, "flow.t_end", "must be positive");
    require(cfg.horizon > 0.0, "flow.horizon", "must be positive");
    require(cfg.probe_horizon > 0.0, "flow.probe_horizon", "must be positive");
    require(f.steady_tol > 0.0, "flow.steady_tol", "must be positive");
    require(f.steady_count >= 1, "flow.steady_count", "must be at least 1");
    require(f.mass_floor > 0.0 && f.mass_floor < 1.0, "flow.mass_floor", "must lie in (0,1)");
    require(f.rebound_factor >= 0.0, "flow.rebound_factor", "must be non-negative");
    require(f.snapshot_first > 0.0, "flow.snapshot_first", "must be positive");
    require(f.max_steps >= 1, "flow.max_steps", "must be positive");
    require(cfg.estimate_dt_fraction > 0.0 && cfg.estimate_dt_fraction < 0.1,
            "flow.estimate_dt_fraction", "must lie in (0, 0.1)");

    cfg.output_dir = root.string("output_dir", cfg.output_dir.string());
    const long seed = root.integer("seed", 0);
    require(seed >= 0, "seed", "must be non-negative");
    cfg.seed = static_cast<unsigned>(seed);
    root.reject_unknown();
    return cfg;
}

json read_config_document(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("<document>", "cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    if (path.extension() == ".json") {
        try {
            return json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError("<document>", e.what());
        }
    }
    try {
        const toml::table table = toml::parse(text, path.string());
        return toml_to_json(table);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << e.description() << " at line " << e.source().begin.line;
        throw ConfigError("<document>", os.str());
    }
}

RunConfig load_config(const std::filesystem::path& path)
{
    json doc = read_config_document(path);
    // a run manifest carries the configuration that produced it
    if (doc.is_object() && doc.contains("fde_manifest")) doc = doc.at("config");
    RunConfig cfg = parse_config(doc);
    if (cfg.initial.kind == InitialKind::ExplicitTable &&
        std::filesystem::path(cfg.initial.path).is_relative())
        cfg.initial.path = (path.parent_path() / cfg.initial.path).string();
    return cfg;
}

Resolution parse_resolution(const std::string& text, const ProblemSpec& spec)
{
    Resolution r;
    const auto comma = text.find(',');
    try {
        std::size_t used = 0;
        const int first = std::stoi(text.substr(0, comma), &used);
        if (comma == std::string::npos) {
            if (used != text.size()) throw std::invalid_argument(text);
            r.n_rho = r.n_theta = first;
        } else {
            r.n_rho = first;
            const std::string rest = text.substr(comma + 1);
            r.n_theta = std::stoi(rest, &used);
            if (used != rest.size()) throw std::invalid_argument(text);
        }
    } catch (const std::exception&) {
        throw ConfigError("resolution", "expected N or N_rho,N_theta");
    }
    if ((spec.has_rho() && r.n_rho < kMinResolution) ||
        (spec.has_theta() && r.n_theta < kMinResolution))
        throw ConfigError("resolution", "need at least 16 nodes per axis");
    return r;
}

}  // namespace fde
