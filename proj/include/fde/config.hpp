#ifndef FDE_CONFIG_HPP
#define FDE_CONFIG_HPP

// Run configuration: problem, grid, initial data and flow settings, read from
// TOML or JSON. Command-line flags are applied on top by the caller.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "fde/constants.hpp"
#include "fde/flow.hpp"
#include "fde/geometry.hpp"

namespace fde {

/// Malformed configuration; key is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(message), key_(std::move(key))
    {
    }
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

enum class InitialKind { Constant, CosinePerturbation, BubbleSeed, FowlerSeed, ExplicitTable };

std::string to_string(InitialKind k);

/**
 * @brief Initial data.
 *
 * Constant, BubbleSeed and FowlerSeed give w0 directly (seeds at the
 * t_star = 1 normalization). CosinePerturbation and ExplicitTable give f0 and
 * the solver starts from w0 = f0^{1/p}.
 *
 * Cosine: f0 = base + amplitude * c_rho(rho) * c_theta(theta) with
 * c_rho = cos(2 pi mode_rho rho / ell) and c_theta = cos(mode_theta theta);
 * a factor is 1 when its axis is absent or its mode is 0.
 */
struct InitialData {
    InitialKind kind = InitialKind::Constant;
    double value = 1.0;
    double base = 1.0;
    double amplitude = 0.0;
    int mode_rho = 1;
    int mode_theta = 1;
    double lambda = 2.0;
    int k = 1;
    double phase = 0.0;
    std::string path;

    nlohmann::json to_json() const;
};

/// Samples w0 on the grid.
Field sample_initial(const InitialData& init, const ProblemSpec& spec, const Grid& grid);

struct RunConfig {
    ProblemSpec spec;
    Resolution resolution{128, 64};
    InitialData initial;
    FlowConfig flow;
    bool refine_tstar = true;
    /// dt_max and horizons in units of T when not given explicitly
    std::optional<double> dt_max;
    std::optional<double> t_end;
    double dt_max_fraction = 0.05;
    double horizon = 200.0;
    double probe_horizon = 60.0;
    double estimate_dt_fraction = 2e-4;
    std::filesystem::path output_dir = "fde_out";
    unsigned seed = 0;

    nlohmann::json to_json() const;
};

/// Parses a configuration document (already in JSON form).
RunConfig parse_config(const nlohmann::json& doc);

/// Reads a .toml or .json file into JSON form.
nlohmann::json read_config_document(const std::filesystem::path& path);

RunConfig load_config(const std::filesystem::path& path);

/// Parses "N" or "N_rho,N_theta" into a resolution for the spec's geometry.
Resolution parse_resolution(const std::string& text, const ProblemSpec& spec);

}  // namespace fde

#endif  // FDE_CONFIG_HPP
