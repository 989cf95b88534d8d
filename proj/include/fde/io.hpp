#ifndef FDE_IO_HPP
#define FDE_IO_HPP

// Artifact files: JSON manifest, diagnostic time series, field snapshots and
// closed-form tables. Every floating point value is written with 17
// significant digits so that reruns can be compared byte for byte.

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fde/pipeline.hpp"

namespace fde {

/// %.17g
std::string format_double(double x);

/// Column names of the diagnostic CSV, in order.
const std::vector<std::string>& timeseries_columns();

void write_timeseries_csv(std::ostream& out, const TrajectoryRecord& rec);

/// "# columns: rho,theta,value" followed by one line per node.
void write_field_csv(std::ostream& out, const Grid& grid, std::span<const double> values,
                     const std::string& comment = "");

nlohmann::json manifest(const SimulationResult& result);

/**
 * @brief Writes manifest.json, timeseries.csv, terminal.csv, initial.csv,
 *        profile_fit.json (rescaled runs) and snapshots/step_<k>.csv.
 */
void write_artifacts(const SimulationResult& result, const std::filesystem::path& dir);

}  // namespace fde

#endif  // FDE_IO_HPP
