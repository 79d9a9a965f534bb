#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ciisim/attacks.hpp"
#include "ciisim/metrics_record.hpp"
#include "ciisim/protocol/simulation.hpp"
#include "ciisim/topology.hpp"

namespace ciisim::metrics {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
  std::string case_path;  // absolute, or relative to the scenario file
  std::optional<double> region_distance_km;  // falls back to the case file
  DeploymentCounts counts{1500, 500, 50.0, 50.0};
  engine::RadioModel radio;
  engine::EnergyModel energy;
  std::string curve = "secp256k1";
  protocol::ProtocolConfig protocol;
  attacks::AttackConfig attack;
  double duration_s = 60.0;
  std::uint64_t seed = 1;
};

/// INI-style text with [topology] [engine] [crypto] [protocol] [attack] [run]
/// sections. Unknown keys are rejected. Relative case paths are resolved
/// against base_dir.
ScenarioConfig parse_scenario(std::istream& in, const std::string& base_dir = ".");
ScenarioConfig load_scenario(const std::string& path);
/// Throws ConfigError.
void validate_scenario(const ScenarioConfig& cfg);

crypto::CurveParams curve_by_name(const std::string& name);

/// Stream ids under the run seed, kept apart from the simulation's own.
inline constexpr std::uint64_t kStreamTopology = 0;
inline constexpr std::uint64_t kStreamAttackSelection = 5;

/// Builds the topology, applies attacks and runs to completion.
MetricsRecord run_scenario(const ScenarioConfig& cfg,
                           const protocol::Simulation::TraceSink& trace = {});

enum class SweepAxis { kCompromised, kMalicious };
SweepAxis parse_axis(const std::string& s);
const char* axis_name(SweepAxis a);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  bool operator==(const Table&) const = default;
};

std::vector<std::string> metrics_columns();
std::vector<std::string> sweep_header();
/// row_type ("run" or "mean"), axis, value, seed (empty on mean rows),
/// then the metric columns.
std::vector<std::string> run_row(const std::string& axis, int value, std::uint64_t seed,
                                 const MetricsRecord& m);
std::vector<double> metric_values(const MetricsRecord& m);
std::string format_number(double v);

/// One row per (value, seed) in that order, then one mean row per value.
/// on_row sees every row as soon as it exists, so a failure part-way still
/// leaves the finished rows with the caller.
Table sweep(const ScenarioConfig& base, SweepAxis axis, const std::vector<int>& values,
            const std::vector<std::uint64_t>& seeds,
            const std::function<void(const std::vector<std::string>&)>& on_row = {});

void write_csv(const Table& table, std::ostream& out);
void write_csv_row(const std::vector<std::string>& row, std::ostream& out);
/// Throws std::runtime_error when the file cannot be written.
void export_csv(const Table& table, const std::string& path);
Table parse_csv(std::istream& in);
Table load_csv(const std::string& path);

/// "1,2,5-8" -> {1, 2, 5, 6, 7, 8}
std::vector<std::int64_t> parse_list(const std::string& spec);

}  // namespace ciisim::metrics
