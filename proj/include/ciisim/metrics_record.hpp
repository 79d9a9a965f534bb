#pragma once

#include <cstdint>

namespace ciisim {

/// Outcome of one run. Drop counters are per SCADA reading; a reading ends
/// delivered, dropped for exactly one cause, or still in flight.
struct MetricsRecord {
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  double delivery_ratio = 0.0;
  double delay_mean_s = 0.0;
  double delay_p95_s = 0.0;
  std::uint64_t in_flight = 0;
  std::uint64_t drops_blackhole = 0;
  std::uint64_t drops_dead_battery = 0;
  std::uint64_t drops_no_route = 0;
  std::uint64_t drops_tampered = 0;  // rejected and never re-sent
  std::uint64_t pmu_generated = 0;
  std::uint64_t pmu_delivered = 0;
  std::uint64_t pmu_dropped = 0;
  double pmu_delay_mean_s = 0.0;
  std::uint64_t tamper_rejections = 0;
  std::uint64_t reroutes = 0;
  std::uint64_t packets_dropped = 0;  // every packet-level drop, any kind
  double energy_consumed_j = 0.0;
  std::uint64_t dead_nodes = 0;

  std::uint64_t dropped() const {
    return drops_blackhole + drops_dead_battery + drops_no_route + drops_tampered;
  }
  bool operator==(const MetricsRecord&) const = default;
};

}  // namespace ciisim
