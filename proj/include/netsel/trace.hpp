#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "netsel/errors.hpp"

namespace netsel {

// One telemetry sample for one network at one second. Absent measurements are
// empty optionals; no sentinel numbers anywhere.
struct TelemetryRow {
  std::int64_t timestamp = 0;  // seconds since drive start
  std::optional<double> gps_longitude;
  std::optional<double> gps_latitude;
  std::optional<double> rsrp;                  // dBm
  std::optional<double> rsrq;                  // dB
  std::optional<double> rssi;                  // dBm
  std::optional<double> modem_bandwidth;       // Mbit/s
  std::optional<double> normalized_bandwidth;  // [0,1]
  std::optional<double> total_bitrate;         // Mbit/s
  std::optional<double> packet_loss_rate;      // [0,1]
  std::optional<double> latency;               // ms
  std::optional<std::string> serving_cell_id;  // opaque, equality only

  bool operator==(const TelemetryRow&) const = default;
};

struct NetworkTrace {
  int network_id = 0;  // 1..N
  std::vector<TelemetryRow> rows;  // gapless 1 Hz series

  bool operator==(const NetworkTrace&) const = default;
};

struct DriveTrace {
  std::string drive_id;
  std::vector<NetworkTrace> networks;  // aligned timestamps
  std::int64_t duration_s = 0;

  bool operator==(const DriveTrace&) const = default;
};

// Canonical column order of the trace CSV schema.
const std::vector<std::string>& trace_csv_columns();

// Maps canonical column names to the names used in a particular file.
// Unmapped columns keep their canonical name.
using ColumnSchema = std::map<std::string, std::string>;

// Reads one drive. One CSV row per (timestamp, network); unparseable cells
// become missing; interior timestamp gaps become all-missing rows; networks
// whose covered spans disagree raise NetworkLengthMismatch.
DriveTrace load_drive(const std::filesystem::path& path,
                      const ColumnSchema& schema = {});

// Writes the canonical schema. load_drive(save_drive(t)) == t bit-exactly.
void save_drive(const DriveTrace& trace, const std::filesystem::path& path);

// Timestamps t where the serving cell is known at t-1 and t and differs.
std::vector<std::int64_t> handover_events(const NetworkTrace& trace);

// Validates the DriveTrace invariants (alignment, monotone timestamps,
// bounded loss rate, non-negative latency).
void validate_drive(const DriveTrace& trace);

}  // namespace netsel
