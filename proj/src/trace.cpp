#include "netsel/trace.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "netsel/format.hpp"

namespace netsel {

namespace {

constexpr int kNumericColumns = 10;

// Order matches trace_csv_columns() minus timestamp/network_id/cell.
std::optional<double> TelemetryRow::* numeric_field(int i) {
  switch (i) {
    case 0: return &TelemetryRow::gps_longitude;
    case 1: return &TelemetryRow::gps_latitude;
    case 2: return &TelemetryRow::rsrp;
    case 3: return &TelemetryRow::rsrq;
    case 4: return &TelemetryRow::rssi;
    case 5: return &TelemetryRow::modem_bandwidth;
    case 6: return &TelemetryRow::normalized_bandwidth;
    case 7: return &TelemetryRow::total_bitrate;
    case 8: return &TelemetryRow::packet_loss_rate;
    default: return &TelemetryRow::latency;
  }
}

}  // namespace

const std::vector<std::string>& trace_csv_columns() {
  static const std::vector<std::string> cols = {
      "timestamp",        "network_id",        "gps_longitude",
      "gps_latitude",     "rsrp",              "rsrq",
      "rssi",             "modem_bandwidth",   "normalized_bandwidth",
      "total_bitrate",    "packet_loss_rate",  "latency",
      "serving_cell_id"};
  return cols;
}

DriveTrace load_drive(const std::filesystem::path& path,
                      const ColumnSchema& schema) {
  const std::string text = read_text_file(path);

  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
      if (i == text.size() || text[i] == '\n') {
        std::string_view line = strip_cr(std::string_view(text).substr(start, i - start));
        if (!line.empty()) lines.push_back(line);
        start = i + 1;
      }
    }
  }
  require(!lines.empty(), ErrorCode::missing_column, "empty file " + path.string());

  // Resolve the column index of every canonical column.
  const auto header = split_csv_line(lines[0]);
  std::vector<int> col_index;
  for (const std::string& canonical : trace_csv_columns()) {
    auto it = schema.find(canonical);
    const std::string& wanted = it == schema.end() ? canonical : it->second;
    int found = -1;
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == wanted) { found = static_cast<int>(i); break; }
    require(found >= 0, ErrorCode::missing_column,
            "column '" + wanted + "' not in " + path.string());
    col_index.push_back(found);
  }

  // Parse rows, bucketed per network.
  std::map<int, std::vector<TelemetryRow>> per_network;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto cells = split_csv_line(lines[li]);
    auto cell = [&](int canonical_idx) -> std::string_view {
      const int idx = col_index[static_cast<std::size_t>(canonical_idx)];
      return idx < static_cast<int>(cells.size()) ? cells[static_cast<std::size_t>(idx)]
                                                  : std::string_view{};
    };

    const auto ts = parse_int(cell(0));
    const auto net = parse_int(cell(1));
    require(ts.has_value() && net.has_value(), ErrorCode::missing_column,
            "unparseable timestamp/network_id at line " + std::to_string(li + 1));

    TelemetryRow row;
    row.timestamp = *ts;
    for (int f = 0; f < kNumericColumns; ++f) {
      const std::string_view v = cell(2 + f);
      if (!v.empty()) row.*numeric_field(f) = parse_double(v);
    }
    const std::string_view cid = cell(2 + kNumericColumns);
    if (!cid.empty()) row.serving_cell_id = std::string(cid);

    auto& rows = per_network[static_cast<int>(*net)];
    if (!rows.empty())
      require(row.timestamp > rows.back().timestamp, ErrorCode::timestamp_not_monotone,
              "network " + std::to_string(*net) + " at t=" + std::to_string(row.timestamp));
    rows.push_back(std::move(row));
  }
  require(!per_network.empty(), ErrorCode::missing_column, "no data rows in " + path.string());

  DriveTrace trace;
  trace.drive_id = path.stem().string();

  // Fill interior gaps with all-missing rows, then check span alignment.
  std::int64_t t0 = 0, t1 = 0;
  bool first = true;
  for (auto& [net_id, rows] : per_network) {
    std::vector<TelemetryRow> filled;
    filled.reserve(rows.size());
    for (auto& row : rows) {
      if (!filled.empty()) {
        for (std::int64_t t = filled.back().timestamp + 1; t < row.timestamp; ++t) {
          TelemetryRow gap;
          gap.timestamp = t;
          filled.push_back(std::move(gap));
        }
      }
      filled.push_back(std::move(row));
    }
    if (first) {
      t0 = filled.front().timestamp;
      t1 = filled.back().timestamp;
      first = false;
    } else {
      require(filled.front().timestamp == t0 && filled.back().timestamp == t1,
              ErrorCode::network_length_mismatch,
              "network " + std::to_string(net_id) + " covers a different span");
    }
    trace.networks.push_back(NetworkTrace{net_id, std::move(filled)});
  }
  trace.duration_s = t1 - t0 + 1;
  validate_drive(trace);
  return trace;
}

void save_drive(const DriveTrace& trace, const std::filesystem::path& path) {
  std::string out;
  {
    bool first = true;
    for (const auto& c : trace_csv_columns()) {
      if (!first) out += ',';
      out += c;
      first = false;
    }
    out += '\n';
  }
  auto emit = [&](const std::optional<double>& v) {
    out += ',';
    if (v.has_value()) out += format_double(*v);
  };
  for (const auto& net : trace.networks) {
    for (const auto& row : net.rows) {
      out += std::to_string(row.timestamp);
      out += ',';
      out += std::to_string(net.network_id);
      emit(row.gps_longitude);
      emit(row.gps_latitude);
      emit(row.rsrp);
      emit(row.rsrq);
      emit(row.rssi);
      emit(row.modem_bandwidth);
      emit(row.normalized_bandwidth);
      emit(row.total_bitrate);
      emit(row.packet_loss_rate);
      emit(row.latency);
      out += ',';
      if (row.serving_cell_id.has_value()) out += *row.serving_cell_id;
      out += '\n';
    }
  }
  write_text_file(path, out);
}

std::vector<std::int64_t> handover_events(const NetworkTrace& trace) {
  require(trace.rows.size() >= 2, ErrorCode::trace_too_short,
          "need at least 2 rows, got " + std::to_string(trace.rows.size()));
  std::vector<std::int64_t> events;
  for (std::size_t i = 1; i < trace.rows.size(); ++i) {
    const auto& prev = trace.rows[i - 1].serving_cell_id;
    const auto& cur = trace.rows[i].serving_cell_id;
    if (prev.has_value() && cur.has_value() && *prev != *cur)
      events.push_back(trace.rows[i].timestamp);
  }
  return events;
}

void validate_drive(const DriveTrace& trace) {
  require(!trace.networks.empty(), ErrorCode::network_length_mismatch, "no networks");
  const auto& ref = trace.networks.front().rows;
  require(static_cast<std::int64_t>(ref.size()) == trace.duration_s,
          ErrorCode::network_length_mismatch, "duration does not match row count");
  for (const auto& net : trace.networks) {
    require(net.rows.size() == ref.size(), ErrorCode::network_length_mismatch,
            "network " + std::to_string(net.network_id) + " row count differs");
    for (std::size_t i = 0; i < net.rows.size(); ++i) {
      const auto& row = net.rows[i];
      require(row.timestamp == ref[i].timestamp, ErrorCode::network_length_mismatch,
              "timestamp misalignment across networks");
      if (i > 0)
        require(row.timestamp == net.rows[i - 1].timestamp + 1,
                ErrorCode::timestamp_not_monotone, "non-contiguous timestamps");
      if (row.packet_loss_rate.has_value())
        require(*row.packet_loss_rate >= 0.0 && *row.packet_loss_rate <= 1.0,
                ErrorCode::invalid_config, "packet_loss_rate outside [0,1]");
      if (row.latency.has_value())
        require(*row.latency >= 0.0, ErrorCode::invalid_config, "negative latency");
    }
  }
}

}  // namespace netsel
