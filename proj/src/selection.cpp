#include "netsel/selection.hpp"

#include <algorithm>

#include "netsel/errors.hpp"
#include "netsel/format.hpp"

namespace netsel {

const char* selection_reason_name(SelectionReason r) {
  switch (r) {
    case SelectionReason::min_latency_ok: return "min_latency_ok";
    case SelectionReason::skipped_k_networks: return "skipped_k_networks";
    default: return "random_fallback";
  }
}

SelectionDecision ans_select(std::span<const NetworkForecast> forecasts,
                             double handover_threshold, Rng& rng) {
  require(!forecasts.empty(), ErrorCode::empty_forecast_list, "no candidate networks");
  for (const auto& f : forecasts)
    require(f.predicted_latency >= 0.0, ErrorCode::invalid_config,
            "negative predicted latency");

  SelectionDecision decision;
  decision.forecasts.assign(forecasts.begin(), forecasts.end());
  std::sort(decision.forecasts.begin(), decision.forecasts.end(),
            [](const NetworkForecast& a, const NetworkForecast& b) {
              if (a.predicted_latency != b.predicted_latency)
                return a.predicted_latency < b.predicted_latency;
              return a.network_id < b.network_id;
            });

  for (std::size_t i = 0; i < decision.forecasts.size(); ++i) {
    if (decision.forecasts[i].handover_probability < handover_threshold) {
      decision.chosen_network = decision.forecasts[i].network_id;
      decision.reason = i == 0 ? SelectionReason::min_latency_ok
                               : SelectionReason::skipped_k_networks;
      return decision;
    }
  }
  const auto pick = rng.uniform_index(decision.forecasts.size());
  decision.chosen_network = decision.forecasts[pick].network_id;
  decision.reason = SelectionReason::random_fallback;
  return decision;
}

FecFrame baseline_assign(std::int64_t frame_id, int network_count) {
  FecFrame frame;
  frame.frame_id = frame_id;
  require(network_count >= 1, ErrorCode::indivisible_split, "need at least one network");
  require(frame.total_packet_count % network_count == 0, ErrorCode::indivisible_split,
          std::to_string(frame.total_packet_count) + " packets cannot split evenly over " +
              std::to_string(network_count) + " networks");
  frame.packet_network.resize(static_cast<std::size_t>(frame.total_packet_count));
  for (int i = 0; i < frame.total_packet_count; ++i)
    frame.packet_network[static_cast<std::size_t>(i)] = i % network_count;
  return frame;
}

bool fec_reconstruct(const FecFrame& frame, std::span<const std::int64_t> delivered) {
  const std::int64_t lo = frame.frame_id * frame.total_packet_count;
  const std::int64_t hi = lo + frame.total_packet_count;
  for (std::int64_t id : delivered)
    require(id >= lo && id < hi, ErrorCode::unknown_packet_id,
            "packet " + std::to_string(id) + " does not belong to frame " +
                std::to_string(frame.frame_id));
  // Recovery depends only on how many packets survived.
  return static_cast<int>(delivered.size()) >= frame.source_packet_count;
}

std::string selection_log_header(int network_count) {
  std::string out = "timestamp,chosen_network,reason";
  for (int i = 1; i <= network_count; ++i) out += ",latency_" + std::to_string(i);
  for (int i = 1; i <= network_count; ++i) out += ",prob_" + std::to_string(i);
  out += '\n';
  return out;
}

std::string selection_log_row(std::int64_t timestamp, const SelectionDecision& decision) {
  // Columns are ordered by network id regardless of the latency sort.
  std::vector<NetworkForecast> by_id = decision.forecasts;
  std::sort(by_id.begin(), by_id.end(), [](const auto& a, const auto& b) {
    return a.network_id < b.network_id;
  });
  std::string out = std::to_string(timestamp);
  out += ',';
  out += std::to_string(decision.chosen_network);
  out += ',';
  out += selection_reason_name(decision.reason);
  for (const auto& f : by_id) {
    out += ',';
    out += format_double(f.predicted_latency);
  }
  for (const auto& f : by_id) {
    out += ',';
    out += format_double(f.handover_probability);
  }
  out += '\n';
  return out;
}

}  // namespace netsel
