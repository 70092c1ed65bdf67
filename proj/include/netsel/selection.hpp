#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "netsel/rng.hpp"

namespace netsel {

struct NetworkForecast {
  int network_id = 0;
  double predicted_latency = 0.0;     // ms, >= 0
  double handover_probability = 0.0;  // [0,1]
};

enum class SelectionReason { min_latency_ok, skipped_k_networks, random_fallback };

const char* selection_reason_name(SelectionReason r);

struct SelectionDecision {
  int chosen_network = 0;
  SelectionReason reason = SelectionReason::min_latency_ok;
  std::vector<NetworkForecast> forecasts;
};

// Sorts candidates by predicted latency (ties by network id) and picks the
// first whose handover probability is below the threshold; when none
// qualifies, falls back to a uniformly random candidate.
SelectionDecision ans_select(std::span<const NetworkForecast> forecasts,
                             double handover_threshold, Rng& rng);

// Redundancy-expanded video frame split across networks.
struct FecFrame {
  std::int64_t frame_id = 0;
  int source_packet_count = 24;
  int total_packet_count = 36;
  std::vector<int> packet_network;  // size total; value = network index 0..N-1

  std::int64_t packet_id(int index) const {
    return frame_id * total_packet_count + index;
  }
};

// Round-robin split of the 36 expanded packets; every network gets an equal
// share, so the count must divide 36.
FecFrame baseline_assign(std::int64_t frame_id, int network_count);

// The erasure threshold: any 24 of the 36 packets reconstruct the frame.
bool fec_reconstruct(const FecFrame& frame, std::span<const std::int64_t> delivered);

// Audit log row: timestamp,chosen_network,reason,latency_1..N,prob_1..N.
std::string selection_log_header(int network_count);
std::string selection_log_row(std::int64_t timestamp, const SelectionDecision& decision);

}  // namespace netsel
