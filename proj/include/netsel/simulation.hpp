#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "netsel/metrics.hpp"
#include "netsel/predictor.hpp"
#include "netsel/selection.hpp"
#include "netsel/trace.hpp"

namespace netsel {

// How serving-cell changes are produced. `rule` fires deterministically when
// the latent radio quality stays under a threshold two seconds running (the
// threshold is auto-calibrated to the target rate); `stochastic` draws each
// second from a logistic link on the same quality.
enum class HandoverMode { rule, stochastic };

// Strength of the low-signal couplings; zero decouples the corresponding
// effect from rsrp entirely.
struct CouplingConfig {
  double handover = 1.0;
  double loss = 1.0;
  double latency = 1.0;
};

struct SynthConfig {
  std::uint64_t seed = 1;
  std::string drive_id;  // empty -> derived from the seed
  int duration_s = 1000;
  int network_count = 3;
  double handover_rate = 0.03;
  HandoverMode handover_mode = HandoverMode::rule;
  CouplingConfig coupling;

  // signal random walk
  double rsrp_low_dbm = -120.0;
  double rsrp_high_dbm = -70.0;
  double rsrp_sigma_db = 2.0;
  int handover_refractory_s = 3;  // rule mode: minimum gap between handovers

  // latent bandwidth idiosyncrasy entering the handover quality
  double bw_latent_db = 3.0;

  // route; position modulates the rule threshold so location is informative
  double speed_min_mps = 6.0;
  double speed_max_mps = 18.0;
  double route_start_jitter_m = 12000.0;  // per-drive start offset on the route
  double route_wavelength_m = 60000.0;
  double position_amplitude_db = 12.0;
  double gps_missing_rate = 0.36;

  // loss model
  double loss_signal_max = 0.5;
  double loss_noise = 0.005;
  double handover_loss_burst = 0.35;
  int burst_len_s = 3;

  // latency model
  double latency_base_ms = 40.0;
  double latency_signal_gain_ms = 150.0;
  double latency_noise_ms = 4.0;
  double latency_spike_prob = 0.01;
  double latency_spike_mean_ms = 80.0;
  double handover_latency_spike_ms = 300.0;

  // pre-calibrated rule threshold; unset -> calibrated on demand
  std::optional<double> rule_threshold_dbm;

  void validate() const;
};

// Injection log kept by the generator; the oracle for handover_events tests.
struct GenerationInfo {
  std::vector<std::vector<std::int64_t>> handovers;  // per network
  double rule_threshold_dbm = 0.0;
};

// Bisects the rule threshold until probe drives hit the target handover rate.
// Deterministic for a given config; independent of config.seed.
double calibrate_rule_threshold(const SynthConfig& config);

// Seed-determined synthetic drive: per network, rsrp evolves as a reflected
// random walk; handovers follow the configured mode; loss and latency are
// monotone in signal quality plus handover bursts and noise.
DriveTrace generate_drive(const SynthConfig& config, GenerationInfo* info = nullptr);

struct VideoLoad {
  int fps = 30;
  int packets_per_frame = 24;  // pre-FEC source packets

  int source_packets_per_second() const { return fps * packets_per_frame; }
};

enum class Policy { ans, ans_oracle, baseline };

const char* policy_name(Policy p);

struct AnsModels {
  const TrainedPredictor* handover = nullptr;
  const TrainedPredictor* latency = nullptr;
  double handover_threshold = 0.7;

  int required_window() const;
};

struct SecondRecord {
  std::int64_t second = 0;
  std::int64_t packets_sent = 0;
  std::int64_t packets_lost = 0;                // effective for baseline
  std::optional<double> mean_latency_ms;        // over delivered packets
  int chosen_network = -1;                      // -1 for baseline
};

struct SimOutcome {
  Policy policy = Policy::ans;
  std::string drive_id;
  int warmup_s = 0;
  std::vector<SecondRecord> seconds;
  std::vector<std::pair<std::int64_t, SelectionDecision>> decisions;  // ans only

  std::vector<double> loss_rate_series() const;
  std::vector<double> latency_series() const;
};

// Replays one drive under one policy. Per-packet losses are independent
// Bernoulli draws at the trace's per-second rate, keyed by
// (seed, drive, network, second, packet) so both policies and repeated runs
// see identical randomness. Decisions start once `warmup_s` seconds of
// telemetry exist.
SimOutcome simulate_drive(const DriveTrace& trace, Policy policy, const AnsModels* models,
                          const VideoLoad& load, std::uint64_t seed, int warmup_s);

// Runs the selector policy and the baseline on every drive with common
// random numbers; returns (selector, baseline) outcome pairs in corpus order.
std::vector<std::pair<SimOutcome, SimOutcome>> run_experiment(
    const std::vector<DriveTrace>& corpus, Policy selector_policy, const AnsModels* models,
    const VideoLoad& load, std::uint64_t seed, int warmup_s);

// CSV: second,algorithm,sent,lost,mean_latency_ms,chosen_network
std::string outcome_csv_header();
std::string outcome_csv_rows(const SimOutcome& outcome);

// Per-drive, per-algorithm percentile summaries for the comparison report.
struct DriveSummary {
  std::string drive_id;
  std::string algorithm;
  PercentileSummary loss_rate;
  PercentileSummary latency_ms;
};

std::vector<DriveSummary> compare_report(
    std::span<const std::pair<SimOutcome, SimOutcome>> outcomes);

std::string compare_csv(std::span<const DriveSummary> summaries);
std::string compare_json(std::span<const DriveSummary> summaries);

}  // namespace netsel
