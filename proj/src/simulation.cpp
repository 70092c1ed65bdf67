#include "netsel/simulation.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "netsel/format.hpp"

namespace netsel {

using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEtaRho = 0.8;  // AR(1) memory of the bandwidth latent

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double reflect_into(double x, double lo, double hi) {
  while (x < lo || x > hi) {
    if (x > hi) x = 2.0 * hi - x;
    if (x < lo) x = 2.0 * lo - x;
  }
  return x;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Counter-based per-packet draw: identical for both policies and across
// reruns, independent of evaluation order.
inline double packet_uniform(std::uint64_t seed, std::uint64_t drive_hash, int network,
                             std::int64_t second, int packet) {
  const std::uint64_t key = (static_cast<std::uint64_t>(network) << 44) |
                            (static_cast<std::uint64_t>(second) << 22) |
                            static_cast<std::uint64_t>(packet);
  return u64_to_unit(mix64(mix64(seed, drive_hash), key));
}

// One network's radio-quality state.
struct NetState {
  double rsrp = -95.0;
  double eta = 0.0;      // bandwidth latent, AR(1), unit variance
  bool cond_prev = false;
  std::int64_t cell = 0;
  int burst_left = 0;
  int since_fire = 1 << 20;
};

double quality_of(const NetState& s, const SynthConfig& c) {
  return s.rsrp + c.bw_latent_db * s.eta;
}

double rule_threshold_at(double theta_base, double pos_m, const SynthConfig& c) {
  return theta_base + c.position_amplitude_db *
                          std::sin(2.0 * kPi * pos_m / c.route_wavelength_m);
}

// Advances the signal walk and decides whether a handover fires this second.
bool handover_step(NetState& s, Rng& rng, const SynthConfig& c, double theta_base,
                   double pos_m, bool first_second) {
  if (!first_second)
    s.rsrp = reflect_into(s.rsrp + rng.normal(0.0, c.rsrp_sigma_db), c.rsrp_low_dbm,
                          c.rsrp_high_dbm);
  s.eta = kEtaRho * s.eta + rng.normal(0.0, std::sqrt(1.0 - kEtaRho * kEtaRho));

  const double q = quality_of(s, c);
  const double theta_t = rule_threshold_at(theta_base, pos_m, c);
  const bool cond = q < theta_t;

  bool fired = false;
  const double c_ho = c.coupling.handover;
  if (!first_second) {
    if (c_ho <= 0.0) {
      fired = rng.bernoulli(c.handover_rate);
    } else if (c.handover_mode == HandoverMode::rule) {
      const bool triggered =
          cond && s.cond_prev && s.since_fire > c.handover_refractory_s;
      const double p = c_ho * (triggered ? 1.0 : 0.0) + (1.0 - c_ho) * c.handover_rate;
      fired = p >= 1.0 || (p > 0.0 && rng.bernoulli(p));
    } else {
      const double mid = 0.5 * (c.rsrp_low_dbm + c.rsrp_high_dbm);
      const double p =
          c.handover_rate * ((1.0 - c_ho) + c_ho * 2.0 * sigmoid((mid - q) / 6.0));
      fired = rng.bernoulli(std::min(p, 1.0));
    }
  }
  if (fired) {
    s.cell += 1;
    s.burst_left = c.burst_len_s;
    s.since_fire = 0;
  } else if (s.since_fire < (1 << 20)) {
    s.since_fire += 1;
  }
  s.cond_prev = cond;
  return fired;
}

struct RouteProfile {
  double start_m = 0.0;
  std::vector<double> speeds;  // piecewise constant per 100 s
};

RouteProfile route_profile(Rng& route_rng, const SynthConfig& c) {
  RouteProfile route;
  route.start_m = route_rng.uniform(0.0, c.route_start_jitter_m);
  const int segments = (c.duration_s + 99) / 100;
  route.speeds.resize(static_cast<std::size_t>(segments));
  for (auto& v : route.speeds) v = route_rng.uniform(c.speed_min_mps, c.speed_max_mps);
  return route;
}

}  // namespace

void SynthConfig::validate() const {
  require(duration_s >= 200, ErrorCode::invalid_config, "duration must be >= 200 s");
  require(network_count >= 1, ErrorCode::invalid_config, "need at least one network");
  require(handover_rate > 0.0 && handover_rate < 0.5, ErrorCode::invalid_config,
          "handover rate must be in (0, 0.5)");
  require(rsrp_low_dbm < rsrp_high_dbm, ErrorCode::invalid_config,
          "rsrp bounds inverted");
  require(rsrp_sigma_db > 0.0, ErrorCode::invalid_config, "rsrp sigma must be > 0");
  require(coupling.handover >= 0.0 && coupling.handover <= 1.0 && coupling.loss >= 0.0 &&
              coupling.loss <= 1.0 && coupling.latency >= 0.0 && coupling.latency <= 1.0,
          ErrorCode::invalid_config, "couplings must be in [0,1]");
  require(gps_missing_rate >= 0.0 && gps_missing_rate < 1.0, ErrorCode::invalid_config,
          "gps missing rate must be in [0,1)");
  require(burst_len_s >= 1, ErrorCode::invalid_config, "burst length must be >= 1");
  require(handover_refractory_s >= 0, ErrorCode::invalid_config,
          "refractory must be >= 0");
  require(speed_min_mps > 0.0 && speed_max_mps >= speed_min_mps, ErrorCode::invalid_config,
          "speed range invalid");
  require(route_wavelength_m > 0.0, ErrorCode::invalid_config, "route wavelength must be > 0");
}

double calibrate_rule_threshold(const SynthConfig& config) {
  config.validate();
  if (config.handover_mode != HandoverMode::rule || config.coupling.handover <= 0.0)
    return config.rsrp_low_dbm;  // unused by those modes

  // Probe seeds are fixed so every drive of a corpus shares one threshold.
  const int probe_drives = 48;
  auto measured_rate = [&](double theta) {
    std::int64_t fired = 0, possible = 0;
    for (int d = 0; d < probe_drives; ++d) {
      Rng rng(mix64(0xca11b7a7e, static_cast<std::uint64_t>(d)));
      Rng route_rng = rng.child(1);
      Rng net_rng = rng.child(2);
      const RouteProfile route = route_profile(route_rng, config);
      NetState s;
      s.rsrp = net_rng.uniform(config.rsrp_low_dbm, config.rsrp_high_dbm);
      s.eta = net_rng.normal();
      double pos = route.start_m;
      for (int t = 0; t < config.duration_s; ++t) {
        if (t > 0) pos += route.speeds[static_cast<std::size_t>(t / 100)];
        if (handover_step(s, net_rng, config, theta, pos, t == 0)) ++fired;
        if (s.burst_left > 0) --s.burst_left;
        if (t > 0) ++possible;
      }
    }
    return static_cast<double>(fired) / static_cast<double>(possible);
  };

  double lo = config.rsrp_low_dbm - 3.0 * config.bw_latent_db - config.position_amplitude_db;
  double hi = config.rsrp_high_dbm;
  for (int it = 0; it < 26; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (measured_rate(mid) < config.handover_rate) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

DriveTrace generate_drive(const SynthConfig& config, GenerationInfo* info) {
  config.validate();
  const double theta = config.rule_threshold_dbm.has_value()
                           ? *config.rule_threshold_dbm
                           : calibrate_rule_threshold(config);

  DriveTrace drive;
  drive.drive_id = config.drive_id.empty()
                       ? "drive_" + std::to_string(config.seed)
                       : config.drive_id;
  drive.duration_s = config.duration_s;
  if (info != nullptr) {
    info->handovers.assign(static_cast<std::size_t>(config.network_count), {});
    info->rule_threshold_dbm = theta;
  }

  Rng root(config.seed);
  Rng route_rng = root.child(0x9097e);
  const RouteProfile route = route_profile(route_rng, config);

  // Route geometry: fixed origin, diagonal heading, position in meters mapped
  // to degrees.
  const double lon0 = 34.80, lat0 = 32.10;
  const double lon_per_m = 7.5e-6, lat_per_m = 6.3e-6;

  for (int n = 0; n < config.network_count; ++n) {
    Rng rng = root.child(mix64(0x6e7, static_cast<std::uint64_t>(n)));
    NetState s;
    s.rsrp = rng.uniform(config.rsrp_low_dbm, config.rsrp_high_dbm);
    s.eta = rng.normal();

    NetworkTrace net;
    net.network_id = n + 1;
    net.rows.reserve(static_cast<std::size_t>(config.duration_s));
    double pos = route.start_m;

    for (int t = 0; t < config.duration_s; ++t) {
      if (t > 0) pos += route.speeds[static_cast<std::size_t>(t / 100)];
      const bool fired = handover_step(s, rng, config, theta, pos, t == 0);
      if (fired && info != nullptr)
        info->handovers[static_cast<std::size_t>(n)].push_back(t);

      const double burst = s.burst_left > 0
                               ? static_cast<double>(s.burst_left) /
                                     static_cast<double>(config.burst_len_s)
                               : 0.0;

      TelemetryRow row;
      row.timestamp = t;
      row.serving_cell_id = "N" + std::to_string(net.network_id) + "C" +
                            std::to_string(s.cell);

      // Loss: near zero in good signal, steep below ~-112 dBm, plus the
      // handover burst.
      const double loss_curve =
          config.loss_signal_max * sigmoid((-112.0 - s.rsrp) / 2.0);
      double loss = config.coupling.loss * loss_curve +
                    config.handover_loss_burst * burst +
                    rng.normal(0.0, config.loss_noise);
      row.packet_loss_rate = std::clamp(loss, 0.0, 1.0);

      // Latency: baseline plus a monotone signal term, handover spike, rare
      // heavy-tail spikes and noise.
      const double lat_curve =
          config.latency_signal_gain_ms * sigmoid((-100.0 - s.rsrp) / 6.0);
      double latency = config.latency_base_ms + config.coupling.latency * lat_curve +
                       config.handover_latency_spike_ms * burst;
      if (rng.bernoulli(config.latency_spike_prob))
        latency += rng.exponential(config.latency_spike_mean_ms);
      latency += rng.normal(0.0, config.latency_noise_ms);
      row.latency = std::max(latency, 1.0);

      row.rsrp = s.rsrp;
      row.rssi = s.rsrp + 17.0 + rng.normal(0.0, 1.0);
      const double signal_frac =
          (config.rsrp_high_dbm - s.rsrp) / (config.rsrp_high_dbm - config.rsrp_low_dbm);
      row.rsrq = std::clamp(-3.0 - 13.0 * signal_frac + rng.normal(0.0, 0.8), -19.5, -3.0);

      const double bw = 100.0 * sigmoid((s.rsrp + 105.0) / 8.0) + 6.0 * s.eta +
                        rng.normal(0.0, 0.5);
      row.modem_bandwidth = std::clamp(bw, 0.1, 110.0);
      row.normalized_bandwidth =
          std::clamp(*row.modem_bandwidth / 100.0 + rng.normal(0.0, 0.01), 0.0, 1.0);
      row.total_bitrate = std::max(20.0 + rng.normal(0.0, 0.5), 0.0);

      if (!rng.bernoulli(config.gps_missing_rate)) {
        row.gps_longitude = lon0 + pos * lon_per_m + rng.normal(0.0, 2e-5);
        row.gps_latitude = lat0 + pos * lat_per_m + rng.normal(0.0, 2e-5);
      }

      if (s.burst_left > 0) --s.burst_left;
      net.rows.push_back(std::move(row));
    }
    drive.networks.push_back(std::move(net));
  }
  validate_drive(drive);
  return drive;
}

const char* policy_name(Policy p) {
  switch (p) {
    case Policy::ans: return "ans";
    case Policy::ans_oracle: return "ans_oracle";
    default: return "baseline";
  }
}

int AnsModels::required_window() const {
  int w = 0;
  if (handover != nullptr) w = std::max(w, handover->config.window_length);
  if (latency != nullptr) w = std::max(w, latency->config.window_length);
  return w;
}

std::vector<double> SimOutcome::loss_rate_series() const {
  std::vector<double> out;
  out.reserve(seconds.size());
  for (const auto& s : seconds)
    out.push_back(s.packets_sent > 0 ? static_cast<double>(s.packets_lost) /
                                           static_cast<double>(s.packets_sent)
                                     : 0.0);
  return out;
}

std::vector<double> SimOutcome::latency_series() const {
  std::vector<double> out;
  for (const auto& s : seconds)
    if (s.mean_latency_ms.has_value()) out.push_back(*s.mean_latency_ms);
  return out;
}

SimOutcome simulate_drive(const DriveTrace& trace, Policy policy, const AnsModels* models,
                          const VideoLoad& load, std::uint64_t seed, int warmup_s) {
  validate_drive(trace);
  const auto networks = static_cast<int>(trace.networks.size());
  require(warmup_s >= 1, ErrorCode::invalid_config, "warmup must be >= 1 second");
  require(trace.duration_s > warmup_s, ErrorCode::trace_too_short,
          "trace must outlast the warm-up window");

  if (policy == Policy::ans) {
    require(models != nullptr && models->handover != nullptr && models->latency != nullptr,
            ErrorCode::invalid_config, "trained selector needs both models");
    require(models->handover->config.task == Task::handover &&
                models->latency->config.task == Task::latency,
            ErrorCode::wrong_task, "selector models have the wrong tasks");
    require(warmup_s >= models->required_window(), ErrorCode::invalid_config,
            "warmup shorter than the model window");
    // Every model feature must be observable on every network.
    for (const TrainedPredictor* model : {models->handover, models->latency}) {
      for (const auto& name : model->feature_set.names) {
        for (const auto& net : trace.networks) {
          bool present = false;
          for (const auto& row : net.rows)
            if (feature_value(row, name).has_value()) {
              present = true;
              break;
            }
          require(present, ErrorCode::model_feature_mismatch,
                  "feature '" + name + "' absent on network " +
                      std::to_string(net.network_id));
        }
      }
    }
  }

  const std::uint64_t drive_hash = fnv1a(trace.drive_id);
  Rng fallback_rng(mix64(seed, drive_hash, 0xfa11));

  SimOutcome outcome;
  outcome.policy = policy;
  outcome.drive_id = trace.drive_id;
  outcome.warmup_s = warmup_s;

  const int source_per_second = load.source_packets_per_second();
  const double threshold = models != nullptr ? models->handover_threshold : 0.7;

  for (std::int64_t t = warmup_s; t < trace.duration_s; ++t) {
    SecondRecord rec;
    rec.second = t;

    // Per-network link conditions for this second.
    std::vector<double> loss_prob(static_cast<std::size_t>(networks), 0.0);
    std::vector<std::optional<double>> latency(static_cast<std::size_t>(networks));
    for (int n = 0; n < networks; ++n) {
      const auto& row = trace.networks[static_cast<std::size_t>(n)]
                            .rows[static_cast<std::size_t>(t)];
      loss_prob[static_cast<std::size_t>(n)] = row.packet_loss_rate.value_or(0.0);
      latency[static_cast<std::size_t>(n)] = row.latency;
    }

    if (policy == Policy::baseline) {
      rec.chosen_network = -1;
      std::vector<int> net_index(static_cast<std::size_t>(networks), 0);
      std::vector<std::int64_t> delivered_per_net(static_cast<std::size_t>(networks), 0);
      std::vector<std::int64_t> delivered_ids;
      for (int f = 0; f < load.fps; ++f) {
        const FecFrame frame =
            baseline_assign(t * load.fps + f, networks);
        delivered_ids.clear();
        for (int j = 0; j < frame.total_packet_count; ++j) {
          const int m = frame.packet_network[static_cast<std::size_t>(j)];
          const int idx = net_index[static_cast<std::size_t>(m)]++;
          const double u = packet_uniform(seed, drive_hash, m, t, idx);
          if (u >= loss_prob[static_cast<std::size_t>(m)]) {
            delivered_ids.push_back(frame.packet_id(j));
            ++delivered_per_net[static_cast<std::size_t>(m)];
          }
        }
        rec.packets_sent += load.packets_per_frame;
        if (!fec_reconstruct(frame, delivered_ids))
          rec.packets_lost += load.packets_per_frame;
      }
      double weighted = 0.0;
      std::int64_t weight = 0;
      for (int n = 0; n < networks; ++n) {
        if (!latency[static_cast<std::size_t>(n)].has_value()) continue;
        weighted += static_cast<double>(delivered_per_net[static_cast<std::size_t>(n)]) *
                    *latency[static_cast<std::size_t>(n)];
        weight += delivered_per_net[static_cast<std::size_t>(n)];
      }
      if (weight > 0) rec.mean_latency_ms = weighted / static_cast<double>(weight);
    } else {
      // Forecast each network, choose one, send this second's packets on it.
      std::vector<NetworkForecast> forecasts;
      forecasts.reserve(static_cast<std::size_t>(networks));
      for (int n = 0; n < networks; ++n) {
        const auto& rows = trace.networks[static_cast<std::size_t>(n)].rows;
        NetworkForecast fc;
        fc.network_id = trace.networks[static_cast<std::size_t>(n)].network_id;
        if (policy == Policy::ans_oracle) {
          fc.predicted_latency = latency[static_cast<std::size_t>(n)].value_or(1e9);
          const auto& prev = rows[static_cast<std::size_t>(t - 1)].serving_cell_id;
          const auto& cur = rows[static_cast<std::size_t>(t)].serving_cell_id;
          fc.handover_probability =
              (prev.has_value() && cur.has_value() && *prev != *cur) ? 1.0 : 0.0;
        } else {
          const auto window = [&](int length) {
            return std::span<const TelemetryRow>(
                rows.data() + t - length, static_cast<std::size_t>(length));
          };
          fc.handover_probability = predict_handover(
              *models->handover, window(models->handover->config.window_length));
          fc.predicted_latency = predict_scalar(
              *models->latency, window(models->latency->config.window_length));
        }
        forecasts.push_back(fc);
      }
      const SelectionDecision decision = ans_select(forecasts, threshold, fallback_rng);
      outcome.decisions.emplace_back(t, decision);

      const int chosen_index = [&] {
        for (int n = 0; n < networks; ++n)
          if (trace.networks[static_cast<std::size_t>(n)].network_id ==
              decision.chosen_network)
            return n;
        return 0;
      }();
      rec.chosen_network = decision.chosen_network;
      rec.packets_sent = source_per_second;
      const double p = loss_prob[static_cast<std::size_t>(chosen_index)];
      for (int pkt = 0; pkt < source_per_second; ++pkt) {
        const double u = packet_uniform(seed, drive_hash, chosen_index, t, pkt);
        if (u < p) ++rec.packets_lost;
      }
      if (rec.packets_lost < rec.packets_sent &&
          latency[static_cast<std::size_t>(chosen_index)].has_value())
        rec.mean_latency_ms = *latency[static_cast<std::size_t>(chosen_index)];
    }

    outcome.seconds.push_back(std::move(rec));
  }
  return outcome;
}

std::vector<std::pair<SimOutcome, SimOutcome>> run_experiment(
    const std::vector<DriveTrace>& corpus, Policy selector_policy, const AnsModels* models,
    const VideoLoad& load, std::uint64_t seed, int warmup_s) {
  require(!corpus.empty(), ErrorCode::empty_corpus, "no drives to simulate");
  require(selector_policy != Policy::baseline, ErrorCode::invalid_config,
          "selector policy must be ans or ans_oracle");
  std::vector<std::pair<SimOutcome, SimOutcome>> out;
  out.reserve(corpus.size());
  for (const auto& trace : corpus) {
    SimOutcome selector =
        simulate_drive(trace, selector_policy, models, load, seed, warmup_s);
    SimOutcome baseline =
        simulate_drive(trace, Policy::baseline, nullptr, load, seed, warmup_s);
    out.emplace_back(std::move(selector), std::move(baseline));
  }
  return out;
}

std::string outcome_csv_header() {
  return "second,algorithm,sent,lost,mean_latency_ms,chosen_network\n";
}

std::string outcome_csv_rows(const SimOutcome& outcome) {
  std::string out;
  for (const auto& s : outcome.seconds) {
    out += std::to_string(s.second);
    out += ',';
    out += policy_name(outcome.policy);
    out += ',';
    out += std::to_string(s.packets_sent);
    out += ',';
    out += std::to_string(s.packets_lost);
    out += ',';
    if (s.mean_latency_ms.has_value()) out += format_double(*s.mean_latency_ms);
    out += ',';
    if (s.chosen_network >= 0) out += std::to_string(s.chosen_network);
    out += '\n';
  }
  return out;
}

std::vector<DriveSummary> compare_report(
    std::span<const std::pair<SimOutcome, SimOutcome>> outcomes) {
  require(!outcomes.empty(), ErrorCode::unpaired_outcomes, "no outcome pairs");
  std::vector<DriveSummary> out;
  for (const auto& [selector, baseline] : outcomes) {
    require(selector.drive_id == baseline.drive_id, ErrorCode::unpaired_outcomes,
            "pair mixes drives " + selector.drive_id + " and " + baseline.drive_id);
    require(baseline.policy == Policy::baseline && selector.policy != Policy::baseline,
            ErrorCode::unpaired_outcomes, "pair must be (selector, baseline)");
    require(selector.seconds.size() == baseline.seconds.size(),
            ErrorCode::unpaired_outcomes, "outcome lengths differ");
    for (const SimOutcome* o : {&selector, &baseline}) {
      DriveSummary s;
      s.drive_id = o->drive_id;
      s.algorithm = policy_name(o->policy);
      const auto loss = o->loss_rate_series();
      s.loss_rate = percentiles(loss);
      const auto lat = o->latency_series();
      if (!lat.empty()) s.latency_ms = percentiles(lat);
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::string compare_csv(std::span<const DriveSummary> summaries) {
  std::string out =
      "drive,algorithm,loss_p25,loss_p50,loss_p75,latency_p25,latency_p50,latency_p75\n";
  for (const auto& s : summaries) {
    out += s.drive_id;
    out += ',';
    out += s.algorithm;
    out += ',';
    out += format_double(s.loss_rate.p25);
    out += ',';
    out += format_double(s.loss_rate.p50);
    out += ',';
    out += format_double(s.loss_rate.p75);
    out += ',';
    out += format_double(s.latency_ms.p25);
    out += ',';
    out += format_double(s.latency_ms.p50);
    out += ',';
    out += format_double(s.latency_ms.p75);
    out += '\n';
  }
  return out;
}

std::string compare_json(std::span<const DriveSummary> summaries) {
  json arr = json::array();
  for (const auto& s : summaries) {
    arr.push_back(json{{"drive", s.drive_id},
                       {"algorithm", s.algorithm},
                       {"loss_rate", {{"p25", s.loss_rate.p25},
                                      {"p50", s.loss_rate.p50},
                                      {"p75", s.loss_rate.p75}}},
                       {"latency_ms", {{"p25", s.latency_ms.p25},
                                       {"p50", s.latency_ms.p50},
                                       {"p75", s.latency_ms.p75}}}});
  }
  return arr.dump(2) + "\n";
}

}  // namespace netsel
