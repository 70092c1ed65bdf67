// Acceptance suite: one pass/fail line per criterion. Every threshold is
// pinned in code; run with a list of criterion numbers to execute a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "netsel/format.hpp"
#include "netsel/metrics.hpp"
#include "netsel/network.hpp"
#include "netsel/predictor.hpp"
#include "netsel/preprocess.hpp"
#include "netsel/selection.hpp"
#include "netsel/simulation.hpp"
#include "netsel/trace.hpp"

using namespace netsel;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Criterion {
  int id;
  bool passed;
  std::string detail;
};

std::vector<Criterion> g_results;

void report(int id, bool passed, const std::string& detail) {
  g_results.push_back({id, passed, detail});
  std::printf("[%s] criterion %2d: %s\n", passed ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
}

Matrix random_window(Rng& rng, int features, int length) {
  Matrix w(features, length);
  for (Eigen::Index r = 0; r < w.rows(); ++r)
    for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(0.0, 1.0);
  return w;
}

// --- criterion 1: gradient correctness -------------------------------------

// The composed network needs at least 9 input steps (four valid convolutions
// with kernel 3 consume 8); the tiny check therefore runs at window 12
// instead of the nominal 8, keeping every other knob as specified.
bool gradcheck_full_network(LossKind kind, FinalActivation act, std::uint64_t seed,
                            int probes_per_buffer, double tol, int* checked_out) {
  ModelArch arch;
  arch.input_features = 3;
  arch.conv_channels = {4, 4, 4, 4};
  arch.lstm_hidden = 6;
  arch.fc_hidden = {5, 3};
  arch.final_activation = act;
  const int window = 12;

  Rng rng(seed);
  ModelParams params = ModelParams::init(arch, rng.next_u64());
  // Fan-in init leaves tiny-net activations microscopic, parking relu units
  // on their kinks; a healthier weight scale keeps the probe region smooth.
  for (Matrix* m : params.buffers()) *m *= 3.0;
  // A window whose relu cascade dies puts the head exactly on its kinks, so
  // only input-responsive samples are probed.
  auto responsive = [&](const Matrix& w) {
    Matrix scaled = w * 1.01;
    const WindowRef a{&w, window - 1};
    const WindowRef b{&scaled, window - 1};
    return model_forward_batch(params, std::span<const WindowRef>(&a, 1), window)[0] !=
           model_forward_batch(params, std::span<const WindowRef>(&b, 1), window)[0];
  };
  std::vector<Matrix> windows;
  std::vector<double> labels;
  while (windows.size() < 4) {
    Matrix w = random_window(rng, arch.input_features, window);
    if (!responsive(w)) continue;
    windows.push_back(std::move(w));
    labels.push_back(kind == LossKind::bce ? (rng.bernoulli(0.5) ? 1.0 : 0.0)
                                           : rng.uniform(0.0, 1.0));
  }
  std::vector<WindowRef> refs;
  for (const auto& w : windows) refs.push_back(WindowRef{&w, window - 1});
  if (kind == LossKind::mae) {
    // Keep labels away from the predictions so no probe straddles the
    // absolute-error kink.
    const auto preds = model_forward_batch(params, refs, window);
    for (std::size_t i = 0; i < labels.size(); ++i)
      labels[i] = preds[i] + (i % 2 == 0 ? 0.4 : -0.4);
  }

  const GradientSet grads = model_backward(params, refs, window, labels, kind);
  std::uint64_t base_mask = 0;
  auto loss_at = [&](std::uint64_t* mask) {
    const auto preds = model_forward_batch(params, refs, window, mask);
    return loss_mean(preds, labels, kind);
  };
  loss_at(&base_mask);

  const double eps = 3e-6;
  auto grad_buffers = grads.buffers();
  auto param_buffers = params.buffers();
  int checked = 0;
  bool ok = true;
  for (std::size_t bi = 0; bi < param_buffers.size(); ++bi) {
    Matrix* pm = param_buffers[bi];
    const Matrix* gm = grad_buffers[bi];
    int valid = 0, attempts = 0;
    while (valid < probes_per_buffer && attempts < probes_per_buffer * 8) {
      ++attempts;
      const auto idx = static_cast<Eigen::Index>(
          rng.uniform_index(static_cast<std::uint64_t>(pm->size())));
      const double saved = pm->data()[idx];
      bool pattern_stable = true;
      auto fd_at = [&](double step) {
        std::uint64_t up_mask = 0, down_mask = 0;
        pm->data()[idx] = saved + step;
        const double up = loss_at(&up_mask);
        pm->data()[idx] = saved - step;
        const double down = loss_at(&down_mask);
        pm->data()[idx] = saved;
        // Finite differences are only derivatives while every relu keeps its
        // on/off state; a flipped unit means the probe crossed a kink.
        if (up_mask != base_mask || down_mask != base_mask) pattern_stable = false;
        return (up - down) / (2.0 * step);
      };
      const double fd = fd_at(eps);
      if (!pattern_stable) continue;
      ++valid;
      ++checked;
      const double an = gm->data()[idx];
      const double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
      if (std::abs(fd - an) / denom > tol) ok = false;
    }
    if (valid < probes_per_buffer) ok = false;
  }
  *checked_out = checked;
  return ok;
}

void criterion_1() {
  const auto t0 = Clock::now();
  int checked_bce = 0, checked_mse = 0, checked_mae = 0;
  const bool ok_bce = gradcheck_full_network(LossKind::bce, FinalActivation::sigmoid,
                                             20260801, 100, 1e-4, &checked_bce);
  const bool ok_mse = gradcheck_full_network(LossKind::mse, FinalActivation::identity,
                                             20260803, 100, 1e-4, &checked_mse);
  const bool ok_mae = gradcheck_full_network(LossKind::mae, FinalActivation::identity,
                                             20260802, 100, 1e-4, &checked_mae);
  const double elapsed = seconds_since(t0);
  const bool ok = ok_bce && ok_mse && ok_mae && elapsed < 60.0;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "full-network gradients vs central differences at 1e-4: "
                "%d+%d+%d coordinates (window 12; 8 steps feed the conv stack), %.1f s",
                checked_bce, checked_mse, checked_mae, elapsed);
  report(1, ok, buf);
}

// --- criterion 2: unified-training reduction --------------------------------

void criterion_2() {
  const auto t0 = Clock::now();
  SynthConfig cfg;
  cfg.duration_s = 400;
  cfg.handover_mode = HandoverMode::stochastic;
  cfg.handover_rate = 0.08;
  std::vector<DriveTrace> corpus;
  for (int i = 0; i < 3; ++i) {
    cfg.seed = 3100 + static_cast<std::uint64_t>(i);
    cfg.drive_id = "red_" + std::to_string(i);
    corpus.push_back(generate_drive(cfg));
  }
  for (auto& drive : corpus) {
    drive.networks[1] = drive.networks[0];
    drive.networks[1].network_id = 2;
    drive.networks[2] = drive.networks[0];
    drive.networks[2].network_id = 3;
  }
  std::vector<DriveTrace> single = corpus;
  for (auto& drive : single) drive.networks.resize(1);

  PredictorConfig pc;
  pc.task = Task::handover;
  pc.feature_kind = FeatureKind::rsrp_rsrq;
  pc.window_length = 12;
  pc.batch_size = 32;
  pc.learning_rate = 0.01;
  pc.max_epochs = 4;
  pc.patience = 4;
  pc.conv_channels = {4, 4, 4, 6};
  pc.lstm_hidden = 6;
  pc.fc_hidden = {5, 3};

  bool ok = true;
  for (AveragingMode mode : {AveragingMode::per_epoch, AveragingMode::per_batch}) {
    pc.averaging = mode;
    const TrainedPredictor m3 = train_unified(corpus, pc, 0.7, 11);
    const TrainedPredictor m1 = train_unified(single, pc, 0.7, 11);
    ok = ok && m3.params.bitwise_equal(m1.params);
  }
  const double elapsed = seconds_since(t0);
  ok = ok && elapsed < 120.0;
  char buf[192];
  std::snprintf(buf, sizeof buf,
                "3 identical per-network datasets train bit-identically to 1 network "
                "(both averaging modes), %.1f s",
                elapsed);
  report(2, ok, buf);
}

// --- criterion 3: selector equivalence and fallback uniformity --------------

void criterion_3() {
  Rng gen(515);
  Rng sel_rng(516);
  bool ok = true;
  int compared = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 1 + static_cast<int>(gen.uniform_index(6));
    std::vector<NetworkForecast> forecasts;
    for (int i = 0; i < n; ++i)
      forecasts.push_back(NetworkForecast{
          i + 1, std::floor(gen.uniform(0.0, 250.0) * 4.0) / 4.0, gen.uniform(0.0, 1.0)});
    const double thresh = gen.uniform(0.1, 0.9);

    // Brute-force reference: filter by threshold, latency argmin, id ties.
    int expect = -1;
    double best_latency = 0.0;
    for (const auto& f : forecasts) {
      if (f.handover_probability >= thresh) continue;
      if (expect < 0 || f.predicted_latency < best_latency ||
          (f.predicted_latency == best_latency && f.network_id < expect)) {
        expect = f.network_id;
        best_latency = f.predicted_latency;
      }
    }
    if (expect < 0) continue;
    ++compared;
    const auto d = ans_select(forecasts, thresh, sel_rng);
    if (d.chosen_network != expect) ok = false;
  }

  std::vector<NetworkForecast> blocked{{1, 10.0, 0.9}, {2, 20.0, 0.95}, {3, 30.0, 0.99}};
  std::array<int, 3> counts{0, 0, 0};
  Rng fb(517);
  for (int t = 0; t < 10000; ++t) {
    const auto d = ans_select(blocked, 0.5, fb);
    counts[static_cast<std::size_t>(d.chosen_network - 1)] += 1;
  }
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - 10000.0 / 3) * (c - 10000.0 / 3) / (10000.0 / 3);
  const bool uniform_ok = chi2 < 9.210;  // dof 2 at p = 0.01

  char buf[192];
  std::snprintf(buf, sizeof buf,
                "selector equals brute force on %d qualifying inputs; fallback chi^2 "
                "%.2f < 9.21 (p > 0.01)",
                compared, chi2);
  report(3, ok && uniform_ok && compared > 5000, buf);
}

// --- criterion 4: FEC boundary ----------------------------------------------

void criterion_4() {
  const FecFrame frame = baseline_assign(0, 3);
  bool ok = true;
  for (int delivered = 0; delivered <= 36; ++delivered) {
    std::vector<std::int64_t> ids;
    for (int j = 0; j < delivered; ++j) ids.push_back(frame.packet_id(j));
    if (fec_reconstruct(frame, ids) != (delivered >= 24)) ok = false;
  }
  report(4, ok, "frame recovery iff >= 24 of 36 packets, all delivery counts 0..36");
}

// --- criterion 5: windowing counts and balancing ----------------------------

void criterion_5() {
  bool count_ok = true;
  SynthConfig cfg;
  cfg.handover_mode = HandoverMode::stochastic;
  for (int duration : {200, 500, 1000}) {
    cfg.duration_s = duration;
    cfg.seed = 700 + static_cast<std::uint64_t>(duration);
    const DriveTrace drive = generate_drive(cfg);
    for (int T : {32, 64, 128}) {
      for (int H : {1, 10}) {
        if (duration < T + H) continue;
        WindowConfig wc;
        wc.feature_set = FeatureSet::predefined(FeatureKind::rsrp_rsrq);
        wc.window_length = T;
        wc.horizon = H;
        wc.task = Task::loss;
        const Matrix raw = feature_matrix(drive.networks[0], wc.feature_set).transpose();
        std::vector<double> labels;
        for (const auto& lab : label_series(drive.networks[0], Task::loss))
          if (lab.has_value()) labels.push_back(*lab);
        const auto norm = fit_normalization(raw, labels);
        const auto ds = make_windows(drive.networks[0], drive.drive_id, wc, norm);
        if (ds.size() != static_cast<std::size_t>(duration - T - H + 1)) count_ok = false;
      }
    }
  }

  // 2:98 corpus, pooled windows, balanced.
  SynthConfig bal_cfg;
  bal_cfg.duration_s = 1000;
  bal_cfg.handover_mode = HandoverMode::stochastic;
  bal_cfg.handover_rate = 0.02;
  SupervisedDataset pooled;
  bool first = true;
  std::size_t natural_pos = 0;
  for (int d = 0; d < 10; ++d) {
    bal_cfg.seed = 7100 + static_cast<std::uint64_t>(d);
    bal_cfg.drive_id = "bal_" + std::to_string(d);
    const DriveTrace drive = generate_drive(bal_cfg);
    for (const auto& net : drive.networks) {
      WindowConfig wc;
      wc.feature_set = FeatureSet::predefined(FeatureKind::rsrp_rsrq);
      wc.window_length = 32;
      wc.horizon = 1;
      wc.task = Task::handover;
      const Matrix raw = feature_matrix(net, wc.feature_set).transpose();
      const auto norm = fit_normalization(raw, {});
      auto part = make_windows(net, drive.drive_id, wc, norm);
      if (first) {
        pooled = std::move(part);
        first = false;
      } else {
        pooled.append(std::move(part));
      }
    }
  }
  for (const auto& s : pooled.samples) natural_pos += s.label == 1.0 ? 1 : 0;
  const double natural_rate =
      static_cast<double>(natural_pos) / static_cast<double>(pooled.size());
  const auto balanced = balance_undersample(pooled, 99);
  std::int64_t pos = 0, neg = 0;
  for (const auto& s : balanced.samples) (s.label == 1.0 ? pos : neg) += 1;
  const bool balance_ok = std::llabs(pos - neg) <= 1 && pos == static_cast<std::int64_t>(natural_pos);

  char buf[192];
  std::snprintf(buf, sizeof buf,
                "window counts match duration-T-H+1 over the (T,H) grid; balancing a "
                "%.3f-positive corpus gives %lld:%lld",
                natural_rate, static_cast<long long>(pos), static_cast<long long>(neg));
  report(5, count_ok && balance_ok, buf);
}

// --- criterion 6: AUC equivalence -------------------------------------------

void criterion_6() {
  Rng rng(616);
  bool equiv_ok = true;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 20 + static_cast<int>(rng.uniform_index(60));
    std::vector<double> scores;
    std::vector<int> labels;
    bool has_pos = false, has_neg = false;
    for (int i = 0; i < n; ++i) {
      scores.push_back(std::floor(rng.uniform(0.0, 1.0) * 16.0) / 16.0);
      labels.push_back(rng.bernoulli(0.4) ? 1 : 0);
      (labels.back() ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) {
      labels[0] = has_pos ? 0 : 1;
    }
    const auto roc = roc_auc(scores, labels);
    double wins = 0.0;
    std::int64_t pairs = 0;
    for (int i = 0; i < n; ++i) {
      if (!labels[static_cast<std::size_t>(i)]) continue;
      for (int j = 0; j < n; ++j) {
        if (labels[static_cast<std::size_t>(j)]) continue;
        ++pairs;
        const double a = scores[static_cast<std::size_t>(i)];
        const double b = scores[static_cast<std::size_t>(j)];
        wins += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
      }
    }
    if (std::abs(roc.auc - wins / static_cast<double>(pairs)) > 1e-12) equiv_ok = false;

    std::vector<double> affine = scores;
    for (auto& s : affine) s = 2.0 * s + 1.0;
    const auto roc2 = roc_auc(affine, labels);
    if (roc2.auc != roc.auc || roc2.fpr != roc.fpr || roc2.tpr != roc.tpr)
      equiv_ok = false;
  }
  report(6, equiv_ok,
         "trapezoidal AUC equals pairwise Mann-Whitney to 1e-12 on 200 sets; exact "
         "invariance under increasing transforms");
}

// --- criteria 7-9: shared synthetic corpus ----------------------------------

struct SharedCorpus {
  std::vector<DriveTrace> train;   // 50 drives
  std::vector<DriveTrace> test;    // 10 drives
  std::vector<DriveTrace> replay;  // 20 drives for the end-to-end comparison
};

SharedCorpus build_corpus() {
  SynthConfig cfg;
  cfg.duration_s = 1000;
  cfg.handover_mode = HandoverMode::rule;
  cfg.handover_rate = 0.03;
  cfg.rule_threshold_dbm = calibrate_rule_threshold(cfg);
  SharedCorpus corpus;
  auto make = [&](int count, std::uint64_t seed0, const char* prefix,
                  std::vector<DriveTrace>& out) {
    for (int i = 0; i < count; ++i) {
      cfg.seed = seed0 + static_cast<std::uint64_t>(i);
      cfg.drive_id = std::string(prefix) + (i < 10 ? "0" : "") + std::to_string(i);
      out.push_back(generate_drive(cfg));
    }
  };
  make(50, 810000, "train_", corpus.train);
  make(10, 820000, "test_", corpus.test);
  make(20, 830000, "replay_", corpus.replay);
  return corpus;
}

PredictorConfig desk_config(Task task, FeatureKind features) {
  PredictorConfig pc;
  pc.task = task;
  pc.feature_kind = features;
  pc.window_length = 64;
  pc.horizon = 1;
  pc.batch_size = 128;
  pc.learning_rate = 0.003;
  pc.averaging = AveragingMode::per_batch;
  pc.conv_channels = {16, 16, 16, 32};
  pc.lstm_hidden = 32;
  pc.fc_hidden = {16, 8};
  if (task == Task::handover) {
    pc.max_epochs = 60;
    pc.patience = 10;
  } else {
    pc.max_epochs = 15;
    pc.patience = 5;
    pc.window_step = 3;
    pc.max_val_samples = 4000;
  }
  return pc;
}

struct HandEval {
  double auc = 0.0;
  double true_acc = 0.0;
  std::size_t n = 0;
};

HandEval evaluate_handover(const TrainedPredictor& model,
                           const std::vector<DriveTrace>& corpus) {
  std::vector<double> probs;
  std::vector<int> labels;
  const int T = model.config.window_length;
  const int H = model.config.horizon;
  for (const auto& drive : corpus)
    for (const auto& net : drive.networks) {
      const auto series = label_series(net, Task::handover);
      const auto rows = static_cast<std::int64_t>(net.rows.size());
      for (std::int64_t t = T - 1; t + H < rows; ++t) {
        const auto& lab = series[static_cast<std::size_t>(t + H)];
        if (!lab.has_value()) continue;
        std::span<const TelemetryRow> window(net.rows.data() + (t - T + 1),
                                             static_cast<std::size_t>(T));
        probs.push_back(predict_handover(model, window));
        labels.push_back(*lab == 1.0 ? 1 : 0);
      }
    }
  HandEval out;
  out.n = probs.size();
  out.auc = roc_auc(probs, labels).auc;
  out.true_acc = true_accuracy(probs, labels, 0.7);
  return out;
}

void criteria_7_8_9() {
  std::printf("-- building shared synthetic corpus (50 train / 10 test / 20 replay)\n");
  std::fflush(stdout);
  const SharedCorpus corpus = build_corpus();

  // criterion 7: learnability at desk scale
  const auto t_train0 = Clock::now();
  const TrainedPredictor hand =
      train_unified(corpus.train, desk_config(Task::handover, FeatureKind::nine), 0.8, 2026);
  const TrainedPredictor latency =
      train_unified(corpus.train, desk_config(Task::latency, FeatureKind::nine), 0.8, 2027);
  const double train_time = seconds_since(t_train0);

  const HandEval hand_eval = evaluate_handover(hand, corpus.test);

  std::vector<double> lat_preds, lat_reals;
  for (const auto& drive : corpus.test)
    for (const auto& net : drive.networks) {
      const auto series = label_series(net, Task::latency);
      const auto rows = static_cast<std::int64_t>(net.rows.size());
      for (std::int64_t t = 63; t + 1 < rows; t += 2) {
        std::span<const TelemetryRow> window(net.rows.data() + (t - 63), 64);
        lat_preds.push_back(predict_scalar(latency, window));
        lat_reals.push_back(*series[static_cast<std::size_t>(t + 1)]);
      }
    }
  const double ratio = prediction_ratio(lat_preds, lat_reals).ratio;

  {
    const bool ok = hand_eval.true_acc >= 0.85 && hand_eval.auc >= 0.90 &&
                    ratio >= 0.9 && ratio <= 1.1 && train_time <= 1800.0;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "held-out true_accuracy %.4f (>=0.85), AUC %.4f (>=0.90), latency "
                  "prediction ratio %.4f (in [0.9,1.1]); training %.0f s (<=1800)",
                  hand_eval.true_acc, hand_eval.auc, ratio, train_time);
    report(7, ok, buf);
  }

  // criterion 8: feature-ablation AUC ordering. Scored over every held-out
  // drive (test + replay) so the AUC noise sits well under the margins.
  {
    std::vector<DriveTrace> held_out = corpus.test;
    held_out.insert(held_out.end(), corpus.replay.begin(), corpus.replay.end());

    PredictorConfig ablate = desk_config(Task::handover, FeatureKind::seven);
    const TrainedPredictor m7 = train_unified(corpus.train, ablate, 0.8, 2026);
    ablate.feature_kind = FeatureKind::rsrp_rsrq;
    const TrainedPredictor m2 = train_unified(corpus.train, ablate, 0.8, 2026);
    ablate.feature_kind = FeatureKind::gps_only;
    ablate.max_epochs = 25;
    const TrainedPredictor mg = train_unified(corpus.train, ablate, 0.8, 2026);

    const double auc9 = evaluate_handover(hand, held_out).auc;
    const double auc7 = evaluate_handover(m7, held_out).auc;
    const double auc2 = evaluate_handover(m2, held_out).auc;
    const double aucg = evaluate_handover(mg, held_out).auc;
    const bool ok = auc9 >= auc7 && auc7 >= auc2 && auc2 > aucg;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "held-out AUC ordering: 9-feature %.4f >= 7-feature %.4f >= rsrp/rsrq "
                  "%.4f > gps-only %.4f",
                  auc9, auc7, auc2, aucg);
    report(8, ok, buf);
  }

  // criterion 9: end-to-end comparison on 20 replay drives
  {
    AnsModels models;
    models.handover = &hand;
    models.latency = &latency;
    models.handover_threshold = 0.7;
    const VideoLoad load;
    const int warmup = models.required_window();

    auto count_wins = [&](Policy policy, const AnsModels* m) {
      const auto pairs = run_experiment(corpus.replay, policy, m, load, 424242, warmup);
      const auto report_rows = compare_report(pairs);
      int wins = 0;
      for (std::size_t i = 0; i + 1 < report_rows.size(); i += 2) {
        const bool loss_ok = report_rows[i].loss_rate.p50 <= report_rows[i + 1].loss_rate.p50;
        const bool lat_ok =
            report_rows[i].latency_ms.p50 <= report_rows[i + 1].latency_ms.p50;
        if (loss_ok && lat_ok) ++wins;
      }
      return wins;
    };

    const int trained_wins = count_wins(Policy::ans, &models);
    const int oracle_wins = count_wins(Policy::ans_oracle, nullptr);
    const bool ok = trained_wins >= 18 && oracle_wins == 20;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "selector medians (loss and latency) <= baseline: trained %d/20 "
                  "(>=18), oracle %d/20 (=20)",
                  trained_wins, oracle_wins);
    report(9, ok, buf);
  }
}

// --- criterion 10: inference budget ------------------------------------------

void criterion_10() {
  // Reference-sized models: conv 64/64/64/128, hidden 128, head 64-32-1,
  // 9 features, 64-second window.
  SynthConfig cfg;
  cfg.seed = 1010;
  cfg.duration_s = 300;
  const DriveTrace trace = generate_drive(cfg);
  const auto& rows = trace.networks.front().rows;

  auto make_model = [&](Task task, std::uint64_t seed) {
    TrainedPredictor model;
    PredictorConfig pc;
    pc.task = task;
    pc.feature_kind = FeatureKind::nine;
    pc.window_length = 64;
    model.config = pc;
    model.feature_set = FeatureSet::predefined(FeatureKind::nine);
    model.params = ModelParams::init(pc.make_arch(), seed);
    // Normalization fitted on this trace's rows.
    const Matrix raw = feature_matrix(trace.networks[0], model.feature_set).transpose();
    std::vector<double> labels;
    for (const auto& lab : label_series(trace.networks[0], task))
      if (lab.has_value()) labels.push_back(*lab);
    model.normalization = fit_normalization(raw, labels);
    return model;
  };
  const TrainedPredictor hand = make_model(Task::handover, 31);
  const TrainedPredictor lat = make_model(Task::latency, 32);

  std::span<const TelemetryRow> window(rows.data() + rows.size() - 64, 64);
  double total = 0.0;
  double sink = 0.0;
  const int iterations = 200;
  // Warm up caches before timing.
  sink += predict_handover(hand, window) + predict_scalar(lat, window);
  const auto t0 = Clock::now();
  for (int i = 0; i < iterations; ++i) {
    sink += predict_handover(hand, window);
    sink += predict_scalar(lat, window);
  }
  total = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  (void)sink;
  const double mean_ms = total / iterations;
  char buf[192];
  std::snprintf(buf, sizeof buf,
                "mean sequential HandPredict+LatencyPredict inference on the 9x64 "
                "input: %.2f ms (< 100 ms)",
                mean_ms);
  report(10, mean_ms < 100.0, buf);
}

// --- criterion 11: determinism ----------------------------------------------

void criterion_11() {
  const fs::path dir = fs::temp_directory_path() / "netsel_acceptance_det";
  fs::remove_all(dir);
  fs::create_directories(dir);
  bool ok = true;

  // generation -> trace file bytes
  SynthConfig cfg;
  cfg.seed = 1111;
  cfg.duration_s = 400;
  cfg.handover_mode = HandoverMode::stochastic;
  cfg.drive_id = "det";
  save_drive(generate_drive(cfg), dir / "a.csv");
  save_drive(generate_drive(cfg), dir / "b.csv");
  ok = ok && read_text_file(dir / "a.csv") == read_text_file(dir / "b.csv");

  // dataset container bytes
  const DriveTrace drive = generate_drive(cfg);
  WindowConfig wc;
  wc.feature_set = FeatureSet::predefined(FeatureKind::rsrp_rsrq);
  wc.window_length = 16;
  wc.task = Task::handover;
  const Matrix raw = feature_matrix(drive.networks[0], wc.feature_set).transpose();
  const auto norm = fit_normalization(raw, {});
  const auto ds = make_windows(drive.networks[0], drive.drive_id, wc, norm);
  save_dataset(ds, dir / "a.ds");
  save_dataset(ds, dir / "b.ds");
  ok = ok && read_text_file(dir / "a.ds") == read_text_file(dir / "b.ds");

  // training -> model file bytes
  std::vector<DriveTrace> corpus;
  for (int i = 0; i < 3; ++i) {
    cfg.seed = 1200 + static_cast<std::uint64_t>(i);
    cfg.handover_rate = 0.08;
    cfg.drive_id = "det_" + std::to_string(i);
    corpus.push_back(generate_drive(cfg));
  }
  PredictorConfig pc;
  pc.task = Task::handover;
  pc.feature_kind = FeatureKind::rsrp_rsrq;
  pc.window_length = 12;
  pc.batch_size = 64;
  pc.max_epochs = 3;
  pc.patience = 3;
  pc.conv_channels = {4, 4, 4, 6};
  pc.lstm_hidden = 6;
  pc.fc_hidden = {5, 3};
  save_model(train_unified(corpus, pc, 0.7, 77), dir / "a.model");
  save_model(train_unified(corpus, pc, 0.7, 77), dir / "b.model");
  ok = ok && read_text_file(dir / "a.model") == read_text_file(dir / "b.model");

  // simulation -> outcome rows
  const VideoLoad load;
  const SimOutcome sim_a =
      simulate_drive(corpus[0], Policy::ans_oracle, nullptr, load, 5, 32);
  const SimOutcome sim_b =
      simulate_drive(corpus[0], Policy::ans_oracle, nullptr, load, 5, 32);
  ok = ok && outcome_csv_rows(sim_a) == outcome_csv_rows(sim_b);

  // comparison report bytes
  const auto pairs_a = run_experiment(corpus, Policy::ans_oracle, nullptr, load, 6, 32);
  const auto pairs_b = run_experiment(corpus, Policy::ans_oracle, nullptr, load, 6, 32);
  const auto rep_a = compare_report(pairs_a);
  const auto rep_b = compare_report(pairs_b);
  ok = ok && compare_csv(rep_a) == compare_csv(rep_b) &&
       compare_json(rep_a) == compare_json(rep_b);

  fs::remove_all(dir);
  report(11, ok,
         "byte-identical artifacts from identical (config, seed): traces, datasets, "
         "models, simulations, reports");
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  auto wanted = [&](int id) { return selected.empty() || selected.count(id) > 0; };

  const auto t0 = Clock::now();
  if (wanted(1)) criterion_1();
  if (wanted(2)) criterion_2();
  if (wanted(3)) criterion_3();
  if (wanted(4)) criterion_4();
  if (wanted(5)) criterion_5();
  if (wanted(6)) criterion_6();
  if (wanted(7) || wanted(8) || wanted(9)) criteria_7_8_9();
  if (wanted(10)) criterion_10();
  if (wanted(11)) criterion_11();

  int failures = 0;
  for (const auto& c : g_results) failures += c.passed ? 0 : 1;
  std::printf("acceptance: %zu criteria run, %d failed, %.0f s total\n",
              g_results.size(), failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
