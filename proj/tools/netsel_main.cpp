// netsel: synthetic drive generation, forecaster training, evaluation, and
// packet-routing simulation from one entry point.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "netsel/format.hpp"
#include "netsel/metrics.hpp"
#include "netsel/predictor.hpp"
#include "netsel/preprocess.hpp"
#include "netsel/selection.hpp"
#include "netsel/simulation.hpp"
#include "netsel/trace.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace netsel;

namespace {

// Every run directory gets a manifest: resolved configuration plus a hash of
// each artifact, so identical config + seed is checkable byte for byte.
struct Manifest {
  std::map<std::string, std::string> config;
  std::vector<fs::path> outputs;

  void set(const std::string& key, const std::string& value) { config[key] = value; }
  void set(const std::string& key, std::int64_t value) { config[key] = std::to_string(value); }
  void set(const std::string& key, double value) { config[key] = format_double(value); }

  void write(const fs::path& dir) const {
    json j;
    j["config"] = config;
    json arts = json::object();
    std::vector<fs::path> sorted = outputs;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& p : sorted) arts[p.filename().string()] = file_hash_hex(p);
    j["artifacts"] = arts;
    write_text_file(dir / "manifest.json", j.dump(2) + "\n");
  }
};

std::vector<DriveTrace> load_trace_dir(const fs::path& dir) {
  require(fs::is_directory(dir), ErrorCode::io_failure,
          dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".csv") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  require(!files.empty(), ErrorCode::empty_corpus, "no .csv traces in " + dir.string());
  std::vector<DriveTrace> corpus;
  corpus.reserve(files.size());
  for (const auto& f : files) corpus.push_back(load_drive(f));
  return corpus;
}

std::array<int, 4> parse_conv(const std::string& text) {
  std::array<int, 4> out{};
  std::size_t at = 0;
  for (int i = 0; i < 4; ++i) {
    const std::size_t comma = text.find(',', at);
    const std::string part =
        text.substr(at, comma == std::string::npos ? std::string::npos : comma - at);
    const auto v = parse_int(part);
    require(v.has_value() && *v > 0, ErrorCode::usage_error,
            "--conv-channels expects four positive integers");
    out[static_cast<std::size_t>(i)] = static_cast<int>(*v);
    require(i == 3 || comma != std::string::npos, ErrorCode::usage_error,
            "--conv-channels expects four comma-separated values");
    at = comma + 1;
  }
  return out;
}

std::array<int, 2> parse_fc(const std::string& text) {
  const std::size_t comma = text.find(',');
  require(comma != std::string::npos, ErrorCode::usage_error,
          "--fc-hidden expects two comma-separated values");
  const auto a = parse_int(text.substr(0, comma));
  const auto b = parse_int(text.substr(comma + 1));
  require(a.has_value() && b.has_value() && *a > 0 && *b > 0, ErrorCode::usage_error,
          "--fc-hidden expects two positive integers");
  return {static_cast<int>(*a), static_cast<int>(*b)};
}

// --- generate ---

struct GenerateArgs {
  std::string out_dir;
  int drives = 20;
  std::uint64_t seed = 1;
  int duration_min = 900;
  int duration_max = 1200;
  int networks = 3;
  double handover_rate = 0.03;
  std::string mode = "stochastic";
  double gps_missing = 0.36;
  double coupling_handover = 1.0;
  double coupling_loss = 1.0;
  double coupling_latency = 1.0;
};

int run_generate(const GenerateArgs& args) {
  fs::create_directories(args.out_dir);
  SynthConfig base;
  base.network_count = args.networks;
  base.handover_rate = args.handover_rate;
  base.handover_mode =
      args.mode == "rule" ? HandoverMode::rule : HandoverMode::stochastic;
  require(args.mode == "rule" || args.mode == "stochastic", ErrorCode::usage_error,
          "--mode must be rule or stochastic");
  base.gps_missing_rate = args.gps_missing;
  base.coupling = CouplingConfig{args.coupling_handover, args.coupling_loss,
                                 args.coupling_latency};
  base.duration_s = args.duration_min;
  require(args.duration_max >= args.duration_min, ErrorCode::usage_error,
          "--duration-max below --duration-min");
  if (base.handover_mode == HandoverMode::rule) {
    // One threshold for the whole corpus; calibrate on the mean duration.
    SynthConfig probe = base;
    probe.duration_s = (args.duration_min + args.duration_max) / 2;
    base.rule_threshold_dbm = calibrate_rule_threshold(probe);
  }

  Manifest manifest;
  Rng seeds(args.seed);
  for (int i = 0; i < args.drives; ++i) {
    SynthConfig cfg = base;
    cfg.seed = mix64(args.seed, static_cast<std::uint64_t>(i));
    cfg.duration_s = args.duration_min +
                     static_cast<int>(seeds.uniform_index(static_cast<std::uint64_t>(
                         args.duration_max - args.duration_min + 1)));
    char name[32];
    std::snprintf(name, sizeof name, "drive_%04d", i);
    cfg.drive_id = name;
    const DriveTrace trace = generate_drive(cfg);
    const fs::path path = fs::path(args.out_dir) / (std::string(name) + ".csv");
    save_drive(trace, path);
    manifest.outputs.push_back(path);
  }

  manifest.set("subcommand", "generate");
  manifest.set("drives", static_cast<std::int64_t>(args.drives));
  manifest.set("seed", static_cast<std::int64_t>(args.seed));
  manifest.set("duration_min", static_cast<std::int64_t>(args.duration_min));
  manifest.set("duration_max", static_cast<std::int64_t>(args.duration_max));
  manifest.set("networks", static_cast<std::int64_t>(args.networks));
  manifest.set("handover_rate", args.handover_rate);
  manifest.set("mode", args.mode);
  manifest.set("gps_missing", args.gps_missing);
  manifest.set("coupling_handover", args.coupling_handover);
  manifest.set("coupling_loss", args.coupling_loss);
  manifest.set("coupling_latency", args.coupling_latency);
  if (base.rule_threshold_dbm.has_value())
    manifest.set("rule_threshold_dbm", *base.rule_threshold_dbm);
  manifest.write(args.out_dir);
  std::printf("generated %d drives under %s\n", args.drives, args.out_dir.c_str());
  return 0;
}

// --- train ---

struct TrainArgs {
  std::string traces;
  std::string task = "hand";
  std::string features = "f9";
  int window = 64;
  int horizon = 1;
  int batch = 512;
  std::uint64_t seed = 1;
  std::string out = "model.bin";
  double lr = 0.001;
  int epochs = 100;
  int patience = 10;
  std::string averaging = "epoch";
  double d_thresh = 0.7;
  double split = 0.8;
  int window_step = 1;
  std::string conv_channels = "64,64,64,128";
  int lstm_hidden = 128;
  std::string fc_hidden = "64,32";
  std::uint64_t max_val = 0;
};

int run_train(const TrainArgs& args) {
  const auto corpus = load_trace_dir(args.traces);

  PredictorConfig pc;
  pc.task = task_from_name(args.task);
  pc.feature_kind = feature_kind_from_name(args.features);
  pc.window_length = args.window;
  pc.horizon = args.horizon;
  pc.batch_size = args.batch;
  pc.learning_rate = args.lr;
  pc.max_epochs = args.epochs;
  pc.patience = args.patience;
  pc.averaging = averaging_mode_from_name(args.averaging);
  pc.d_thresh = args.d_thresh;
  pc.window_step = args.window_step;
  pc.conv_channels = parse_conv(args.conv_channels);
  pc.lstm_hidden = args.lstm_hidden;
  pc.fc_hidden = parse_fc(args.fc_hidden);
  pc.max_val_samples = args.max_val;

  const TrainedPredictor model = train_unified(corpus, pc, args.split, args.seed);
  const fs::path out(args.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_model(model, out);
  const fs::path log_path =
      (out.has_parent_path() ? out.parent_path() : fs::path(".")) /
      (out.stem().string() + "_training_log.csv");
  write_text_file(log_path, training_log_csv(model));

  Manifest manifest;
  manifest.set("subcommand", "train");
  manifest.set("traces", args.traces);
  manifest.set("task", args.task);
  manifest.set("features", args.features);
  manifest.set("window", static_cast<std::int64_t>(args.window));
  manifest.set("horizon", static_cast<std::int64_t>(args.horizon));
  manifest.set("batch", static_cast<std::int64_t>(args.batch));
  manifest.set("seed", static_cast<std::int64_t>(args.seed));
  manifest.set("lr", args.lr);
  manifest.set("epochs", static_cast<std::int64_t>(args.epochs));
  manifest.set("patience", static_cast<std::int64_t>(args.patience));
  manifest.set("averaging", args.averaging);
  manifest.set("d_thresh", args.d_thresh);
  manifest.set("split", args.split);
  manifest.set("window_step", static_cast<std::int64_t>(args.window_step));
  manifest.set("conv_channels", args.conv_channels);
  manifest.set("lstm_hidden", static_cast<std::int64_t>(args.lstm_hidden));
  manifest.set("fc_hidden", args.fc_hidden);
  manifest.set("max_val", static_cast<std::int64_t>(args.max_val));
  manifest.outputs.push_back(out);
  manifest.outputs.push_back(log_path);
  manifest.write(out.has_parent_path() ? out.parent_path() : fs::path("."));

  const auto& last = model.training_log.back();
  std::printf("trained %s model: %zu epochs, final val_loss %.6f val_metric %.4f\n",
              args.task.c_str(), model.training_log.size(), last.val_loss,
              last.val_metric);
  return 0;
}

// --- evaluate ---

struct EvaluateArgs {
  std::string model;
  std::string traces;
  double thresh = 0.7;
  std::string out = "report";
};

int run_evaluate(const EvaluateArgs& args) {
  const TrainedPredictor model = load_model(args.model);
  const auto corpus = load_trace_dir(args.traces);
  fs::create_directories(args.out);
  const int T = model.config.window_length;
  const int H = model.config.horizon;

  std::vector<double> probs, preds, reals;
  std::vector<int> labels;
  for (const auto& drive : corpus) {
    for (const auto& net : drive.networks) {
      const auto series = label_series(net, model.config.task);
      const auto rows = static_cast<std::int64_t>(net.rows.size());
      for (std::int64_t t = T - 1; t + H < rows; ++t) {
        const auto& label = series[static_cast<std::size_t>(t + H)];
        if (!label.has_value()) continue;
        std::span<const TelemetryRow> window(net.rows.data() + (t - T + 1),
                                             static_cast<std::size_t>(T));
        if (model.config.task == Task::handover) {
          probs.push_back(predict_handover(model, window));
          labels.push_back(*label == 1.0 ? 1 : 0);
        } else {
          preds.push_back(predict_scalar(model, window));
          reals.push_back(*label);
        }
      }
    }
  }

  Manifest manifest;
  manifest.set("subcommand", "evaluate");
  manifest.set("model", args.model);
  manifest.set("traces", args.traces);
  manifest.set("thresh", args.thresh);
  json report;
  report["task"] = task_name(model.config.task);
  report["samples"] = model.config.task == Task::handover ? probs.size() : preds.size();

  if (model.config.task == Task::handover) {
    std::vector<int> hard;
    hard.reserve(probs.size());
    for (double p : probs) hard.push_back(classify_handover(p, args.thresh));
    const ConfusionMatrix cm = confusion(hard, labels);
    std::string csv = "metric,tp,fp,tn,fn\n";
    csv += "counts," + std::to_string(cm.tp) + ',' + std::to_string(cm.fp) + ',' +
           std::to_string(cm.tn) + ',' + std::to_string(cm.fn) + '\n';
    const double pos = static_cast<double>(cm.tp + cm.fn);
    const double neg = static_cast<double>(cm.fp + cm.tn);
    csv += "row_normalized," + format_double(pos > 0 ? cm.tp / pos : 0.0) + ',' +
           format_double(neg > 0 ? cm.fp / neg : 0.0) + ',' +
           format_double(neg > 0 ? cm.tn / neg : 0.0) + ',' +
           format_double(pos > 0 ? cm.fn / pos : 0.0) + '\n';
    const fs::path confusion_path = fs::path(args.out) / "confusion.csv";
    write_text_file(confusion_path, csv);
    manifest.outputs.push_back(confusion_path);

    const RocCurve roc = roc_auc(probs, labels);
    std::string roc_csv = "fpr,tpr\n";
    for (std::size_t i = 0; i < roc.fpr.size(); ++i)
      roc_csv += format_double(roc.fpr[i]) + ',' + format_double(roc.tpr[i]) + '\n';
    roc_csv += "auc," + format_double(roc.auc) + '\n';
    const fs::path roc_path = fs::path(args.out) / "roc.csv";
    write_text_file(roc_path, roc_csv);
    manifest.outputs.push_back(roc_path);

    // Probability distribution per class.
    std::vector<double> pos_probs, neg_probs;
    for (std::size_t i = 0; i < probs.size(); ++i)
      (labels[i] != 0 ? pos_probs : neg_probs).push_back(probs[i]);
    std::string pct = "series,p25,p50,p75\n";
    for (const auto& [name, series] :
         {std::pair{"prob_positive", &pos_probs}, std::pair{"prob_negative", &neg_probs}}) {
      if (series->empty()) continue;
      const auto p = percentiles(*series);
      pct += std::string(name) + ',' + format_double(p.p25) + ',' + format_double(p.p50) +
             ',' + format_double(p.p75) + '\n';
    }
    const fs::path pct_path = fs::path(args.out) / "percentiles.csv";
    write_text_file(pct_path, pct);
    manifest.outputs.push_back(pct_path);

    report["true_accuracy"] = true_accuracy(probs, labels, args.thresh);
    report["tp_accuracy"] = cm.tp_accuracy();
    report["auc"] = roc.auc;
    std::printf("evaluate: n=%zu true_accuracy=%.4f tp_accuracy=%.4f auc=%.4f\n",
                probs.size(), report["true_accuracy"].get<double>(), cm.tp_accuracy(),
                roc.auc);
  } else {
    const PredictionRatio pr = prediction_ratio(preds, reals);
    std::string csv = "metric,value\n";
    csv += "prediction_ratio," + format_double(pr.ratio) + '\n';
    csv += "included," + std::to_string(pr.included) + '\n';
    csv += "excluded_near_zero," + std::to_string(pr.excluded) + '\n';
    const fs::path ratio_path = fs::path(args.out) / "ratio.csv";
    write_text_file(ratio_path, csv);
    manifest.outputs.push_back(ratio_path);

    std::vector<double> abs_err(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) abs_err[i] = std::abs(preds[i] - reals[i]);
    std::string pct = "series,p25,p50,p75\n";
    for (const auto& [name, series] : {std::pair{"real", &reals},
                                       std::pair{"predicted", &preds},
                                       std::pair{"abs_error", &abs_err}}) {
      const auto p = percentiles(*series);
      pct += std::string(name) + ',' + format_double(p.p25) + ',' + format_double(p.p50) +
             ',' + format_double(p.p75) + '\n';
    }
    const fs::path pct_path = fs::path(args.out) / "percentiles.csv";
    write_text_file(pct_path, pct);
    manifest.outputs.push_back(pct_path);

    report["prediction_ratio"] = pr.ratio;
    report["excluded_near_zero"] = pr.excluded;
    std::printf("evaluate: n=%zu prediction_ratio=%.4f (excluded %zu near-zero)\n",
                preds.size(), pr.ratio, pr.excluded);
  }
  const fs::path report_path = fs::path(args.out) / "report.json";
  write_text_file(report_path, report.dump(2) + "\n");
  manifest.outputs.push_back(report_path);
  manifest.write(args.out);
  return 0;
}

// --- simulate ---

struct SimulateArgs {
  std::string trace_dir;
  std::string hand_model;
  std::string lat_model;
  std::string algo = "both";
  std::uint64_t seed = 1;
  std::string out = "results";
  int warmup = 0;  // 0: derived from the models (or 64 for oracle runs)
  double threshold = 0.7;
};

int run_simulate(const SimulateArgs& args) {
  const auto corpus = load_trace_dir(args.trace_dir);
  fs::create_directories(args.out);

  const bool oracle = args.algo == "oracle";
  const bool needs_models = args.algo == "ans" || args.algo == "both";
  require(oracle || needs_models || args.algo == "baseline", ErrorCode::usage_error,
          "--algo must be ans, baseline, both or oracle");
  TrainedPredictor hand, lat;
  AnsModels models;
  models.handover_threshold = args.threshold;
  if (needs_models) {
    require(!args.hand_model.empty() && !args.lat_model.empty(), ErrorCode::usage_error,
            "--hand-model and --lat-model are required for the trained selector");
    hand = load_model(args.hand_model);
    lat = load_model(args.lat_model);
    models.handover = &hand;
    models.latency = &lat;
  }
  const int warmup = args.warmup > 0 ? args.warmup
                     : needs_models  ? models.required_window()
                                     : 64;

  Manifest manifest;
  manifest.set("subcommand", "simulate");
  manifest.set("trace_dir", args.trace_dir);
  manifest.set("algo", args.algo);
  manifest.set("seed", static_cast<std::int64_t>(args.seed));
  manifest.set("warmup", static_cast<std::int64_t>(warmup));
  manifest.set("threshold", args.threshold);
  if (needs_models) {
    manifest.set("hand_model", args.hand_model);
    manifest.set("lat_model", args.lat_model);
  }

  const VideoLoad load;
  for (const auto& trace : corpus) {
    std::string csv = outcome_csv_header();
    std::string decisions;
    if (needs_models || oracle) {
      const Policy policy = oracle ? Policy::ans_oracle : Policy::ans;
      const SimOutcome out = simulate_drive(trace, policy,
                                            needs_models ? &models : nullptr, load,
                                            args.seed, warmup);
      csv += outcome_csv_rows(out);
      decisions = selection_log_header(static_cast<int>(trace.networks.size()));
      for (const auto& [t, d] : out.decisions) decisions += selection_log_row(t, d);
    }
    if (args.algo == "baseline" || args.algo == "both" || oracle) {
      const SimOutcome out =
          simulate_drive(trace, Policy::baseline, nullptr, load, args.seed, warmup);
      csv += outcome_csv_rows(out);
    }
    const fs::path sim_path = fs::path(args.out) / (trace.drive_id + "_sim.csv");
    write_text_file(sim_path, csv);
    manifest.outputs.push_back(sim_path);
    if (!decisions.empty()) {
      const fs::path dec_path = fs::path(args.out) / (trace.drive_id + "_decisions.csv");
      write_text_file(dec_path, decisions);
      manifest.outputs.push_back(dec_path);
    }
  }
  manifest.write(args.out);
  std::printf("simulated %zu drives (%s) into %s\n", corpus.size(), args.algo.c_str(),
              args.out.c_str());
  return 0;
}

// --- compare ---

SimOutcome parse_outcome_rows(const std::string& drive_id, const std::string& algo,
                              const std::vector<std::vector<std::string>>& rows) {
  SimOutcome out;
  out.drive_id = drive_id;
  out.policy = algo == "baseline" ? Policy::baseline
               : algo == "ans"    ? Policy::ans
                                  : Policy::ans_oracle;
  for (const auto& cells : rows) {
    SecondRecord rec;
    rec.second = *parse_int(cells[0]);
    rec.packets_sent = *parse_int(cells[2]);
    rec.packets_lost = *parse_int(cells[3]);
    if (!cells[4].empty()) rec.mean_latency_ms = *parse_double(cells[4]);
    if (!cells[5].empty()) rec.chosen_network = static_cast<int>(*parse_int(cells[5]));
    out.seconds.push_back(rec);
  }
  return out;
}

struct CompareArgs {
  std::string results;
  std::string out = "report";
};

int run_compare(const CompareArgs& args) {
  std::vector<fs::path> files;
  require(fs::is_directory(args.results), ErrorCode::io_failure,
          args.results + " is not a directory");
  for (const auto& entry : fs::directory_iterator(args.results)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 8 && name.substr(name.size() - 8) == "_sim.csv")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  require(!files.empty(), ErrorCode::empty_corpus,
          "no *_sim.csv files in " + args.results);

  std::vector<std::pair<SimOutcome, SimOutcome>> pairs;
  for (const auto& file : files) {
    const std::string text = read_text_file(file);
    std::map<std::string, std::vector<std::vector<std::string>>> by_algo;
    std::size_t start = 0;
    bool header = true;
    for (std::size_t i = 0; i <= text.size(); ++i) {
      if (i != text.size() && text[i] != '\n') continue;
      const std::string_view line =
          strip_cr(std::string_view(text).substr(start, i - start));
      start = i + 1;
      if (line.empty()) continue;
      if (header) {
        header = false;
        continue;
      }
      const auto cells = split_csv_line(line);
      require(cells.size() == 6, ErrorCode::io_failure,
              "malformed row in " + file.string());
      std::vector<std::string> owned;
      owned.reserve(cells.size());
      for (auto c : cells) owned.emplace_back(c);
      by_algo[owned[1]].push_back(std::move(owned));
    }
    const std::string fname = file.filename().string();
    const std::string drive = fname.substr(0, fname.size() - 8);
    std::string selector_algo;
    for (const auto& [algo, rows] : by_algo)
      if (algo != "baseline") selector_algo = algo;
    require(!selector_algo.empty() && by_algo.count("baseline") == 1,
            ErrorCode::unpaired_outcomes,
            file.string() + " must contain a selector and a baseline run");
    pairs.emplace_back(parse_outcome_rows(drive, selector_algo, by_algo[selector_algo]),
                       parse_outcome_rows(drive, "baseline", by_algo["baseline"]));
  }

  const auto report = compare_report(pairs);
  fs::create_directories(args.out);
  const fs::path csv_path = fs::path(args.out) / "percentiles.csv";
  write_text_file(csv_path, compare_csv(report));
  const fs::path json_path = fs::path(args.out) / "percentiles.json";
  write_text_file(json_path, compare_json(report));

  // Per-drive win/tie counts on the medians.
  int loss_wins = 0, latency_wins = 0, both_wins = 0;
  const int drives = static_cast<int>(report.size() / 2);
  std::string wins =
      "drive,selector_loss_p50,baseline_loss_p50,selector_latency_p50,"
      "baseline_latency_p50,loss_leq,latency_leq\n";
  for (std::size_t i = 0; i + 1 < report.size(); i += 2) {
    const auto& sel = report[i];
    const auto& base = report[i + 1];
    const bool loss_ok = sel.loss_rate.p50 <= base.loss_rate.p50;
    const bool lat_ok = sel.latency_ms.p50 <= base.latency_ms.p50;
    loss_wins += loss_ok ? 1 : 0;
    latency_wins += lat_ok ? 1 : 0;
    both_wins += (loss_ok && lat_ok) ? 1 : 0;
    wins += sel.drive_id + ',' + format_double(sel.loss_rate.p50) + ',' +
            format_double(base.loss_rate.p50) + ',' + format_double(sel.latency_ms.p50) +
            ',' + format_double(base.latency_ms.p50) + ',' + (loss_ok ? "1" : "0") + ',' +
            (lat_ok ? "1" : "0") + '\n';
  }
  const fs::path wins_path = fs::path(args.out) / "wins.csv";
  write_text_file(wins_path, wins);

  Manifest manifest;
  manifest.set("subcommand", "compare");
  manifest.set("results", args.results);
  manifest.outputs.push_back(csv_path);
  manifest.outputs.push_back(json_path);
  manifest.outputs.push_back(wins_path);
  manifest.write(args.out);
  std::printf(
      "compared %d drives: selector median loss <= baseline in %d, latency in %d, both in %d\n",
      drives, loss_wins, latency_wins, both_wins);
  return 0;
}

// --- inspect ---

struct InspectArgs {
  std::string hand_model;
  std::string lat_model;
  int iterations = 1000;
  std::uint64_t seed = 5;
};

int run_inspect(const InspectArgs& args) {
  require(args.iterations > 0, ErrorCode::usage_error, "--iterations must be positive");
  const TrainedPredictor hand = load_model(args.hand_model);
  const TrainedPredictor lat = load_model(args.lat_model);

  // A synthetic trace supplies a realistic inference window.
  SynthConfig cfg;
  cfg.seed = args.seed;
  cfg.duration_s =
      std::max({hand.config.window_length, lat.config.window_length, 100}) + 200;
  const DriveTrace trace = generate_drive(cfg);
  const auto& rows = trace.networks.front().rows;

  auto window_for = [&](const TrainedPredictor& model) {
    const auto T = static_cast<std::size_t>(model.config.window_length);
    return std::span<const TelemetryRow>(rows.data() + (rows.size() - T), T);
  };

  using Clock = std::chrono::steady_clock;
  double hand_total = 0.0, lat_total = 0.0, hand_max = 0.0, lat_max = 0.0;
  double sink = 0.0;
  for (int i = 0; i < args.iterations; ++i) {
    const auto t0 = Clock::now();
    sink += predict_handover(hand, window_for(hand));
    const auto t1 = Clock::now();
    sink += predict_scalar(lat, window_for(lat));
    const auto t2 = Clock::now();
    const double h = std::chrono::duration<double, std::milli>(t1 - t0).count();
    const double l = std::chrono::duration<double, std::milli>(t2 - t1).count();
    hand_total += h;
    lat_total += l;
    hand_max = std::max(hand_max, h);
    lat_max = std::max(lat_max, l);
  }
  const double hand_mean = hand_total / args.iterations;
  const double lat_mean = lat_total / args.iterations;
  const double budget = hand_mean + lat_mean;
  std::printf("handover inference: mean %.3f ms, max %.3f ms\n", hand_mean, hand_max);
  std::printf("latency  inference: mean %.3f ms, max %.3f ms\n", lat_mean, lat_max);
  std::printf("sequential budget: %.3f ms (%s 100 ms constraint)\n", budget,
              budget < 100.0 ? "meets" : "EXCEEDS");
  (void)sink;
  return budget < 100.0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-network telemetry forecasting and packet-routing simulator"};
  app.require_subcommand(1);
  app.set_config("--config");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "synthesize drive trace CSVs");
  generate->add_option("--out", gen.out_dir, "output directory")->required();
  generate->add_option("--drives", gen.drives, "number of drives");
  generate->add_option("--seed", gen.seed, "corpus seed");
  generate->add_option("--duration-min", gen.duration_min, "min drive seconds");
  generate->add_option("--duration-max", gen.duration_max, "max drive seconds");
  generate->add_option("--networks", gen.networks, "cellular networks per drive");
  generate->add_option("--handover-rate", gen.handover_rate, "target handover fraction");
  generate->add_option("--mode", gen.mode, "handover mode: rule|stochastic");
  generate->add_option("--gps-missing", gen.gps_missing, "gps missingness fraction");
  generate->add_option("--coupling-handover", gen.coupling_handover,
                       "rsrp->handover coupling");
  generate->add_option("--coupling-loss", gen.coupling_loss, "rsrp->loss coupling");
  generate->add_option("--coupling-latency", gen.coupling_latency,
                       "rsrp->latency coupling");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "train a forecaster on trace CSVs");
  train->add_option("--traces", tr.traces, "trace directory")->required();
  train->add_option("--task", tr.task, "hand|loss|latency");
  train->add_option("--features", tr.features, "gps|rsrpq|f7|f8|f9");
  train->add_option("--window", tr.window, "window length")
      ->check(CLI::IsMember({32, 64, 128}));
  train->add_option("--horizon", tr.horizon, "prediction horizon seconds");
  train->add_option("--batch", tr.batch, "batch size");
  train->add_option("--seed", tr.seed, "training seed");
  train->add_option("--out", tr.out, "model output path");
  train->add_option("--lr", tr.lr, "learning rate");
  train->add_option("--epochs", tr.epochs, "max epochs");
  train->add_option("--patience", tr.patience, "early-stopping patience");
  train->add_option("--avg", tr.averaging, "gradient averaging: epoch|batch");
  train->add_option("--d-thresh", tr.d_thresh, "handover decision threshold");
  train->add_option("--split", tr.split, "train fraction of drives");
  train->add_option("--window-step", tr.window_step, "training window stride");
  train->add_option("--conv-channels", tr.conv_channels, "conv widths c1,c2,c3,c4");
  train->add_option("--lstm-hidden", tr.lstm_hidden, "lstm hidden size");
  train->add_option("--fc-hidden", tr.fc_hidden, "fc widths f1,f2");
  train->add_option("--max-val", tr.max_val, "cap validation windows per network");

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "score a model on held-out traces");
  evaluate->add_option("--model", ev.model, "model file")->required();
  evaluate->add_option("--traces", ev.traces, "trace directory")->required();
  evaluate->add_option("--thresh", ev.thresh, "decision threshold");
  evaluate->add_option("--out", ev.out, "report directory");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "replay packet routing over traces");
  simulate->add_option("--trace-dir", sim.trace_dir, "trace directory")->required();
  simulate->add_option("--hand-model", sim.hand_model, "handover model file");
  simulate->add_option("--lat-model", sim.lat_model, "latency model file");
  simulate->add_option("--algo", sim.algo, "ans|baseline|both|oracle");
  simulate->add_option("--seed", sim.seed, "simulation seed");
  simulate->add_option("--out", sim.out, "results directory");
  simulate->add_option("--warmup", sim.warmup, "warm-up seconds (0 = auto)");
  simulate->add_option("--threshold", sim.threshold, "handover probability threshold");

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "summarize selector vs baseline results");
  compare->add_option("--results", cmp.results, "simulate output directory")->required();
  compare->add_option("--out", cmp.out, "report directory");

  InspectArgs ins;
  auto* inspect = app.add_subcommand("inspect", "measure inference latency");
  inspect->add_option("--hand-model", ins.hand_model, "handover model file")->required();
  inspect->add_option("--lat-model", ins.lat_model, "latency model file")->required();
  inspect->add_option("--iterations", ins.iterations, "timing iterations");
  inspect->add_option("--seed", ins.seed, "window generation seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*generate) return run_generate(gen);
    if (*train) return run_train(tr);
    if (*evaluate) return run_evaluate(ev);
    if (*simulate) return run_simulate(sim);
    if (*compare) return run_compare(cmp);
    if (*inspect) return run_inspect(ins);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code() == ErrorCode::usage_error ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
