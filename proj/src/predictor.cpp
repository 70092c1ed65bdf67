#include "netsel/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "netsel/format.hpp"
#include "netsel/metrics.hpp"
#include "netsel/rng.hpp"

namespace netsel {

using nlohmann::json;

const char* averaging_mode_name(AveragingMode m) {
  return m == AveragingMode::per_epoch ? "epoch" : "batch";
}

AveragingMode averaging_mode_from_name(const std::string& name) {
  if (name == "epoch") return AveragingMode::per_epoch;
  if (name == "batch") return AveragingMode::per_batch;
  fail(ErrorCode::invalid_config, "unknown averaging mode '" + name + "'");
}

LossKind PredictorConfig::loss_kind() const {
  switch (task) {
    case Task::handover: return LossKind::bce;
    case Task::loss: return LossKind::mse;
    default: return LossKind::mae;
  }
}

FinalActivation PredictorConfig::final_activation() const {
  return task == Task::handover ? FinalActivation::sigmoid : FinalActivation::identity;
}

ModelArch PredictorConfig::make_arch() const {
  ModelArch arch;
  arch.input_features = static_cast<int>(FeatureSet::predefined(feature_kind).size());
  arch.conv_channels = conv_channels;
  arch.lstm_hidden = lstm_hidden;
  arch.fc_hidden = fc_hidden;
  arch.final_activation = final_activation();
  return arch;
}

void PredictorConfig::validate() const {
  require(task != Task::loss || feature_kind == FeatureKind::eight,
          ErrorCode::invalid_config, "the loss task uses the 8-feature set only");
  require(feature_kind != FeatureKind::custom, ErrorCode::invalid_config,
          "predictors use the predefined feature sets");
  require(window_length >= make_arch().min_window(), ErrorCode::invalid_config,
          "window too short for the conv receptive field");
  require(horizon >= 1, ErrorCode::invalid_config, "horizon must be >= 1");
  require(d_thresh > 0.0 && d_thresh < 1.0, ErrorCode::invalid_config,
          "d_thresh must be in (0,1)");
  require(batch_size >= 1, ErrorCode::invalid_config, "batch_size must be >= 1");
  require(learning_rate > 0.0, ErrorCode::invalid_config, "learning_rate must be > 0");
  require(max_epochs >= 1, ErrorCode::invalid_config, "max_epochs must be >= 1");
  require(patience >= 1, ErrorCode::invalid_config, "patience must be >= 1");
  require(window_step >= 1, ErrorCode::invalid_config, "window_step must be >= 1");
  make_arch().validate();
}

namespace {

// Runs fn(i) for i in [0, n) across worker threads; each index writes only
// its own slot so results do not depend on scheduling.
template <typename Fn>
void parallel_over_instances(std::size_t n, Fn&& fn) {
  if (n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> workers;
  workers.reserve(n - 1);
  for (std::size_t i = 1; i < n; ++i) {
    workers.emplace_back([&, i] {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  try {
    fn(0);
  } catch (...) {
    errors[0] = std::current_exception();
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct InstanceData {
  SupervisedDataset dataset;
  std::vector<WindowRef> refs;
  std::vector<double> labels;
};

void build_refs(InstanceData& inst) {
  inst.refs.clear();
  inst.labels.clear();
  inst.refs.reserve(inst.dataset.size());
  inst.labels.reserve(inst.dataset.size());
  for (const auto& s : inst.dataset.samples) {
    inst.refs.push_back(WindowRef{
        &inst.dataset.sources[static_cast<std::size_t>(s.source)].features, s.end_col});
    inst.labels.push_back(s.label);
  }
}

// Mean that returns the common value untouched when every input is equal;
// keeps metrics bitwise identical between N synchronized replicas and a
// single instance.
double replica_mean(std::span<const double> values) {
  bool all_equal = true;
  for (double v : values)
    if (v != values.front()) {
      all_equal = false;
      break;
    }
  if (all_equal) return values.front();
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

double validation_metric(const PredictorConfig& config, const NormalizationParams& norm,
                         std::span<const double> preds, std::span<const double> labels) {
  if (config.task == Task::handover) {
    std::vector<int> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == 1.0 ? 1 : 0;
    return true_accuracy(preds, y, config.d_thresh);
  }
  std::vector<double> pred_raw(preds.size()), real_raw(labels.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    pred_raw[i] = denormalize_label(preds[i], norm);
    real_raw[i] = denormalize_label(labels[i], norm);
  }
  try {
    return prediction_ratio(pred_raw, real_raw).ratio;
  } catch (const Error&) {
    return 0.0;  // all-zero validation labels; ratio undefined
  }
}

}  // namespace

TrainedPredictor train_unified(const std::vector<DriveTrace>& corpus,
                               const PredictorConfig& config, double train_fraction,
                               std::uint64_t seed) {
  config.validate();
  require(!corpus.empty(), ErrorCode::empty_corpus, "no drives in corpus");
  require(train_fraction > 0.0 && train_fraction <= 1.0, ErrorCode::invalid_config,
          "train fraction must be in (0,1]");
  const std::size_t networks = corpus.front().networks.size();
  require(networks >= 1, ErrorCode::empty_corpus, "drives carry no networks");
  for (const auto& drive : corpus)
    require(drive.networks.size() == networks, ErrorCode::network_length_mismatch,
            "drives disagree on network count");

  const Rng root(seed);
  const FeatureSet features = FeatureSet::predefined(config.feature_kind);

  // Drive-level split keeps overlapping windows from leaking across it.
  std::vector<std::size_t> drive_order(corpus.size());
  for (std::size_t i = 0; i < drive_order.size(); ++i) drive_order[i] = i;
  {
    Rng split_rng = root.child(0x5eed5);
    shuffle_in_place(drive_order, split_rng);
  }
  std::size_t n_train = static_cast<std::size_t>(
      std::lround(train_fraction * static_cast<double>(corpus.size())));
  n_train = std::clamp<std::size_t>(n_train, 1, corpus.size());
  if (corpus.size() >= 2 && n_train == corpus.size()) n_train = corpus.size() - 1;
  std::vector<std::size_t> train_idx(drive_order.begin(),
                                     drive_order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> val_idx(drive_order.begin() + static_cast<std::ptrdiff_t>(n_train),
                                   drive_order.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(val_idx.begin(), val_idx.end());

  // Normalization is fitted once over the training rows of every network.
  NormalizationParams norm;
  {
    std::vector<Matrix> blocks;
    std::vector<double> labels;
    Eigen::Index rows = 0;
    for (std::size_t di : train_idx) {
      for (const auto& net : corpus[di].networks) {
        blocks.push_back(feature_matrix(net, features).transpose());
        rows += blocks.back().rows();
        for (const auto& lab : label_series(net, config.task))
          if (lab.has_value()) labels.push_back(*lab);
      }
    }
    Matrix pooled(rows, static_cast<Eigen::Index>(features.size()));
    Eigen::Index at = 0;
    for (const auto& b : blocks) {
      pooled.middleRows(at, b.rows()) = b;
      at += b.rows();
    }
    norm = fit_normalization(pooled, labels);
  }

  WindowConfig wc;
  wc.feature_set = features;
  wc.window_length = config.window_length;
  wc.step = config.window_step;
  wc.horizon = config.horizon;
  wc.task = config.task;
  wc.impute_k = config.impute_k;

  // Per-network training data; one model instance trains on each.
  std::vector<InstanceData> instances(networks);
  for (std::size_t n = 0; n < networks; ++n) {
    SupervisedDataset ds;
    bool first = true;
    for (std::size_t di : train_idx) {
      auto part = make_windows(corpus[di].networks[n], corpus[di].drive_id, wc, norm);
      if (first) {
        ds = std::move(part);
        first = false;
      } else {
        ds.append(std::move(part));
      }
    }
    require(ds.size() > 0, ErrorCode::empty_corpus, "no training windows");
    // One shared balance seed: identical per-network data stays identical.
    if (config.task == Task::handover)
      ds = balance_undersample(ds, mix64(seed, 0xba1a));
    instances[n].dataset = std::move(ds);
    build_refs(instances[n]);
  }

  // Each instance validates on its own network's windows from the held-back
  // drives (the training drives when the corpus has only one drive).
  std::vector<InstanceData> val_instances(networks);
  for (std::size_t n = 0; n < networks; ++n) {
    WindowConfig vwc = wc;
    vwc.step = 1;
    SupervisedDataset ds;
    bool first = true;
    const auto& idx = val_idx.empty() ? train_idx : val_idx;
    for (std::size_t di : idx) {
      auto part = make_windows(corpus[di].networks[n], corpus[di].drive_id, vwc, norm);
      if (first) {
        ds = std::move(part);
        first = false;
      } else {
        ds.append(std::move(part));
      }
    }
    // Balanced validation keeps the early-stopping signal sensitive to the
    // rare class; regression keeps the natural distribution.
    if (config.task == Task::handover) {
      try {
        ds = balance_undersample(ds, mix64(seed, 0xba1a, 0xfffd));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::no_positives) throw;  // keep natural set
      }
    }
    if (config.max_val_samples > 0 && ds.size() > config.max_val_samples) {
      std::vector<std::size_t> keep(ds.size());
      for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
      Rng sub = root.child(0x5b5a);
      shuffle_in_place(keep, sub);
      keep.resize(config.max_val_samples);
      std::sort(keep.begin(), keep.end());
      SupervisedDataset capped = ds;
      capped.samples.clear();
      for (std::size_t i : keep) capped.samples.push_back(ds.samples[i]);
      ds = std::move(capped);
    }
    require(ds.size() > 0, ErrorCode::empty_corpus, "no validation windows");
    val_instances[n].dataset = std::move(ds);
    build_refs(val_instances[n]);
  }

  // All instances share one parameter set: initialization is identical and
  // every update applies the instance-averaged gradient, so the replicas
  // never diverge.
  ModelParams params = ModelParams::init(config.make_arch(), mix64(seed, 0x1417));
  OptimizerConfig oc;
  oc.kind = config.optimizer;
  oc.learning_rate = config.learning_rate;
  OptimizerState opt = OptimizerState::create(oc, params.arch);
  const LossKind loss_kind = config.loss_kind();

  TrainedPredictor result;
  result.config = config;
  result.feature_set = features;
  result.normalization = norm;

  ModelParams best_params = params;
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;

  std::vector<GradientSet> grads;
  grads.reserve(networks);
  for (std::size_t n = 0; n < networks; ++n) grads.push_back(ModelParams::zeros(params.arch));
  std::vector<double> inst_loss(networks, 0.0);
  std::vector<double> inst_val_loss(networks, 0.0);
  std::vector<double> inst_val_metric(networks, 0.0);

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    double train_loss = 0.0;

    if (config.averaging == AveragingMode::per_epoch) {
      // Accumulate the full-epoch mean gradient per instance, then apply one
      // shared update from the instance average.
      parallel_over_instances(networks, [&](std::size_t n) {
        InstanceData& inst = instances[n];
        GradientSet& g = grads[n];
        for (Matrix* m : g.buffers()) m->setZero();
        double loss_sum = 0.0;
        model_backward_sum(params, inst.refs, config.window_length, inst.labels,
                           loss_kind, g, loss_sum);
        const double inv = 1.0 / static_cast<double>(inst.refs.size());
        for (Matrix* m : g.buffers()) *m *= inv;
        inst_loss[n] = loss_sum * inv;
      });
      for (std::size_t n = 0; n < networks; ++n)
        require(grads[n].all_finite(), ErrorCode::non_finite_gradient,
                "instance gradient diverged");
      train_loss = replica_mean(inst_loss);
      const GradientSet avg = average_gradients(grads);
      optimizer_step(params, avg, opt);
    } else {
      // Per-batch averaging: each instance walks its own shuffled batches;
      // the shared update happens every step.
      std::vector<std::vector<std::size_t>> perms(networks);
      std::size_t min_size = instances[0].refs.size();
      for (std::size_t n = 0; n < networks; ++n) {
        perms[n].resize(instances[n].refs.size());
        for (std::size_t i = 0; i < perms[n].size(); ++i) perms[n][i] = i;
        Rng shuffle_rng(mix64(seed, 0xe90c, static_cast<std::uint64_t>(epoch)));
        shuffle_in_place(perms[n], shuffle_rng);
        min_size = std::min(min_size, perms[n].size());
      }
      const auto bs = static_cast<std::size_t>(config.batch_size);
      const std::size_t steps = (min_size + bs - 1) / bs;
      double loss_acc = 0.0;
      for (std::size_t step = 0; step < steps; ++step) {
        parallel_over_instances(networks, [&](std::size_t n) {
          InstanceData& inst = instances[n];
          const auto& perm = perms[n];
          const std::size_t lo = std::min(step * bs, perm.size() - 1);
          const std::size_t hi = std::min(lo + bs, perm.size());
          std::vector<WindowRef> batch_refs;
          std::vector<double> batch_labels;
          batch_refs.reserve(hi - lo);
          batch_labels.reserve(hi - lo);
          for (std::size_t i = lo; i < hi; ++i) {
            batch_refs.push_back(inst.refs[perm[i]]);
            batch_labels.push_back(inst.labels[perm[i]]);
          }
          GradientSet& g = grads[n];
          for (Matrix* m : g.buffers()) m->setZero();
          double loss_sum = 0.0;
          model_backward_sum(params, batch_refs, config.window_length, batch_labels,
                             loss_kind, g, loss_sum);
          const double inv = 1.0 / static_cast<double>(batch_refs.size());
          for (Matrix* m : g.buffers()) *m *= inv;
          inst_loss[n] = loss_sum * inv;
        });
        for (std::size_t n = 0; n < networks; ++n)
          require(grads[n].all_finite(), ErrorCode::non_finite_gradient,
                  "instance gradient diverged");
        loss_acc += replica_mean(inst_loss);
        const GradientSet avg = average_gradients(grads);
        optimizer_step(params, avg, opt);
      }
      train_loss = loss_acc / static_cast<double>(steps);
    }

    require(std::isfinite(train_loss), ErrorCode::diverged_training,
            "training loss is not finite");

    parallel_over_instances(networks, [&](std::size_t n) {
      const InstanceData& v = val_instances[n];
      const std::vector<double> preds =
          model_forward_batch(params, v.refs, config.window_length);
      inst_val_loss[n] = loss_mean(preds, v.labels, loss_kind);
      inst_val_metric[n] = validation_metric(config, norm, preds, v.labels);
    });
    const double val_loss = replica_mean(inst_val_loss);
    require(std::isfinite(val_loss), ErrorCode::diverged_training,
            "validation loss is not finite");
    const double metric = replica_mean(inst_val_metric);
    result.training_log.push_back(EpochLog{epoch, train_loss, val_loss, metric});

    if (val_loss < best_val) {
      best_val = val_loss;
      best_params = params;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }

  result.params = std::move(best_params);
  return result;
}

Matrix prepare_window(const TrainedPredictor& model, std::span<const TelemetryRow> rows) {
  const int T = model.config.window_length;
  require(static_cast<int>(rows.size()) == T, ErrorCode::shape_mismatch,
          "window must hold exactly " + std::to_string(T) + " rows");
  const auto F = static_cast<Eigen::Index>(model.feature_set.size());
  Matrix win(static_cast<Eigen::Index>(T), F);  // rows x features for the pipeline
  for (Eigen::Index t = 0; t < T; ++t) {
    for (Eigen::Index f = 0; f < F; ++f) {
      const auto v =
          feature_value(rows[static_cast<std::size_t>(t)],
                        model.feature_set.names[static_cast<std::size_t>(f)]);
      win(t, f) = v.has_value() ? *v : std::numeric_limits<double>::quiet_NaN();
    }
  }
  apply_normalization_in_place(win, model.normalization);
  if (win.hasNaN()) win = impute_knn(win, model.config.impute_k);
  return win.transpose();  // F x T
}

double predict_handover(const TrainedPredictor& model, std::span<const TelemetryRow> window) {
  require(model.config.task == Task::handover, ErrorCode::wrong_task,
          "model was not trained for handover prediction");
  const Matrix w = prepare_window(model, window);
  return model_forward_single(model.params, w);
}

double predict_scalar(const TrainedPredictor& model, std::span<const TelemetryRow> window) {
  require(model.config.task == Task::loss || model.config.task == Task::latency,
          ErrorCode::wrong_task, "model is not a regression predictor");
  const Matrix w = prepare_window(model, window);
  const double norm_out = model_forward_single(model.params, w);
  double value = denormalize_label(norm_out, model.normalization);
  value = std::max(value, 0.0);
  if (model.config.task == Task::loss) value = std::min(value, 1.0);
  return value;
}

int baseline_rule_predict(std::span<const TelemetryRow> window, double rsrp_thresh,
                          double rsrq_thresh) {
  require(!window.empty(), ErrorCode::shape_mismatch, "empty window");
  const TelemetryRow& last = window.back();
  require(last.rsrp.has_value(), ErrorCode::missing_feature, "rsrp missing");
  require(last.rsrq.has_value(), ErrorCode::missing_feature, "rsrq missing");
  return (*last.rsrp < rsrp_thresh || *last.rsrq < rsrq_thresh) ? 1 : 0;
}

namespace {

constexpr char kModelMagic[4] = {'N', 'S', 'M', '1'};

json arch_to_json(const ModelArch& a) {
  return json{{"input_features", a.input_features},
              {"conv_channels", a.conv_channels},
              {"kernel", a.kernel},
              {"lstm_hidden", a.lstm_hidden},
              {"fc_hidden", a.fc_hidden},
              {"final_activation",
               a.final_activation == FinalActivation::sigmoid ? "sigmoid" : "identity"}};
}

}  // namespace

void save_model(const TrainedPredictor& model, const std::filesystem::path& path) {
  json header;
  header["format"] = 1;
  const PredictorConfig& c = model.config;
  header["config"] = json{{"task", task_name(c.task)},
                          {"features", feature_kind_name(c.feature_kind)},
                          {"window_length", c.window_length},
                          {"horizon", c.horizon},
                          {"d_thresh", c.d_thresh},
                          {"batch_size", c.batch_size},
                          {"learning_rate", c.learning_rate},
                          {"max_epochs", c.max_epochs},
                          {"patience", c.patience},
                          {"averaging", averaging_mode_name(c.averaging)},
                          {"optimizer", c.optimizer == OptimizerKind::adam ? "adam" : "sgd"},
                          {"window_step", c.window_step},
                          {"impute_k", c.impute_k},
                          {"max_val_samples", c.max_val_samples},
                          {"conv_channels", c.conv_channels},
                          {"lstm_hidden", c.lstm_hidden},
                          {"fc_hidden", c.fc_hidden}};
  header["arch"] = arch_to_json(model.params.arch);
  header["feature_names"] = model.feature_set.names;
  header["normalization"] = json{{"x_min", model.normalization.x_min},
                                 {"x_max", model.normalization.x_max},
                                 {"degenerate", model.normalization.degenerate},
                                 {"y_min", model.normalization.y_min},
                                 {"y_max", model.normalization.y_max}};
  json log = json::array();
  for (const auto& e : model.training_log)
    log.push_back(json{{"epoch", e.epoch},
                       {"train_loss", e.train_loss},
                       {"val_loss", e.val_loss},
                       {"val_metric", e.val_metric}});
  header["training_log"] = std::move(log);
  header["parameter_count"] = model.params.parameter_count();
  const std::string head = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::io_failure, "cannot open " + path.string());
  out.write(kModelMagic, 4);
  const std::uint64_t hlen = head.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof hlen);
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  for (const Matrix* m : model.params.buffers())
    out.write(reinterpret_cast<const char*>(m->data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m->size())));
  require(out.good(), ErrorCode::io_failure, "write failed: " + path.string());
}

TrainedPredictor load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::io_failure, "cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  require(in.good() && std::memcmp(magic, kModelMagic, 4) == 0, ErrorCode::io_failure,
          "bad model magic in " + path.string());
  std::uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof hlen);
  std::string head(hlen, 0);
  in.read(head.data(), static_cast<std::streamsize>(hlen));
  require(in.good(), ErrorCode::io_failure, "truncated model header");
  const json header = json::parse(head);

  TrainedPredictor model;
  const json& jc = header.at("config");
  PredictorConfig c;
  c.task = task_from_name(jc.at("task").get<std::string>());
  c.feature_kind = feature_kind_from_name(jc.at("features").get<std::string>());
  c.window_length = jc.at("window_length").get<int>();
  c.horizon = jc.at("horizon").get<int>();
  c.d_thresh = jc.at("d_thresh").get<double>();
  c.batch_size = jc.at("batch_size").get<int>();
  c.learning_rate = jc.at("learning_rate").get<double>();
  c.max_epochs = jc.at("max_epochs").get<int>();
  c.patience = jc.at("patience").get<int>();
  c.averaging = averaging_mode_from_name(jc.at("averaging").get<std::string>());
  c.optimizer = jc.at("optimizer").get<std::string>() == "adam" ? OptimizerKind::adam
                                                                : OptimizerKind::sgd;
  c.window_step = jc.at("window_step").get<int>();
  c.impute_k = jc.at("impute_k").get<int>();
  c.max_val_samples = jc.at("max_val_samples").get<std::size_t>();
  jc.at("conv_channels").get_to(c.conv_channels);
  c.lstm_hidden = jc.at("lstm_hidden").get<int>();
  jc.at("fc_hidden").get_to(c.fc_hidden);
  model.config = c;

  model.feature_set = FeatureSet::predefined(c.feature_kind);
  const auto names = header.at("feature_names").get<std::vector<std::string>>();
  require(names == model.feature_set.names, ErrorCode::model_feature_mismatch,
          "stored feature names disagree with the feature set kind");

  const json& jn = header.at("normalization");
  model.normalization.x_min = jn.at("x_min").get<std::vector<double>>();
  model.normalization.x_max = jn.at("x_max").get<std::vector<double>>();
  model.normalization.degenerate = jn.at("degenerate").get<std::vector<bool>>();
  model.normalization.y_min = jn.at("y_min").get<double>();
  model.normalization.y_max = jn.at("y_max").get<double>();

  for (const auto& e : header.at("training_log"))
    model.training_log.push_back(EpochLog{e.at("epoch").get<int>(),
                                          e.at("train_loss").get<double>(),
                                          e.at("val_loss").get<double>(),
                                          e.at("val_metric").get<double>()});

  model.params = ModelParams::zeros(c.make_arch());
  std::size_t expect = header.at("parameter_count").get<std::size_t>();
  require(expect == model.params.parameter_count(), ErrorCode::io_failure,
          "parameter count mismatch in " + path.string());
  for (Matrix* m : model.params.buffers())
    in.read(reinterpret_cast<char*>(m->data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m->size())));
  require(in.good(), ErrorCode::io_failure, "truncated model payload");
  return model;
}

std::string training_log_csv(const TrainedPredictor& model) {
  std::string out = "epoch,train_loss,val_loss,val_metric\n";
  for (const auto& e : model.training_log) {
    out += std::to_string(e.epoch);
    out += ',';
    out += format_double(e.train_loss);
    out += ',';
    out += format_double(e.val_loss);
    out += ',';
    out += format_double(e.val_metric);
    out += '\n';
  }
  return out;
}

}  // namespace netsel
