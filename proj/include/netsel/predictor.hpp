#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "netsel/network.hpp"
#include "netsel/preprocess.hpp"
#include "netsel/trace.hpp"

namespace netsel {

// `per_epoch` keeps one shared update per epoch from the instance-averaged
// accumulated gradients; `per_batch` averages instance gradients every batch
// step. Both keep all per-network instances bit-identical.
enum class AveragingMode { per_epoch, per_batch };

const char* averaging_mode_name(AveragingMode m);
AveragingMode averaging_mode_from_name(const std::string& name);

struct PredictorConfig {
  Task task = Task::handover;
  FeatureKind feature_kind = FeatureKind::nine;
  int window_length = 64;
  int horizon = 1;
  double d_thresh = 0.7;  // handover only
  int batch_size = 512;
  double learning_rate = 0.001;
  int max_epochs = 100;
  int patience = 10;
  AveragingMode averaging = AveragingMode::per_epoch;
  OptimizerKind optimizer = OptimizerKind::adam;
  int window_step = 1;        // training-window stride
  int impute_k = 2;
  std::size_t max_val_samples = 0;  // 0 = use all

  // Network dimensions; layer structure itself is fixed.
  std::array<int, 4> conv_channels{64, 64, 64, 128};
  int lstm_hidden = 128;
  std::array<int, 2> fc_hidden{64, 32};

  LossKind loss_kind() const;
  FinalActivation final_activation() const;
  ModelArch make_arch() const;
  void validate() const;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_metric = 0.0;  // true accuracy (handover) or prediction ratio
};

struct TrainedPredictor {
  PredictorConfig config;
  FeatureSet feature_set;
  NormalizationParams normalization;
  ModelParams params;
  std::vector<EpochLog> training_log;
};

// Trains one per-network model instance per cellular network on that
// network's windows; gradients are averaged across instances (per epoch by
// default) and one shared update is applied, so every instance carries the
// same weights throughout. Early-stops on validation loss and returns the
// best-validation parameters.
TrainedPredictor train_unified(const std::vector<DriveTrace>& corpus,
                               const PredictorConfig& config, double train_fraction,
                               std::uint64_t seed);

// Normalized, imputed feature window (F x T) for this model from raw rows.
Matrix prepare_window(const TrainedPredictor& model, std::span<const TelemetryRow> rows);

// P(handover within the horizon | window). Pure in (model, window).
double predict_handover(const TrainedPredictor& model, std::span<const TelemetryRow> window);

// De-normalized regression output, clamped to the physical range.
double predict_scalar(const TrainedPredictor& model, std::span<const TelemetryRow> window);

// Non-learning comparator: flags a handover when the latest signal readings
// fall below the usual radio thresholds.
int baseline_rule_predict(std::span<const TelemetryRow> window, double rsrp_thresh = -110.0,
                          double rsrq_thresh = -15.0);

// Versioned container: JSON header + raw little-endian doubles. Reload is
// bit-exact.
void save_model(const TrainedPredictor& model, const std::filesystem::path& path);
TrainedPredictor load_model(const std::filesystem::path& path);

// CSV form of the per-epoch log: epoch,train_loss,val_loss,val_metric.
std::string training_log_csv(const TrainedPredictor& model);

}  // namespace netsel
