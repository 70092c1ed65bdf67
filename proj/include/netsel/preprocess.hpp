#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "netsel/tensor.hpp"
#include "netsel/trace.hpp"

namespace netsel {

enum class Task { handover, loss, latency };

const char* task_name(Task t);
Task task_from_name(const std::string& name);

enum class FeatureKind { gps_only, rsrp_rsrq, seven, eight, nine, custom };

const char* feature_kind_name(FeatureKind k);
FeatureKind feature_kind_from_name(const std::string& name);

// Ordered, distinct feature names. The predefined kinds are the fixed input
// sets of the four model families.
struct FeatureSet {
  FeatureKind kind = FeatureKind::custom;
  std::vector<std::string> names;

  static FeatureSet predefined(FeatureKind kind);
  static FeatureSet custom(std::vector<std::string> names);

  std::size_t size() const { return names.size(); }
  bool operator==(const FeatureSet&) const = default;
};

// Numeric view of one row feature; nullopt when the row lacks it.
std::optional<double> feature_value(const TelemetryRow& row, const std::string& name);

// Raw feature matrix for one network trace: F x duration, column per second,
// NaN marks missing cells.
Matrix feature_matrix(const NetworkTrace& trace, const FeatureSet& features);

// Per-feature and label min/max fitted on training rows.
struct NormalizationParams {
  std::vector<double> x_min;
  std::vector<double> x_max;
  std::vector<bool> degenerate;  // x_max == x_min
  double y_min = 0.0;
  double y_max = 1.0;

  std::size_t size() const { return x_min.size(); }
};

// rows: n x F with NaN for missing; labels may be empty (classification).
NormalizationParams fit_normalization(const Matrix& rows, const std::vector<double>& labels);

// x' = (x - min) / (max - min), clipped to [0,1]; degenerate features map to
// 0; NaN passes through untouched (imputation handles it afterwards).
void apply_normalization_in_place(Matrix& rows, const NormalizationParams& params);
double normalize_value(double x, double lo, double hi, bool degenerate);
double normalize_label(double y, const NormalizationParams& params);
double denormalize_label(double y_norm, const NormalizationParams& params);

// Pearson coefficients over all rows of all networks of all drives,
// pairwise-complete on missing values. Symmetric, unit diagonal.
Matrix correlation_matrix(const std::vector<DriveTrace>& traces, const FeatureSet& features);

// Greedy scan in declared order: drop a feature iff |corr| > threshold with
// an already kept one. Idempotent.
FeatureSet prune_features(const Matrix& corr, const FeatureSet& features,
                          double threshold = 0.9);

// Fills every NaN cell with the mean of that feature over the k nearest rows
// (Euclidean over mutually present features, scaled by the count; neighbors
// must have the target feature). rows should already be normalized so the
// distance is scale-free.
Matrix impute_knn(const Matrix& rows, int k = 2);

// Normalized and imputed feature matrix for one network of one drive.
struct PreparedTrace {
  std::string drive_id;
  int network_id = 0;
  std::int64_t t0 = 0;     // timestamp of column 0
  Matrix features;         // F x duration, complete, in [0,1]
};

struct WindowConfig {
  FeatureSet feature_set;
  int window_length = 64;
  int step = 1;
  int horizon = 1;
  Task task = Task::handover;
  int impute_k = 2;
};

// One supervised pair, materialized.
struct WindowedSample {
  Matrix inputs;  // window_length x num_features, normalized
  double label = 0.0;
  std::string drive_id;
  int network_id = 0;
  std::int64_t end_timestamp = 0;
};

// Windows reference shared per-trace matrices instead of copying; sample(i)
// materializes on demand.
struct SupervisedDataset {
  Task task = Task::handover;
  FeatureSet feature_set;
  int window_length = 64;
  int horizon = 1;
  NormalizationParams normalization;

  struct SampleRef {
    std::int32_t source = 0;  // index into sources
    std::int32_t end_col = 0;
    double label = 0.0;  // normalized for regression tasks, 0/1 for handover
  };
  std::vector<PreparedTrace> sources;
  std::vector<SampleRef> samples;

  std::size_t size() const { return samples.size(); }
  WindowedSample sample(std::size_t i) const;
  double raw_label(std::size_t i) const;  // de-normalized

  // Moves the other dataset's sources/samples into this one.
  void append(SupervisedDataset&& other);
};

// Raw label series for a trace; nullopt where the label cannot be formed.
std::vector<std::optional<double>> label_series(const NetworkTrace& trace, Task task);

// Sliding-window transform of one network trace: selects features, applies
// the fitted normalization, imputes, then emits one sample per end position.
SupervisedDataset make_windows(const NetworkTrace& trace, const std::string& drive_id,
                               const WindowConfig& config,
                               const NormalizationParams& params);

// Keeps every positive, uniformly subsamples negatives without replacement
// down to the positive count. Input order is preserved.
SupervisedDataset balance_undersample(const SupervisedDataset& dataset, std::uint64_t seed);

// Binary container with a JSON header; reload reproduces samples exactly.
void save_dataset(const SupervisedDataset& dataset, const std::filesystem::path& path);
SupervisedDataset load_dataset(const std::filesystem::path& path);

}  // namespace netsel
